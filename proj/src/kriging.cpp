#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "covario/evaluation.hpp"

namespace covario {

std::vector<std::size_t> nearest_neighbors(const SpatialSample& data, const Coord& target, std::size_t M) {
    if (M < 1) throw std::invalid_argument("kriging needs M >= 1");
    const std::size_t n = data.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = euclidean_distance(data.location(i), target, data.dim());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(M, n);
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), closer);
    order.resize(take);
    return order;
}

KrigingSystem kriging_system(const CovarianceFunction& cov, const SpatialSample& data, const Coord& target,
                             std::size_t M) {
    KrigingSystem sys;
    sys.neighbors = nearest_neighbors(data, target, M);
    const auto m = static_cast<Eigen::Index>(sys.neighbors.size());
    sys.gamma = Eigen::MatrixXd::Zero(m + 1, m + 1);
    sys.rhs = Eigen::VectorXd::Ones(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto& pa = data.location(sys.neighbors[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b <= a; ++b) {
            const auto& pb = data.location(sys.neighbors[static_cast<std::size_t>(b)]);
            const double v = cov(euclidean_distance(pa, pb, data.dim()));
            sys.gamma(a, b) = v;
            sys.gamma(b, a) = v;
        }
        sys.gamma(a, m) = 1.0;
        sys.gamma(m, a) = 1.0;
        sys.rhs[a] = cov(euclidean_distance(pa, target, data.dim()));
    }
    return sys;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    const Eigen::VectorXd& l = solver.eigenvalues();
    const double cutoff = 1e-10 * l.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv(l.size());
    for (Eigen::Index i = 0; i < l.size(); ++i) inv[i] = std::abs(l[i]) > cutoff ? 1.0 / l[i] : 0.0;
    return solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
}

std::vector<double> krige(const CovarianceFunction& cov, const SpatialSample& data, std::span<const Coord> targets,
                          std::size_t M) {
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        const auto sys = kriging_system(cov, data, t, M);
        const Eigen::VectorXd w = pseudo_inverse(sys.gamma) * sys.rhs;
        double pred = 0.0;
        for (std::size_t a = 0; a < sys.neighbors.size(); ++a) pred += w[static_cast<Eigen::Index>(a)] * data.value(sys.neighbors[a]);
        out.push_back(pred);
    }
    return out;
}

std::vector<double> krige_empirical(const EmpiricalCovariogram& est, const SpatialSample& data,
                                    std::span<const Coord> targets, std::size_t M) {
    const CovariogramLookup lookup(est);
    return krige([&](double d) { return lookup(d); }, data, targets, M);
}

double mean_squared_error(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size() || truth.empty()) throw std::invalid_argument("prediction sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    return s / static_cast<double>(truth.size());
}

double mspe_metric(const EmpiricalCovariogram& est, const SpatialSample& data, std::span<const double> truth_values,
                   std::span<const Coord> targets, std::size_t M) {
    if (truth_values.size() != targets.size()) throw std::invalid_argument("one truth value per target is required");
    return mean_squared_error(truth_values, krige_empirical(est, data, targets, M));
}

double mspe_gstat_metric(const EmpiricalCovariogram& est, const SpatialSample& data,
                         std::span<const double> truth_values, std::span<const Coord> targets, ModelFamily family,
                         int dim, std::size_t M) {
    if (truth_values.size() != targets.size()) throw std::invalid_argument("one truth value per target is required");
    CovarianceModel model{family, fit_model_nls(est, family, dim), dim};
    return mean_squared_error(truth_values, krige([&](double d) { return model_eval(model, d); }, data, targets, M));
}

}  // namespace covario
