#include "covario/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace covario {

namespace {

struct SubSolve {
    Eigen::VectorXd z;
    bool deficient = false;
};

SubSolve solve_passive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const std::vector<bool>& passive) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(cols[c]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    const Eigen::VectorXd zs = cod.solve(b);
    SubSolve out;
    out.z = Eigen::VectorXd::Zero(a.cols());
    for (std::size_t c = 0; c < cols.size(); ++c) out.z[cols[c]] = zs[static_cast<Eigen::Index>(c)];
    out.deficient = cod.rank() < static_cast<Eigen::Index>(cols.size());
    return out;
}

}  // namespace

NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, const Eigen::VectorXd& weights) {
    if (design.rows() != target.size() || weights.size() != target.size()) {
        throw std::invalid_argument("nnls: inconsistent dimensions");
    }
    if (design.cols() == 0) throw std::invalid_argument("nnls: design has no columns");
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw std::invalid_argument("nnls: weights must be nonnegative");
    }
    if (!design.allFinite() || !target.allFinite()) throw std::invalid_argument("nnls: non-finite input");

    const Eigen::VectorXd root = weights.cwiseSqrt();
    const Eigen::MatrixXd a = root.asDiagonal() * design;
    const Eigen::VectorXd b = root.cwiseProduct(target);
    const Eigen::Index n = a.cols();

    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().colwise().sum().maxCoeff() *
                       static_cast<double>(std::max(a.rows(), n));
    NnlsResult result;
    result.x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const std::size_t max_iter = 30 * static_cast<std::size_t>(n) + 100;

    // indices whose entry left x unchanged; skipped until x moves again
    std::vector<bool> blocked(static_cast<std::size_t>(n), false);
    for (;;) {
        const Eigen::VectorXd grad = a.transpose() * (b - a * result.x);
        Eigen::Index enter = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto u = static_cast<std::size_t>(j);
            if (!passive[u] && !blocked[u] && grad[j] > best) {
                best = grad[j];
                enter = j;
            }
        }
        if (enter < 0) break;
        if (++result.iterations > max_iter) throw std::runtime_error("nnls: iteration limit reached");
        passive[static_cast<std::size_t>(enter)] = true;
        const Eigen::VectorXd before = result.x;

        for (;;) {
            auto sub = solve_passive(a, b, passive);
            result.rank_deficient = sub.deficient;
            bool feasible = true;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!passive[static_cast<std::size_t>(j)] || sub.z[j] > tol) continue;
                feasible = false;
                const double denom = result.x[j] - sub.z[j];
                if (denom > 0.0) alpha = std::min(alpha, result.x[j] / denom);
            }
            if (feasible) {
                result.x = sub.z;
                break;
            }
            result.x += alpha * (sub.z - result.x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && result.x[j] <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    result.x[j] = 0.0;
                }
            }
            if (++result.iterations > max_iter) throw std::runtime_error("nnls: iteration limit reached");
        }
        if (result.x == before) {
            blocked[static_cast<std::size_t>(enter)] = true;
        } else {
            std::fill(blocked.begin(), blocked.end(), false);
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) result.x[j] = std::max(0.0, result.x[j]);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> full(a);
    if (full.rank() < n) {
        result.rank_deficient = true;
        // prefer the unconstrained minimum-norm solution when it is feasible and optimal
        const Eigen::VectorXd mn = full.solve(b);
        const double r_mn = (b - a * mn).squaredNorm();
        const double r_x = (b - a * result.x).squaredNorm();
        if ((mn.array() >= 0.0).all() && r_mn <= r_x * (1.0 + 1e-12) + tol) result.x = mn;
    }
    return result;
}

NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
    return nnls_solve(design, target, Eigen::VectorXd::Ones(target.size()));
}

}  // namespace covario
