#include "covario/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <Eigen/Eigenvalues>

#include "covario/random.hpp"

namespace covario {

CovariogramLookup::CovariogramLookup(EmpiricalCovariogram est) : est_(std::move(est)) { est_.validate(); }

double CovariogramLookup::operator()(double distance) const {
    const auto& lags = est_.lags;
    const double h = est_.half_width;
    if (h > 0.0) {
        // lags within the half-width sit next to the insertion point
        const auto it = std::lower_bound(lags.begin(), lags.end(), distance - h * (1.0 + 1e-12));
        double sum = 0.0;
        std::size_t count = 0;
        for (auto j = it; j != lags.end() && *j <= distance + h * (1.0 + 1e-12); ++j) {
            sum += est_.values[static_cast<std::size_t>(j - lags.begin())];
            ++count;
        }
        if (count > 0) return sum / static_cast<double>(count);
    }
    return interpolate(est_, distance);
}

double interpolate(const EmpiricalCovariogram& est, double tau) {
    const auto& lags = est.lags;
    if (tau <= lags.front()) return est.values.front();
    if (tau >= lags.back()) return est.values.back();
    const auto it = std::upper_bound(lags.begin(), lags.end(), tau);
    const auto k = static_cast<std::size_t>(it - lags.begin());
    const double a = lags[k - 1];
    const double b = lags[k];
    const double w = (tau - a) / (b - a);
    return (1.0 - w) * est.values[k - 1] + w * est.values[k];
}

std::vector<double> evaluation_grid(const EmpiricalCovariogram& est, double tau0) {
    est.validate();
    if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
    if (est.lags.back() < tau0 * (1.0 - 1e-9)) throw std::invalid_argument("estimate does not reach tau0");
    std::vector<double> knots;
    for (double t : est.lags) {
        if (t < tau0) knots.push_back(t);
    }
    knots.push_back(tau0);
    std::vector<double> grid;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        for (int r = 0; r < 10; ++r) grid.push_back(knots[k] + (knots[k + 1] - knots[k]) * r / 10.0);
    }
    grid.push_back(tau0);
    return grid;
}

double area_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est, double tau0) {
    const auto grid = evaluation_grid(est, tau0);
    double area = 0.0;
    double prev = std::abs(truth(grid[0]) - interpolate(est, grid[0]));
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double cur = std::abs(truth(grid[k]) - interpolate(est, grid[k]));
        area += 0.5 * (prev + cur) * (grid[k] - grid[k - 1]);
        prev = cur;
    }
    return area;
}

double distance_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est, double tau0) {
    double best = 0.0;
    for (double t : evaluation_grid(est, tau0)) best = std::max(best, std::abs(truth(t) - interpolate(est, t)));
    return best;
}

double spectral_norm_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est, double tau0) {
    est.validate();
    std::vector<double> lags;
    std::vector<double> diff;
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (est.lags[k] > tau0 * (1.0 + 1e-12)) break;
        lags.push_back(est.lags[k]);
        diff.push_back(truth(est.lags[k]) - est.values[k]);
    }
    arithmetic_step(lags);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(toeplitz(diff), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double fit_model_nls(const EmpiricalCovariogram& est, ModelFamily family, int dim) {
    est.validate();
    bool nonzero = false;
    double max_lag = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        nonzero = nonzero || est.values[k] != 0.0;
        max_lag = std::max(max_lag, est.lags[k]);
    }
    if (!nonzero) throw std::invalid_argument("cannot fit a model to an all-zero estimate");
    if (!(max_lag > 0.0)) throw std::invalid_argument("fit needs a positive lag");

    const double nu_min = std::max(0.0, (static_cast<double>(dim) - 2.0) / 2.0);
    // map a free coordinate u to the parameter
    auto param = [&](double u) {
        switch (family) {
            case ModelFamily::gaussian: return max_lag * std::pow(10.0, u);
            case ModelFamily::cauchy: return std::pow(10.0, u);
            case ModelFamily::bessel: return nu_min + std::pow(10.0, u) - 1e-3;
        }
        return u;
    };
    auto loss = [&](double u) {
        const CovarianceModel model{family, param(u), dim};
        double s = 0.0;
        for (std::size_t k = 0; k < est.size(); ++k) {
            const double r = model_eval(model, est.lags[k]) - est.values[k];
            s += r * r;
        }
        return s;
    };
    // 16 starts; gaussian spans σ ∈ [1e-3, 10]·max lag, cauchy γ ∈ [1e-3, 1e2], bessel ν − ν_min ∈ [0, 1e2]
    double lo_u = -3.0;
    double hi_u = family == ModelFamily::gaussian ? 1.0 : 2.0;
    std::vector<double> starts(16);
    for (int i = 0; i < 16; ++i) starts[static_cast<std::size_t>(i)] = lo_u + (hi_u - lo_u) * i / 15.0;
    std::size_t best = 0;
    double best_loss = loss(starts[0]);
    for (std::size_t i = 1; i < starts.size(); ++i) {
        const double l = loss(starts[i]);
        if (l < best_loss) {
            best_loss = l;
            best = i;
        }
    }
    const double a = starts[best == 0 ? 0 : best - 1];
    const double b = starts[std::min(best + 1, starts.size() - 1)];
    const auto r = boost::math::tools::brent_find_minima(loss, a, b, 52);
    return param(r.second <= best_loss ? r.first : starts[best]);
}

std::vector<std::size_t> sample_target_nodes(const LatticeSample& frame, const Coord& inner_lo, const Coord& inner_hi,
                                             std::size_t count, std::uint64_t seed) {
    frame.validate();
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const auto c = frame.location(i);
        bool inside = true;
        for (int k = 0; k < frame.dim(); ++k) {
            const double tol = 1e-9 * std::max(1.0, std::abs(frame.step[k]));
            inside = inside && c[k] >= inner_lo[k] - tol && c[k] <= inner_hi[k] + tol;
        }
        if (!inside) outside.push_back(i);
    }
    if (outside.size() < count) throw std::invalid_argument("not enough lattice nodes outside the subregion");
    // partial Fisher–Yates
    CounterRng rng(seed, 0x7461726765747300ull);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(outside.size() - k));
        std::swap(outside[k], outside[j]);
    }
    outside.resize(count);
    return outside;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto key = [&](std::size_t i) { return std::isnan(values[i]) ? std::numeric_limits<double>::infinity() : values[i]; };
    auto failed = [&](std::size_t i) { return std::isnan(values[i]); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (failed(a) != failed(b)) return failed(b);
        return key(a) < key(b);
    });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && failed(order[j + 1]) == failed(order[i]) &&
               (failed(order[i]) || key(order[j + 1]) == key(order[i]))) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace {

std::vector<std::string> estimator_order(std::span<const MetricReport> reports) {
    std::vector<std::string> names;
    for (const auto& r : reports) {
        if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
    }
    return names;
}

}  // namespace

MetricTable rank_table(std::span<const MetricReport> reports) {
    MetricTable table;
    table.estimators = estimator_order(reports);
    const std::size_t e = table.estimators.size();
    table.values.assign(e, {0, 0, 0, 0, 0});
    std::map<std::size_t, std::vector<const MetricReport*>> by_realisation;
    for (const auto& r : reports) by_realisation[r.realisation].push_back(&r);
    if (by_realisation.empty()) throw std::invalid_argument("no reports to rank");
    std::vector<std::size_t> seen(e, 0);
    for (const auto& [id, group] : by_realisation) {
        for (std::size_t m = 0; m < 5; ++m) {
            std::vector<double> vals;
            for (const auto* r : group) vals.push_back(r->metrics[m]);
            const auto ranks = average_ranks(vals);
            for (std::size_t g = 0; g < group.size(); ++g) {
                const auto idx = static_cast<std::size_t>(
                    std::find(table.estimators.begin(), table.estimators.end(), group[g]->estimator) - table.estimators.begin());
                table.values[idx][m] += ranks[g];
                if (m == 0) ++seen[idx];
            }
        }
    }
    for (std::size_t i = 0; i < e; ++i) {
        for (auto& v : table.values[i]) v /= static_cast<double>(seen[i]);
    }
    return table;
}

MetricTable average_table(std::span<const MetricReport> reports) {
    MetricTable table;
    table.estimators = estimator_order(reports);
    const std::size_t e = table.estimators.size();
    table.values.assign(e, {0, 0, 0, 0, 0});
    std::vector<std::array<std::size_t, 5>> counts(e, {0, 0, 0, 0, 0});
    for (const auto& r : reports) {
        const auto idx = static_cast<std::size_t>(
            std::find(table.estimators.begin(), table.estimators.end(), r.estimator) - table.estimators.begin());
        for (std::size_t m = 0; m < 5; ++m) {
            if (std::isfinite(r.metrics[m])) {
                table.values[idx][m] += r.metrics[m];
                ++counts[idx][m];
            }
        }
    }
    for (std::size_t i = 0; i < e; ++i) {
        for (std::size_t m = 0; m < 5; ++m) {
            table.values[i][m] = counts[i][m] ? table.values[i][m] / static_cast<double>(counts[i][m])
                                              : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return table;
}

}  // namespace covario
