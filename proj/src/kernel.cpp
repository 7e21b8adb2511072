#include "covario/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "covario/classical.hpp"
#include "covario/diagnostics.hpp"

namespace covario {

SmoothingKernel parse_smoothing_kernel(std::string_view name) {
    if (name == "gaussian") return SmoothingKernel::gaussian;
    if (name == "epanechnikov") return SmoothingKernel::epanechnikov;
    if (name == "triangular") return SmoothingKernel::triangular;
    throw std::invalid_argument("unknown smoothing kernel '" + std::string(name) + "'");
}

double smoothing_kernel_density(SmoothingKernel kernel, double u) {
    switch (kernel) {
        case SmoothingKernel::gaussian:
            return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
        case SmoothingKernel::epanechnikov:
            return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
        case SmoothingKernel::triangular:
            return std::abs(u) < 1.0 ? 1.0 - std::abs(u) : 0.0;
    }
    return 0.0;
}

void KernelRegressionConfig::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw std::invalid_argument("bandwidth must be positive");
}

double default_bandwidth(const SpatialSample& sample) {
    if (sample.size() < 2) throw std::invalid_argument("need at least two points for a default bandwidth");
    return 1.5 * mean_nearest_neighbour_distance(sample);
}

void TruncationConfig::validate() const {
    if (!(t1 > 0.0) || !(t2 > t1)) throw std::invalid_argument("truncation needs 0 < T1 < T2");
}

KernelCovariogram::KernelCovariogram(const SpatialSample& sample, const KernelRegressionConfig& config,
                                     Centering centering)
    : config_(config) {
    config_.validate();
    build(sample, PairIndex(sample), centering);
}

KernelCovariogram::KernelCovariogram(const SpatialSample& sample, const PairIndex& index,
                                     const KernelRegressionConfig& config, Centering centering)
    : config_(config) {
    config_.validate();
    if (index.sample_size() != sample.size()) throw std::invalid_argument("pair index does not match sample");
    build(sample, index, centering);
}

void KernelCovariogram::build(const SpatialSample& sample, const PairIndex& index, Centering centering) {
    const auto x = centered_values(sample.values(), centering);
    double diag = 0.0;
    for (double v : x) diag += v * v;
    distance_.push_back(0.0);
    sum_.push_back(diag);
    count_.push_back(static_cast<double>(x.size()));
    // groups come sorted by distance; merge equal distances
    for (const auto& g : index.groups()) {
        double s = 0.0;
        for (const auto& [a, b] : g.pairs) s += x[a] * x[b];
        if (distance_.size() > 1 && g.distance == distance_.back()) {
            sum_.back() += s;
            count_.back() += static_cast<double>(g.pairs.size());
        } else {
            distance_.push_back(g.distance);
            sum_.push_back(s);
            count_.push_back(static_cast<double>(g.pairs.size()));
        }
    }
}

std::optional<double> KernelCovariogram::operator()(double t) const {
    const double b = config_.bandwidth;
    double num = 0.0;
    double den = 0.0;
    auto add = [&](std::size_t k, double at) {
        const double w = smoothing_kernel_density(config_.kernel, (t - at) / b);
        num += w * sum_[k];
        den += w * count_[k];
    };
    add(0, 0.0);
    for (std::size_t k = 1; k < distance_.size(); ++k) {
        add(k, distance_[k]);
        add(k, -distance_[k]);
    }
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

EmpiricalCovariogram KernelCovariogram::evaluate(std::span<const double> lags) const {
    if (lags.empty() || lags.front() != 0.0) throw std::invalid_argument("evaluation lags must start at 0");
    EmpiricalCovariogram out;
    out.kind = CovariogramKind::covariance;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const double t = lags[k];
        if (!std::isfinite(t)) throw std::invalid_argument("evaluation lag is not finite");
        if (k > 0 && !(t > lags[k - 1])) throw std::invalid_argument("evaluation lags must be increasing");
        const auto v = (*this)(t);
        if (!v) {
            warn("kernel covariogram: zero kernel weight at lag " + std::to_string(t) + ", omitted");
            continue;
        }
        // pairs inside one bandwidth of t, both orientations
        std::size_t within = std::abs(t) <= config_.bandwidth ? static_cast<std::size_t>(count_[0]) : 0;
        for (std::size_t g = 1; g < distance_.size(); ++g) {
            if (std::abs(t - distance_[g]) <= config_.bandwidth) within += 2 * static_cast<std::size_t>(count_[g]);
        }
        out.lags.push_back(t);
        out.values.push_back(*v);
        out.counts.push_back(within);
    }
    if (out.lags.empty() || out.lags.front() != 0.0) throw std::runtime_error("no estimable lags");
    if (lags.size() > 1) out.half_width = (lags[1] - lags[0]) / 2.0;
    return out;
}

EmpiricalCovariogram kernel_covariogram(const SpatialSample& sample, std::span<const double> lags,
                                        const KernelRegressionConfig& config, Centering centering) {
    return KernelCovariogram(sample, config, centering).evaluate(lags);
}

EmpiricalCovariogram positivize_spectrum(const EmpiricalCovariogram& cov) {
    cov.validate();
    arithmetic_step(cov.lags);
    EmpiricalCovariogram out = cov;
    out.kind = CovariogramKind::covariance;
    const std::size_t L = cov.size() - 1;
    if (L == 0) {
        out.values[0] = std::max(0.0, cov.values[0]);
        return out;
    }
    const std::size_t M = 2 * L;
    const auto& c = cov.values;
    // cos(2π jk/M) = cos(π jk/L), reduced index to keep arguments small
    std::vector<double> cosine(M);
    for (std::size_t r = 0; r < M; ++r) cosine[r] = std::cos(std::numbers::pi * static_cast<double>(r) / static_cast<double>(L));
    // eigenvalues λ_j, j = 0..L (λ_{M−j} = λ_j)
    std::vector<double> lambda(L + 1);
    for (std::size_t j = 0; j <= L; ++j) {
        double s = c[0] + c[L] * ((j % 2 == 0) ? 1.0 : -1.0);
        for (std::size_t k = 1; k < L; ++k) s += 2.0 * c[k] * cosine[(j * k) % M];
        lambda[j] = std::max(0.0, s);
    }
    for (std::size_t k = 0; k <= L; ++k) {
        double s = lambda[0] + lambda[L] * ((k % 2 == 0) ? 1.0 : -1.0);
        for (std::size_t j = 1; j < L; ++j) s += 2.0 * lambda[j] * cosine[(j * k) % M];
        out.values[k] = s / static_cast<double>(M);
    }
    return out;
}

HallResult hall_truncated_details(const EmpiricalCovariogram& kernel_estimate, const KernelCovariogram& kernel,
                                  const std::optional<TruncationConfig>& truncation) {
    kernel_estimate.validate();
    const double delta = arithmetic_step(kernel_estimate.lags);
    const std::size_t L = kernel_estimate.size() - 1;
    if (L == 0) throw std::invalid_argument("Hall's estimator needs at least two lags");

    HallResult result;
    result.truncated = kernel_estimate;
    auto& c1 = result.truncated.values;
    if (truncation) {
        truncation->validate();
        if (kernel_estimate.lags.back() < truncation->t2 * (1.0 - 1e-12)) {
            throw std::invalid_argument("evaluation lags must extend to T2");
        }
        const auto at_t1 = kernel(truncation->t1);
        if (!at_t1) throw std::runtime_error("kernel estimate undefined at T1");
        for (std::size_t k = 0; k <= L; ++k) {
            const double t = kernel_estimate.lags[k];
            if (t <= truncation->t1) continue;
            c1[k] = t <= truncation->t2 ? *at_t1 * (truncation->t2 - t) / (truncation->t2 - truncation->t1) : 0.0;
        }
    }

    // step 2: F(θ) = 2 ∫_0^∞ C1(t) cos(θt) dt, trapezoid in t
    const std::size_t J = 4 * L;
    const double dtheta = std::numbers::pi / (4.0 * static_cast<double>(L) * delta);
    std::vector<double> spectrum(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
        const double theta = dtheta * static_cast<double>(j);
        double s = 0.0;
        for (std::size_t k = 0; k <= L; ++k) {
            const double w = (k == 0 || k == L) ? 0.5 : 1.0;
            s += w * c1[k] * std::cos(theta * kernel_estimate.lags[k]);
        }
        spectrum[j] = 2.0 * delta * s;
    }

    // step 3: first strictly negative frequency
    std::size_t cut = J + 1;
    for (std::size_t j = 1; j <= J; ++j) {
        if (spectrum[j] < 0.0) {
            cut = j;
            break;
        }
    }
    if (cut <= 1) throw std::runtime_error("positivization failed near zero");
    result.theta_hat = cut <= J ? dtheta * static_cast<double>(cut) : std::numeric_limits<double>::infinity();
    const std::size_t last = std::min(cut, J);
    if (cut <= J) spectrum[cut] = 0.0;

    // step 4: C̃(t) = π⁻¹ ∫_0^θ̂ F(θ) cos(θt) dθ, trapezoid in θ
    result.estimate = kernel_estimate;
    result.estimate.kind = CovariogramKind::covariance;
    for (std::size_t k = 0; k <= L; ++k) {
        const double t = kernel_estimate.lags[k];
        double s = 0.0;
        for (std::size_t j = 0; j <= last; ++j) {
            const double w = (j == 0 || j == last) ? 0.5 : 1.0;
            s += w * spectrum[j] * std::cos(dtheta * static_cast<double>(j) * t);
        }
        result.estimate.values[k] = s * dtheta / std::numbers::pi;
    }
    return result;
}

EmpiricalCovariogram hall_truncated_estimator(const KernelCovariogram& kernel, std::span<const double> lags,
                                              const std::optional<TruncationConfig>& truncation) {
    if (lags.size() < 2 || lags.front() != 0.0) throw std::invalid_argument("Hall's estimator needs lags 0, δ, 2δ, ...");
    const double delta = arithmetic_step(lags);
    const auto reach = static_cast<std::size_t>(std::floor(kernel.max_distance() / delta + 1e-9));
    std::vector<double> grid(std::max(reach + 1, lags.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = delta * static_cast<double>(k);
    auto full = hall_truncated_details(kernel.evaluate(grid), kernel, truncation).estimate;
    if (full.size() < lags.size()) throw std::runtime_error("kernel estimate undefined on part of the lag grid");
    full.lags.resize(lags.size());
    full.values.resize(lags.size());
    full.counts.resize(lags.size());
    return full;
}

EmpiricalCovariogram hall_truncated_estimator(const SpatialSample& sample, std::span<const double> lags,
                                              const KernelRegressionConfig& config,
                                              const std::optional<TruncationConfig>& truncation,
                                              Centering centering) {
    const KernelCovariogram kernel(sample, config, centering);
    return hall_truncated_estimator(kernel, lags, truncation);
}

}  // namespace covario
