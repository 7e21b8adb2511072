#include "covario/classical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace covario {

namespace {

struct BinTotals {
    std::size_t ordered_pairs = 0;
    std::size_t vectors = 0;  // distinct separation vectors, both orientations
    double sum_products = 0.0;      // over ordered pairs
    double sum_sq_diff = 0.0;       // over ordered pairs
    double sum_root_abs_diff = 0.0; // over unordered pairs
    double sum_first_sq = 0.0;      // Σ_{(i,j)} X_i² over ordered pairs
};

std::vector<BinTotals> accumulate(const PairIndex& index, std::span<const double> x, const LagBinning& bins,
                                  const DirectionSpec* direction) {
    std::vector<BinTotals> totals(bins.size());
    for (const auto& g : index.groups()) {
        const auto k = bins.bin_of(g.distance);
        if (!k) continue;
        if (direction && !direction->contains(g.offset[0], g.offset[1])) continue;
        BinTotals& t = totals[*k];
        t.ordered_pairs += 2 * g.pairs.size();
        t.vectors += 2;
        for (const auto& [a, b] : g.pairs) {
            const double xa = x[a];
            const double xb = x[b];
            const double diff = xa - xb;
            t.sum_products += 2.0 * xa * xb;
            t.sum_sq_diff += 2.0 * diff * diff;
            t.sum_root_abs_diff += std::sqrt(std::abs(diff));
            t.sum_first_sq += xa * xa + xb * xb;
        }
    }
    return totals;
}

double max_reach(const LagBinning& bins) { return bins.centers.back() + bins.half_width; }

void require_estimable(const EmpiricalCovariogram& cov) {
    if (cov.size() < 2) throw std::runtime_error("no estimable lags");
}

double sum_squares(std::span<const double> x) {
    return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

template <typename ValueFn>
EmpiricalCovariogram assemble(const std::vector<BinTotals>& totals, const LagBinning& bins, double lag0_value,
                              std::size_t n, CovariogramKind kind, ValueFn value_of) {
    EmpiricalCovariogram out;
    out.kind = kind;
    out.half_width = bins.half_width;
    out.lags.push_back(0.0);
    out.values.push_back(lag0_value);
    out.counts.push_back(n);
    for (std::size_t k = 0; k < totals.size(); ++k) {
        if (totals[k].ordered_pairs == 0) continue;
        out.lags.push_back(bins.centers[k]);
        out.values.push_back(value_of(totals[k]));
        out.counts.push_back(totals[k].ordered_pairs);
    }
    require_estimable(out);
    return out;
}

}  // namespace

std::vector<double> centered_values(std::span<const double> values, Centering centering) {
    std::vector<double> x(values.begin(), values.end());
    if (centering == Centering::sample_mean) {
        const double m = sample_mean(values);
        for (double& v : x) v -= m;
    }
    return x;
}

// ---------------------------------------------------------------------------

EmpiricalCovariogram classical_covariogram(const SpatialSample& sample, const PairIndex& index,
                                           const LagBinning& bins, Centering centering) {
    bins.validate();
    const auto x = centered_values(sample.values(), centering);
    const auto totals = accumulate(index, x, bins, nullptr);
    const double n = static_cast<double>(sample.size());
    return assemble(totals, bins, sum_squares(x) / n, sample.size(), CovariogramKind::covariance,
                    [](const BinTotals& t) { return t.sum_products / static_cast<double>(t.ordered_pairs); });
}

EmpiricalCovariogram classical_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                           Centering centering) {
    bins.validate();
    return classical_covariogram(sample, PairIndex(sample, max_reach(bins)), bins, centering);
}

EmpiricalCovariogram constant_denominator_covariogram(const SpatialSample& sample, const PairIndex& index,
                                                      const LagBinning& bins, Centering centering) {
    bins.validate();
    const auto x = centered_values(sample.values(), centering);
    const auto totals = accumulate(index, x, bins, nullptr);
    const double n = static_cast<double>(sample.size());
    return assemble(totals, bins, sum_squares(x) / n, sample.size(), CovariogramKind::covariance,
                    [n](const BinTotals& t) { return t.sum_products / (n * static_cast<double>(t.vectors)); });
}

EmpiricalCovariogram constant_denominator_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                                      Centering centering) {
    bins.validate();
    return constant_denominator_covariogram(sample, PairIndex(sample, max_reach(bins)), bins, centering);
}

EmpiricalCovariogram constant_denominator_series(std::span<const double> series, std::size_t max_lag,
                                                 Centering centering) {
    const std::size_t n = series.size();
    if (n == 0) throw std::invalid_argument("empty sample");
    if (max_lag >= n) throw std::invalid_argument("max_lag must be smaller than the series length");
    const auto x = centered_values(series, centering);
    EmpiricalCovariogram out;
    out.half_width = 0.5;
    for (std::size_t h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (std::size_t t = 0; t + h < n; ++t) s += x[t] * x[t + h];
        out.lags.push_back(static_cast<double>(h));
        out.values.push_back(s / static_cast<double>(n));
        out.counts.push_back(n - h);
    }
    return out;
}

EmpiricalCovariogram autocorrelation_1d(std::span<const double> series, std::size_t max_lag) {
    auto cov = constant_denominator_series(series, max_lag, Centering::sample_mean);
    const double c0 = cov.values.front();
    if (!(c0 > 0.0)) throw std::runtime_error("degenerate variance");
    for (double& v : cov.values) v /= c0;
    cov.values.front() = 1.0;
    cov.kind = CovariogramKind::correlation;
    return cov;
}

EmpiricalCovariogram matheron_semivariogram(const SpatialSample& sample, const PairIndex& index,
                                            const LagBinning& bins) {
    bins.validate();
    const auto x = centered_values(sample.values(), Centering::none);
    const auto totals = accumulate(index, x, bins, nullptr);
    return assemble(totals, bins, 0.0, sample.size(), CovariogramKind::semivariogram, [](const BinTotals& t) {
        return t.sum_sq_diff / (2.0 * static_cast<double>(t.ordered_pairs));
    });
}

EmpiricalCovariogram matheron_semivariogram(const SpatialSample& sample, const LagBinning& bins) {
    bins.validate();
    return matheron_semivariogram(sample, PairIndex(sample, max_reach(bins)), bins);
}

EmpiricalCovariogram cressie_hawkins_semivariogram(const SpatialSample& sample, const PairIndex& index,
                                                   const LagBinning& bins) {
    bins.validate();
    const auto x = centered_values(sample.values(), Centering::none);
    const auto totals = accumulate(index, x, bins, nullptr);
    return assemble(totals, bins, 0.0, sample.size(), CovariogramKind::semivariogram, [](const BinTotals& t) {
        const double pairs = static_cast<double>(t.ordered_pairs / 2);
        const double mean_root = t.sum_root_abs_diff / pairs;
        const double two_gamma = std::pow(mean_root, 4) / (0.457 + 0.494 / pairs);
        return two_gamma / 2.0;
    });
}

EmpiricalCovariogram cressie_hawkins_semivariogram(const SpatialSample& sample, const LagBinning& bins) {
    bins.validate();
    return cressie_hawkins_semivariogram(sample, PairIndex(sample, max_reach(bins)), bins);
}

EmpiricalCovariogram variogram_to_covariance(const EmpiricalCovariogram& vario, double variance) {
    if (vario.kind != CovariogramKind::semivariogram) {
        throw std::invalid_argument("variogram_to_covariance expects a semivariogram");
    }
    if (!(variance >= 0.0)) throw std::invalid_argument("variance must be nonnegative");
    EmpiricalCovariogram out = vario;
    out.kind = CovariogramKind::covariance;
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] = variance - vario.values[k];
    out.values.front() = variance;
    return out;
}

EmpiricalCovariogram directional_covariogram(const SpatialSample& sample, const PairIndex& index,
                                             const LagBinning& bins, const DirectionSpec& direction,
                                             Centering centering) {
    if (sample.dim() != 2) throw std::invalid_argument("unsupported dimension: directional estimator needs 2-D data");
    direction.validate();
    bins.validate();
    const auto x = centered_values(sample.values(), centering);
    const auto totals = accumulate(index, x, bins, &direction);
    const double n = static_cast<double>(sample.size());
    auto out = assemble(totals, bins, sum_squares(x) / n, sample.size(), CovariogramKind::covariance,
                        [](const BinTotals& t) { return t.sum_products / static_cast<double>(t.ordered_pairs); });
    return out;
}

EmpiricalCovariogram directional_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                             const DirectionSpec& direction, Centering centering) {
    if (sample.dim() != 2) throw std::invalid_argument("unsupported dimension: directional estimator needs 2-D data");
    bins.validate();
    return directional_covariogram(sample, PairIndex(sample, max_reach(bins)), bins, direction, centering);
}

PdCheck check_positive_definite(const EmpiricalCovariogram& cov) {
    arithmetic_step(cov.lags);
    PdCheck out;
    out.min_eigenvalue = min_toeplitz_eigenvalue(cov.values);
    const double scale = cov.values.front() > 0.0 ? cov.values.front() : 0.0;
    out.is_pd = out.min_eigenvalue >= -1e-10 * scale;
    return out;
}

SummabilitySums summability_check(const SpatialSample& sample) {
    if (sample.size() < 2) throw std::invalid_argument("summability needs at least two locations");
    const auto x = centered_values(sample.values(), Centering::sample_mean);
    const double ss = sum_squares(x);
    const double n = static_cast<double>(sample.size());
    if (!(ss > 0.0)) throw std::runtime_error("degenerate variance: constant field");
    const PairIndex index(sample);
    const double c0 = ss / n;
    SummabilitySums out;
    for (const auto& g : index.groups()) {
        double s = 0.0;
        for (const auto& [a, b] : g.pairs) s += x[a] * x[b];
        const double count = static_cast<double>(g.pairs.size());
        // h and −h are both members of H with identical sums and counts
        const double rho_constant = s / ss;
        const double c_hat = s / count;
        const double rho_tilde = c_hat / c0;
        out.plain_sum += 2.0 * rho_constant;
        out.weighted_sum += 2.0 * (count / n) * rho_tilde;
    }
    return out;
}

std::vector<double> restricted_second_moment(const SpatialSample& sample, const LagBinning& bins,
                                             Centering centering) {
    bins.validate();
    const auto x = centered_values(sample.values(), centering);
    const PairIndex index(sample, max_reach(bins));
    const auto totals = accumulate(index, x, bins, nullptr);
    std::vector<double> out{sum_squares(x) / static_cast<double>(sample.size())};
    for (const auto& t : totals) {
        if (t.ordered_pairs == 0) continue;
        out.push_back(t.sum_first_sq / static_cast<double>(t.ordered_pairs));
    }
    return out;
}

double pairwise_quadratic_form(const SpatialSample& sample, std::span<const std::complex<double>> coefficients,
                               Centering centering) {
    const std::size_t n = sample.size();
    if (coefficients.size() != n) throw std::invalid_argument("one coefficient per location required");
    const auto x = centered_values(sample.values(), centering);
    double extent = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            extent = std::max(extent, euclidean_distance(sample.location(i), sample.location(j), sample.dim()));
        }
    }
    const double quantum = 1e-9 * std::max(extent, 1e-300);
    auto key_of = [&](std::size_t i, std::size_t j) {
        return std::llround(euclidean_distance(sample.location(i), sample.location(j), sample.dim()) / quantum);
    };
    std::map<long long, std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) ++counts[key_of(i, j)];
    }
    std::complex<double> total{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double w = 1.0 / static_cast<double>(counts[key_of(i, j)]);
            total += coefficients[i] * std::conj(coefficients[j]) * (x[i] * x[j] * w);
        }
    }
    return total.real();
}

}  // namespace covario
