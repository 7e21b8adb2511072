#include "covario/robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "covario/classical.hpp"

namespace covario {

namespace {

std::size_t choose2(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Selection of the k-th smallest pair statistic over sorted data. `Stat`
// provides count_le(t), the number of pairs with statistic ≤ t, and
// collect(lo, hi, out), the statistics lying in (lo, hi].
template <typename Stat>
double select_kth(const Stat& stat, std::size_t k, double lo, double hi) {
    // invariant: count_le(lo) < k ≤ count_le(hi)
    const std::size_t budget = 4 * stat.size() + 64;
    for (;;) {
        const std::size_t below = stat.count_le(lo);
        const std::size_t upto = stat.count_le(hi);
        if (upto - below <= budget) {
            std::vector<double> cand;
            cand.reserve(upto - below);
            stat.collect(lo, hi, cand);
            const std::size_t r = k - below - 1;
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(r), cand.end());
            return cand[r];
        }
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) return hi;
        if (stat.count_le(mid) >= k) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

struct Differences {
    const std::vector<double>& x;  // sorted

    std::size_t size() const { return x.size(); }

    std::size_t count_le(double t) const {
        std::size_t count = 0;
        std::size_t i = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            while (x[j] - x[i] > t) ++i;
            count += j - i;
        }
        return count;
    }

    void collect(double lo, double hi, std::vector<double>& out) const {
        // admissible i for fixed j form [first_le_hi, first_le_lo); both bounds grow with j
        std::size_t first_le_hi = 0;
        std::size_t first_le_lo = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            while (x[j] - x[first_le_hi] > hi) ++first_le_hi;
            while (first_le_lo < j && x[j] - x[first_le_lo] > lo) ++first_le_lo;
            for (std::size_t i = first_le_hi; i < first_le_lo; ++i) out.push_back(x[j] - x[i]);
        }
    }
};

struct Sums {
    const std::vector<double>& x;  // sorted

    std::size_t size() const { return x.size(); }

    std::size_t count_le(double t) const {
        std::size_t count = 0;
        std::size_t j = x.size();
        for (std::size_t i = 0; i < x.size(); ++i) {
            while (j > i + 1 && x[i] + x[j - 1] > t) --j;
            if (j <= i + 1) break;
            count += j - i - 1;
        }
        return count;
    }

    void collect(double lo, double hi, std::vector<double>& out) const {
        // admissible j > i form [above_lo, above_hi); both bounds shrink as i grows
        std::size_t above_lo = x.size();
        std::size_t above_hi = x.size();
        for (std::size_t i = 0; i < x.size(); ++i) {
            while (above_hi > 0 && x[i] + x[above_hi - 1] > hi) --above_hi;
            while (above_lo > 0 && x[i] + x[above_lo - 1] > lo) --above_lo;
            for (std::size_t j = std::max(above_lo, i + 1); j < above_hi; ++j) out.push_back(x[i] + x[j]);
        }
    }
};

double qn_order_statistic(std::span<const double> x, std::size_t m, double c) {
    return c * kth_pairwise_difference(x, m);
}

std::vector<double> shifted_combination(std::span<const double> s, std::size_t lag, double sign) {
    std::vector<double> out(s.size() - lag);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = s[t] + sign * s[t + lag];
    return out;
}

void check_lag(std::span<const double> series, std::size_t lag) {
    if (lag + 2 > series.size()) throw std::invalid_argument("lag too large: need n − h ≥ 2");
}

}  // namespace

void RobustConfig::validate() const {
    if (!(qn_constant > 0.0) || !(pn_constant > 0.0)) throw std::invalid_argument("robust constants must be positive");
}

double kth_pairwise_difference(std::span<const double> x, std::size_t k) {
    const std::size_t total = choose2(x.size());
    if (total == 0) throw std::invalid_argument("need at least two observations");
    if (k < 1 || k > total) throw std::invalid_argument("order statistic index out of range");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const Differences stat{sorted};
    if (stat.count_le(0.0) >= k) return 0.0;
    return select_kth(stat, k, 0.0, sorted.back() - sorted.front());
}

double kth_pairwise_mean(std::span<const double> x, std::size_t k) {
    const std::size_t total = choose2(x.size());
    if (total == 0) throw std::invalid_argument("need at least two observations");
    if (k < 1 || k > total) throw std::invalid_argument("order statistic index out of range");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const Sums stat{sorted};
    const double lowest = sorted[0] + sorted[1];
    if (stat.count_le(lowest) >= k) return lowest / 2.0;
    return select_kth(stat, k, lowest, sorted[sorted.size() - 2] + sorted.back()) / 2.0;
}

double qn_scale(std::span<const double> x, double c) {
    if (x.size() < 2) throw std::invalid_argument("Qn needs at least two observations");
    const std::size_t m = (choose2(x.size()) + 2) / 4 + 1;
    return qn_order_statistic(x, m, c);
}

double qn_covariance(std::span<const double> series, std::size_t lag, const RobustConfig& config) {
    config.validate();
    check_lag(series, lag);
    const double qp = qn_scale(shifted_combination(series, lag, +1.0), config.qn_constant);
    const double qm = qn_scale(shifted_combination(series, lag, -1.0), config.qn_constant);
    return 0.25 * (qp * qp - qm * qm);
}

double qn_correlation(std::span<const double> series, std::size_t lag, const RobustConfig& config) {
    config.validate();
    check_lag(series, lag);
    const double qp = qn_scale(shifted_combination(series, lag, +1.0), config.qn_constant);
    const double qm = qn_scale(shifted_combination(series, lag, -1.0), config.qn_constant);
    const double denom = qp * qp + qm * qm;
    if (!(denom > 0.0)) throw std::runtime_error("degenerate: both Qn terms are zero");
    return (qp * qp - qm * qm) / denom;
}

EmpiricalCovariogram qn_variogram(const SpatialSample& sample, const PairIndex& index, const LagBinning& bins,
                                  const RobustConfig& config) {
    config.validate();
    bins.validate();
    std::vector<std::vector<double>> increments(bins.size());
    const auto x = sample.values();
    for (const auto& g : index.groups()) {
        const auto k = bins.bin_of(g.distance);
        if (!k) continue;
        auto& v = increments[*k];
        for (const auto& [a, b] : g.pairs) v.push_back(x[a] - x[b]);
    }
    EmpiricalCovariogram out;
    out.kind = CovariogramKind::semivariogram;
    out.half_width = bins.half_width;
    out.lags.push_back(0.0);
    out.values.push_back(0.0);
    out.counts.push_back(sample.size());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const auto& v = increments[k];
        if (v.size() < 2) continue;
        const std::size_t half = v.size() / 2 + 1;
        const std::size_t m = choose2(half);
        const double q = qn_order_statistic(v, m, config.qn_constant);
        out.lags.push_back(bins.centers[k]);
        out.values.push_back(q * q / 2.0);
        out.counts.push_back(2 * v.size());
    }
    if (out.size() < 2) throw std::runtime_error("no estimable lags");
    return out;
}

EmpiricalCovariogram qn_variogram(const SpatialSample& sample, const LagBinning& bins, const RobustConfig& config) {
    bins.validate();
    return qn_variogram(sample, PairIndex(sample, bins.centers.back() + bins.half_width), bins, config);
}

EmpiricalCovariogram qn_spatial_covariogram(const SpatialSample& sample, const PairIndex& index,
                                            const LagBinning& bins, const RobustConfig& config) {
    const double q = qn_scale(sample.values(), config.qn_constant);
    return variogram_to_covariance(qn_variogram(sample, index, bins, config), q * q);
}

double pn_scale(std::span<const double> x, double c) {
    const std::size_t total = choose2(x.size());
    if (total == 0) throw std::invalid_argument("Pn needs at least two observations");
    auto quantile = [&](double p) {
        auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(total)));
        k = std::clamp<std::size_t>(k, 1, total);
        return kth_pairwise_mean(x, k);
    };
    return c * (quantile(0.75) - quantile(0.25));
}

double pn_covariance(std::span<const double> series, std::size_t lag, const RobustConfig& config) {
    config.validate();
    check_lag(series, lag);
    const double pp = pn_scale(shifted_combination(series, lag, +1.0), config.pn_constant);
    const double pm = pn_scale(shifted_combination(series, lag, -1.0), config.pn_constant);
    return 0.25 * (pp * pp - pm * pm);
}

}  // namespace covario
