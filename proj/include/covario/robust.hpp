#pragma once

#include <cstddef>
#include <span>

#include "covario/covariogram.hpp"
#include "covario/spatial.hpp"

namespace covario {

struct RobustConfig {
    double qn_constant = 2.2191;
    double pn_constant = 1.048;

    void validate() const;
};

/// k-th smallest (1-based) of |x_i − x_j| over i < j. Exact.
double kth_pairwise_difference(std::span<const double> x, std::size_t k);

/// k-th smallest (1-based) of (x_i + x_j)/2 over i < j. Exact.
double kth_pairwise_mean(std::span<const double> x, std::size_t k);

/// c times the m-th order statistic of the pairwise absolute differences,
/// m = ⌊(C(n,2) + 2)/4⌋ + 1.
double qn_scale(std::span<const double> x, double c = RobustConfig{}.qn_constant);

/// ¼(Q²(X_{1:n−h} + X_{h+1:n}) − Q²(X_{1:n−h} − X_{h+1:n})) for a regularly indexed series.
double qn_covariance(std::span<const double> series, std::size_t lag, const RobustConfig& config = {});

/// (Q₊² − Q₋²)/(Q₊² + Q₋²), always within [−1, 1].
double qn_correlation(std::span<const double> series, std::size_t lag, const RobustConfig& config = {});

/// Genton's variogram: per bin, 2γ̂ = (c·{|V_i − V_j|}_(m_S))² over the increments
/// V = X(t + h) − X(t), m_S = C(⌊|N|/2⌋ + 1, 2). Bins with fewer than two
/// increments are omitted.
EmpiricalCovariogram qn_variogram(const SpatialSample& sample, const LagBinning& bins,
                                  const RobustConfig& config = {});
EmpiricalCovariogram qn_variogram(const SpatialSample& sample, const PairIndex& index, const LagBinning& bins,
                                  const RobustConfig& config = {});

/// Spatial robust covariogram Q²(X) − γ̂_Q(τ).
EmpiricalCovariogram qn_spatial_covariogram(const SpatialSample& sample, const PairIndex& index,
                                            const LagBinning& bins, const RobustConfig& config = {});

/// c·(M⁻¹(0.75) − M⁻¹(0.25)), M the empirical distribution of pairwise means,
/// M⁻¹(p) = inf{t : M(t) ≥ p}.
double pn_scale(std::span<const double> x, double c = RobustConfig{}.pn_constant);

double pn_covariance(std::span<const double> series, std::size_t lag, const RobustConfig& config = {});

}  // namespace covario
