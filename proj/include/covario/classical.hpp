#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "covario/covariogram.hpp"
#include "covario/spatial.hpp"

namespace covario {

/// C*: pair average of centered products in each distance bin, with
/// lag 0 = N⁻¹ Σ (X − X̄)². Empty bins are dropped.
EmpiricalCovariogram classical_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                           Centering centering = Centering::sample_mean);
EmpiricalCovariogram classical_covariogram(const SpatialSample& sample, const PairIndex& index,
                                           const LagBinning& bins,
                                           Centering centering = Centering::sample_mean);

/// C**: pair sums divided by the sample size instead of the pair count.
/// Within an isotropic bin the pair sum is averaged over the distinct
/// separation vectors it contains, so each vector lag h contributes
/// N⁻¹ Σ_{N(h)} and a 1-D series reproduces N⁻¹ Σ_{t≤N−h} exactly.
EmpiricalCovariogram constant_denominator_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                                      Centering centering = Centering::sample_mean);
EmpiricalCovariogram constant_denominator_covariogram(const SpatialSample& sample, const PairIndex& index,
                                                      const LagBinning& bins,
                                                      Centering centering = Centering::sample_mean);

/// 1-D C**(h) = N⁻¹ Σ_{t=1}^{N−h} (X_t − X̄)(X_{t+h} − X̄), h = 0..max_lag.
EmpiricalCovariogram constant_denominator_series(std::span<const double> series, std::size_t max_lag,
                                                 Centering centering = Centering::sample_mean);

/// ρ̂(h) = Σ_{t≤N−h} (X_t − X̄)(X_{t+h} − X̄) / Σ (X_t − X̄)².
EmpiricalCovariogram autocorrelation_1d(std::span<const double> series, std::size_t max_lag);

/// Matheron: γ̂(τ) = (2|N(τ)|)⁻¹ Σ (X_i − X_j)², γ̂(0) = 0.
EmpiricalCovariogram matheron_semivariogram(const SpatialSample& sample, const LagBinning& bins);
EmpiricalCovariogram matheron_semivariogram(const SpatialSample& sample, const PairIndex& index,
                                            const LagBinning& bins);

/// Cressie–Hawkins robust semivariogram. The formula uses the unordered pair
/// count (half of the ordered count stored in `counts`).
EmpiricalCovariogram cressie_hawkins_semivariogram(const SpatialSample& sample, const LagBinning& bins);
EmpiricalCovariogram cressie_hawkins_semivariogram(const SpatialSample& sample, const PairIndex& index,
                                                   const LagBinning& bins);

/// Ĉ(h) = variance − γ̂(h).
EmpiricalCovariogram variogram_to_covariance(const EmpiricalCovariogram& vario, double variance);

/// Classical estimator restricted to pairs inside a search cone (2-D).
EmpiricalCovariogram directional_covariogram(const SpatialSample& sample, const LagBinning& bins,
                                             const DirectionSpec& direction,
                                             Centering centering = Centering::sample_mean);
EmpiricalCovariogram directional_covariogram(const SpatialSample& sample, const PairIndex& index,
                                             const LagBinning& bins, const DirectionSpec& direction,
                                             Centering centering = Centering::sample_mean);

struct PdCheck {
    double min_eigenvalue = 0.0;
    bool is_pd = false;
};

/// Minimum eigenvalue of the Toeplitz matrix of an arithmetic-lag covariogram;
/// PD when it is ≥ −1e-10·value(0).
PdCheck check_positive_definite(const EmpiricalCovariogram& cov);

struct SummabilitySums {
    double plain_sum = 0.0;     // Σ_{h∈H} ρ̂(h), constant-N convention
    double weighted_sum = 0.0;  // Σ_{h∈H} (|N(h)|/N) ρ̃(h)
};

/// Sums of empirical correlations over every distinct separation vector.
/// Both equal −1 for any non-constant sample.
SummabilitySums summability_check(const SpatialSample& sample);

/// |N(τ)|⁻¹ Σ_{(i,j)∈N(τ)} (X_i − X̄)² on the lags of classical_covariogram;
/// γ̂(τ) + Ĉ(τ) equals this at every nonzero lag.
std::vector<double> restricted_second_moment(const SpatialSample& sample, const LagBinning& bins,
                                             Centering centering = Centering::sample_mean);

/// Σ_{i,j} a_i ā_j X_i X_j / |N(‖t_i − t_j‖)| with exact-distance pair counts
/// (|N(0)| = n). This is the classical estimator's quadratic form expanded
/// pair by pair.
double pairwise_quadratic_form(const SpatialSample& sample, std::span<const std::complex<double>> coefficients,
                               Centering centering = Centering::none);

/// Values after centering according to `centering`.
std::vector<double> centered_values(std::span<const double> values, Centering centering);

}  // namespace covario
