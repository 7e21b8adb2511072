#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "covario/covariogram.hpp"
#include "covario/spatial.hpp"

namespace covario {

enum class SmoothingKernel { gaussian, epanechnikov, triangular };

SmoothingKernel parse_smoothing_kernel(std::string_view name);
/// Symmetric probability density K(u).
double smoothing_kernel_density(SmoothingKernel kernel, double u);

struct KernelRegressionConfig {
    SmoothingKernel kernel = SmoothingKernel::gaussian;
    double bandwidth = 1.0;

    void validate() const;
};

/// 1.5 × mean nearest-neighbour distance.
double default_bandwidth(const SpatialSample& sample);

struct TruncationConfig {
    double t1 = 1.5;
    double t2 = 2.0;

    void validate() const;
};

/// Nadaraya–Watson covariogram over all ordered pairs, i = j included.
/// The isotropic form places each pair at its signed distance ±‖t_i − t_j‖,
/// so the estimate is even in t.
class KernelCovariogram {
public:
    KernelCovariogram(const SpatialSample& sample, const KernelRegressionConfig& config,
                      Centering centering = Centering::sample_mean);
    KernelCovariogram(const SpatialSample& sample, const PairIndex& index, const KernelRegressionConfig& config,
                      Centering centering = Centering::sample_mean);

    /// Ĉ_H(t); nullopt where every kernel weight vanishes.
    std::optional<double> operator()(double t) const;

    /// Estimates on nonnegative increasing lags starting at 0; lags with a
    /// zero denominator are omitted with a warning.
    EmpiricalCovariogram evaluate(std::span<const double> lags) const;

    /// Largest pair distance in the sample.
    double max_distance() const { return distance_.back(); }

private:
    void build(const SpatialSample& sample, const PairIndex& index, Centering centering);

    KernelRegressionConfig config_;
    std::vector<double> distance_;  // distinct pair distances (0 first)
    std::vector<double> sum_;       // Σ X̌ per orientation at that distance
    std::vector<double> count_;     // pairs per orientation at that distance
};

EmpiricalCovariogram kernel_covariogram(const SpatialSample& sample, std::span<const double> lags,
                                        const KernelRegressionConfig& config,
                                        Centering centering = Centering::sample_mean);

/// Clips the negative part of the discrete spectrum of an arithmetic-lag
/// covariogram. The spectrum is the DFT of the even extension
/// c_0..c_L, c_{L−1}..c_1, i.e. the eigenvalues of the circulant matrix that
/// embeds the Toeplitz matrix, so the result is always positive semidefinite.
EmpiricalCovariogram positivize_spectrum(const EmpiricalCovariogram& cov);

struct HallResult {
    EmpiricalCovariogram estimate;
    EmpiricalCovariogram truncated;  // step 1, before the spectral steps
    double theta_hat = 0.0;          // first negative frequency (∞ if none)
};

/// Hall's truncated estimator on a uniform lag grid 0, δ, ..., Lδ: the
/// kernel estimate is brought linearly to 0 on (T1, T2], cosine-transformed
/// by the trapezoid rule on frequencies jπ/(4Lδ), cut at the first negative
/// frequency and inverted. Without truncation only the spectral steps run.
HallResult hall_truncated_details(const EmpiricalCovariogram& kernel_estimate, const KernelCovariogram& kernel,
                                  const std::optional<TruncationConfig>& truncation);

/// Hall's estimator at arithmetic lags 0, δ, ..., Lδ. The cosine transform
/// runs over the kernel estimate on the same step out to the largest pair
/// distance (or Lδ if that is further).
EmpiricalCovariogram hall_truncated_estimator(const KernelCovariogram& kernel, std::span<const double> lags,
                                              const std::optional<TruncationConfig>& truncation);
EmpiricalCovariogram hall_truncated_estimator(const SpatialSample& sample, std::span<const double> lags,
                                              const KernelRegressionConfig& config,
                                              const std::optional<TruncationConfig>& truncation,
                                              Centering centering = Centering::sample_mean);

}  // namespace covario
