#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covario/corrections.hpp"
#include "covario/evaluation.hpp"
#include "covario/kernel.hpp"
#include "covario/simulation.hpp"

namespace covario {

/// Estimator identifiers used by the study and the CLI:
/// cstar (C*), cstarstar (C**), ca (kernel-corrected C**), hall (truncated
/// kernel estimator), qn (Qn variogram based), tapered (Dahlhaus), bspline
/// (completely monotone spline fit to C*).
inline constexpr std::string_view kStudyEstimators[] = {"cstar", "cstarstar", "ca", "hall", "qn", "tapered", "bspline"};

struct ExperimentConfig {
    CovarianceModel model{ModelFamily::gaussian, 1.0, 2};
    GridSpec grid{2, {-8.0, -8.0, 0.0}, {8.0, 8.0, 0.0}, 0.2};
    Coord sub_lo{-5.0, -5.0, 0.0};
    Coord sub_hi{5.0, 5.0, 0.0};
    double tau0 = 10.0;
    std::size_t realisations = 10;
    std::uint64_t seed = 1;
    std::vector<std::string> estimators{kStudyEstimators, kStudyEstimators + 7};

    Centering centering = Centering::sample_mean;
    IsotropicKernel correction{KernelName::gaussian, 25.0};
    SmoothingKernel hall_kernel = SmoothingKernel::gaussian;
    double hall_bandwidth = 0.0;  // 0 selects 1.5 × mean nearest-neighbour distance
    std::optional<TruncationConfig> truncation = TruncationConfig{1.5, 2.0};
    double taper_rho = 0.2;
    int spline_m = 2;
    int spline_p = 3;
    std::size_t targets = 50;
    std::size_t neighbors = 512;
    bool compute_mspe = true;
    std::size_t jobs = 1;

    void validate() const;
};

/// Study defaults for one model: the correction kernel (gaussian /
/// wave / rational quadratic) and truncation (Gaussian model only).
ExperimentConfig default_study_config(ModelFamily family);

/// Per-estimator band over realisations on the common lag grid 0, τ_1, ..., τ0.
struct Envelope {
    std::string estimator;
    std::vector<double> lags;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> mean;
};

struct ExperimentResult {
    std::vector<MetricReport> reports;
    MetricTable averages;
    MetricTable ranks;
    std::vector<Envelope> envelopes;
    EmbeddingInfo embedding;
};

/// Estimates from one realisation, keyed like config.estimators. Failures
/// are reported through `errors` with an empty estimate.
struct RealisationEstimates {
    std::vector<std::string> estimators;
    std::vector<std::optional<EmpiricalCovariogram>> estimates;
    std::vector<std::string> errors;
};

RealisationEstimates estimate_all(const ExperimentConfig& config, const LatticeSample& subregion);

/// simulate → estimate → metrics → ranks for every realisation. A failing
/// (estimator, realisation) cell is recorded in its report and the batch goes on.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace covario
