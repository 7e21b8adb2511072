#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "covario/covariogram.hpp"
#include "covario/spatial.hpp"

namespace covario {

/// Dense values on the rectangular lattice {1..n_1} × ... × {1..n_d},
/// row-major (last axis fastest). `origin` and `step` place lattice cell 0
/// in space when the lattice is viewed as a SpatialSample.
struct LatticeSample {
    std::vector<std::size_t> dims;
    std::vector<double> values;
    Coord origin{};
    Coord step{1.0, 1.0, 1.0};

    int dim() const noexcept { return static_cast<int>(dims.size()); }
    std::size_t size() const noexcept { return values.size(); }
    void validate() const;
    Coord location(std::size_t index) const;
    SpatialSample to_sample() const;

    /// Requires the sample's locations to form a complete axis-aligned grid.
    static LatticeSample from_sample(const SpatialSample& sample);
};

using LatticeLag = std::array<std::int64_t, 3>;

/// Estimates at integer vector lags; `counts` holds the number of lattice
/// points t with t, t + h both in the lattice.
struct VectorCovariogram {
    std::vector<LatticeLag> lags;
    std::vector<double> values;
    std::vector<std::size_t> counts;
};

/// The zero lag plus one representative of each ±h pair (first nonzero
/// component positive) with ‖h‖ ≤ max_norm in lattice units and admissible
/// on the given dimensions. Sorted by norm.
std::vector<LatticeLag> lattice_lags_within(std::span<const std::size_t> dims, double max_norm);

enum class TaperWindow { tukey };

struct TaperConfig {
    double rho = 0.2;
    TaperWindow window = TaperWindow::tukey;

    void validate() const;
};

/// w(x) = (1 − cos πx)/2.
double taper_window(TaperWindow window, double x);

/// a(u; ρ): w(2u/ρ) on [0, ρ/2), 1 on [ρ/2, 1/2], a(1 − u; ρ) on (1/2, 1].
double taper_weight(double u, double rho, TaperWindow window = TaperWindow::tukey);

/// H_{2,n}(0) = Σ_{s=1}^n a((s − 1/2)/n; ρ)².
double taper_norm(std::size_t n, const TaperConfig& taper);

/// Ĉ_N(h) = |{t : t, t+h ∈ P_n}|⁻¹ Σ X(t)X(t+h). Inadmissible lags are omitted.
VectorCovariogram guyon_covariogram(const LatticeSample& lattice, std::span<const LatticeLag> lags,
                                    Centering centering = Centering::none);

/// (Π_i H_{2,n_i}(0))⁻¹ Σ a(t)a(t+h) X(t)X(t+h) with product taper weights.
VectorCovariogram dahlhaus_covariogram(const LatticeSample& lattice, std::span<const LatticeLag> lags,
                                       const TaperConfig& taper, Centering centering = Centering::none);

/// Isotropic profile: values at equal-norm lags are averaged. Lags are the
/// distinct norms times `unit`, which must start at 0 (zero lag present).
EmpiricalCovariogram isotropic_profile(const VectorCovariogram& cov, double unit = 1.0);

/// Binned isotropic profile: lag 0 plus, per bin, the mean over vector lags
/// whose distance (norm × unit) falls in the bin. Empty bins are dropped.
EmpiricalCovariogram binned_profile(const VectorCovariogram& cov, const LagBinning& bins, double unit = 1.0);

/// 1-D convenience: lags 0..max_lag as an EmpiricalCovariogram with unit spacing.
EmpiricalCovariogram series_profile(const VectorCovariogram& cov);

}  // namespace covario
