#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace covario {

/// Location in up to three dimensions; unused trailing components are zero.
using Coord = std::array<double, 3>;

double euclidean_distance(const Coord& a, const Coord& b, int dim);

/// A single realisation: scalar observations at distinct locations.
class SpatialSample {
public:
    SpatialSample(int dim, std::vector<Coord> locations, std::vector<double> values);

    /// Regularly spaced 1-D series placed at t = 0, step, 2*step, ...
    static SpatialSample from_series(std::span<const double> series, double step = 1.0);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<Coord>& locations() const noexcept { return locations_; }
    std::span<const double> values() const noexcept { return values_; }
    const Coord& location(std::size_t i) const { return locations_[i]; }
    double value(std::size_t i) const { return values_[i]; }

    /// Copy with the same locations and replaced values.
    SpatialSample with_values(std::vector<double> values) const;

private:
    int dim_;
    std::vector<Coord> locations_;
    std::vector<double> values_;
};

double sample_mean(const SpatialSample& sample);
double sample_mean(std::span<const double> values);

/// Mean over points of the distance to the nearest other point.
double mean_nearest_neighbour_distance(const SpatialSample& sample);

/// Equally spaced distance bins τ_1 < ... < τ_K with common half-width Δ.
struct LagBinning {
    std::vector<double> centers;
    double half_width = 0.0;

    std::size_t size() const noexcept { return centers.size(); }
    double spacing() const;
    void validate() const;

    /// Index of the bin holding `distance`, if any. A distance on the shared
    /// boundary of two touching bins goes to the lower one.
    std::optional<std::size_t> bin_of(double distance) const;

    static LagBinning regular(double first, double spacing, std::size_t count, double half_width);
};

/// τ_1 = mean nearest-neighbour distance, Δ = τ_1/2, τ_k = k·τ_1.
LagBinning build_lag_bins(const SpatialSample& sample, std::size_t bin_count);

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

struct PairSet {
    double bin_center = 0.0;
    std::vector<IndexPair> pairs;

    std::size_t count() const noexcept { return pairs.size(); }
};

struct DirectionSpec {
    double azimuth = 0.0;                 // radians, [0, π)
    double angle_tolerance = 0.0;         // radians, (0, π/2]
    double bandwidth = std::numeric_limits<double>::infinity();

    void validate() const;
    /// True when the separation vector (dx, dy) lies inside the search cone.
    bool contains(double dx, double dy) const;
};

/// All ordered pairs i != j with | ‖t_i − t_j‖ − τ | ≤ Δ, sorted by (i, j).
PairSet enumerate_pairs(const SpatialSample& sample, double tau, double delta);

/// Subset of enumerate_pairs whose separation lies in the search cone (2-D only).
PairSet enumerate_directional_pairs(const SpatialSample& sample, double tau, double delta,
                                    const DirectionSpec& direction);

/// Observations sharing one separation vector h: every stored (a, b) satisfies
/// t_a − t_b = offset. Only one orientation is stored per ±h; the reverse
/// orientation is implied.
struct SeparationGroup {
    Coord offset{};
    double distance = 0.0;
    std::vector<IndexPair> pairs;
};

/// Exact grouping of all unordered point pairs by separation vector, built
/// once per set of locations and shared by the pair-based estimators.
/// Complete rectangular grids are detected and grouped by integer offset;
/// other layouts are grouped by separation vector rounded to 1e-9 of the extent.
class PairIndex {
public:
    explicit PairIndex(const SpatialSample& sample,
                       double max_distance = std::numeric_limits<double>::infinity());

    const std::vector<SeparationGroup>& groups() const noexcept { return groups_; }
    std::size_t sample_size() const noexcept { return n_; }
    int dim() const noexcept { return dim_; }
    bool is_grid() const noexcept { return grid_; }

private:
    std::size_t n_;
    int dim_;
    bool grid_ = false;
    std::vector<SeparationGroup> groups_;
};

/// Axis-aligned complete grid description, when the locations form one.
struct GridGeometry {
    std::array<std::size_t, 3> shape{1, 1, 1};
    Coord origin{};
    Coord step{1.0, 1.0, 1.0};
    /// cell index per axis for each sample point
    std::vector<std::array<std::uint32_t, 3>> cells;
};

std::optional<GridGeometry> detect_grid(const SpatialSample& sample);

}  // namespace covario
