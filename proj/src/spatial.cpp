#include "covario/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace covario {

namespace {

constexpr double kRelSlack = 1e-9;

struct KeyHash {
    std::size_t operator()(const std::array<long long, 3>& k) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (long long v : k) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

template <typename Int>
bool is_canonical(const std::array<Int, 3>& v) {
    for (Int c : v) {
        if (c > 0) return true;
        if (c < 0) return false;
    }
    return false;
}

double slack_for(double tau) { return kRelSlack * std::max(1.0, std::abs(tau)); }

}  // namespace

double euclidean_distance(const Coord& a, const Coord& b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

SpatialSample::SpatialSample(int dim, std::vector<Coord> locations, std::vector<double> values)
    : dim_(dim), locations_(std::move(locations)), values_(std::move(values)) {
    if (dim_ < 1 || dim_ > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (values_.empty()) throw std::invalid_argument("empty sample");
    if (locations_.size() != values_.size()) {
        throw std::invalid_argument("locations and values differ in length");
    }
    for (auto& loc : locations_) {
        for (int k = 0; k < 3; ++k) {
            if (k >= dim_) {
                loc[k] = 0.0;
            } else if (!std::isfinite(loc[k])) {
                throw std::invalid_argument("non-finite coordinate");
            }
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    }
    std::vector<std::size_t> order(locations_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return locations_[a] < locations_[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (locations_[order[k]] == locations_[order[k - 1]]) {
            throw std::invalid_argument("duplicate location at index " + std::to_string(order[k]));
        }
    }
}

SpatialSample SpatialSample::from_series(std::span<const double> series, double step) {
    std::vector<Coord> locs(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) locs[i] = {static_cast<double>(i) * step, 0.0, 0.0};
    return SpatialSample(1, std::move(locs), std::vector<double>(series.begin(), series.end()));
}

SpatialSample SpatialSample::with_values(std::vector<double> values) const {
    return SpatialSample(dim_, locations_, std::move(values));
}

double sample_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_mean(const SpatialSample& sample) { return sample_mean(sample.values()); }

double mean_nearest_neighbour_distance(const SpatialSample& sample) {
    const std::size_t n = sample.size();
    if (n < 2) throw std::invalid_argument("need at least two locations");
    if (auto grid = detect_grid(sample)) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < sample.dim(); ++k) {
            if (grid->shape[k] > 1) best = std::min(best, grid->step[k]);
        }
        return best;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            best = std::min(best, euclidean_distance(sample.location(i), sample.location(j), sample.dim()));
        }
        total += best;
    }
    return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// LagBinning

double LagBinning::spacing() const {
    if (centers.size() < 2) return centers.empty() ? 0.0 : 2.0 * std::max(half_width, centers.front());
    return (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
}

void LagBinning::validate() const {
    if (centers.empty()) throw std::invalid_argument("lag binning needs at least one bin");
    if (!(half_width >= 0.0) || !std::isfinite(half_width)) {
        throw std::invalid_argument("bin half-width must be finite and nonnegative");
    }
    if (!(centers.front() > 0.0)) throw std::invalid_argument("bin centers must be positive");
    if (centers.size() >= 2) {
        const double s = spacing();
        for (std::size_t k = 1; k < centers.size(); ++k) {
            const double gap = centers[k] - centers[k - 1];
            if (!(gap > 0.0)) throw std::invalid_argument("bin centers must be strictly increasing");
            if (std::abs(gap - s) > 1e-9 * std::max(1.0, s)) {
                throw std::invalid_argument("bin centers must be equally spaced");
            }
        }
        if (half_width > s / 2.0 + 1e-12 * s) throw std::invalid_argument("bins overlap: half-width exceeds spacing/2");
    }
}

std::optional<std::size_t> LagBinning::bin_of(double distance) const {
    if (centers.empty()) return std::nullopt;
    std::size_t k = 0;
    if (centers.size() > 1) {
        const double s = spacing();
        const double kf = (distance - centers.front()) / s;
        const double idx = std::ceil(kf - 0.5);
        if (idx < 0.0) {
            k = 0;
        } else if (idx > static_cast<double>(centers.size() - 1)) {
            k = centers.size() - 1;
        } else {
            k = static_cast<std::size_t>(idx);
        }
    }
    if (std::abs(distance - centers[k]) <= half_width + slack_for(centers[k])) return k;
    return std::nullopt;
}

LagBinning LagBinning::regular(double first, double spacing, std::size_t count, double half_width) {
    LagBinning b;
    b.half_width = half_width;
    b.centers.reserve(count);
    for (std::size_t k = 0; k < count; ++k) b.centers.push_back(first + spacing * static_cast<double>(k));
    b.validate();
    return b;
}

LagBinning build_lag_bins(const SpatialSample& sample, std::size_t bin_count) {
    if (sample.size() < 2) throw std::invalid_argument("lag bins need at least two locations");
    if (bin_count == 0) throw std::invalid_argument("bin count must be positive");
    const double tau1 = mean_nearest_neighbour_distance(sample);
    return LagBinning::regular(tau1, tau1, bin_count, tau1 / 2.0);
}

// ---------------------------------------------------------------------------
// Direction cones

void DirectionSpec::validate() const {
    if (!(azimuth >= 0.0 && azimuth < std::numbers::pi)) throw std::invalid_argument("azimuth must lie in [0, pi)");
    if (!(angle_tolerance > 0.0 && angle_tolerance <= std::numbers::pi / 2 + 1e-15)) {
        throw std::invalid_argument("angle tolerance must lie in (0, pi/2]");
    }
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
}

bool DirectionSpec::contains(double dx, double dy) const {
    const double r = std::hypot(dx, dy);
    if (r == 0.0) return false;
    double ang = std::atan2(dy, dx);
    if (ang < 0.0) ang += std::numbers::pi;
    if (ang >= std::numbers::pi) ang -= std::numbers::pi;
    double dev = std::abs(ang - azimuth);
    dev = std::min(dev, std::numbers::pi - dev);
    if (dev > angle_tolerance + 1e-12) return false;
    return r * std::sin(dev) <= bandwidth + 1e-12 * r;
}

// ---------------------------------------------------------------------------
// Pair enumeration over a uniform cell grid of cell size τ + Δ

namespace {

PairSet enumerate_filtered(const SpatialSample& sample, double tau, double delta,
                           const DirectionSpec* direction) {
    if (!(tau > 0.0)) throw std::invalid_argument("bin center must be positive");
    if (!(delta >= 0.0)) throw std::invalid_argument("bin half-width must be nonnegative");
    PairSet out;
    out.bin_center = tau;
    const double lo = tau - delta - slack_for(tau);
    const double hi = tau + delta + slack_for(tau);
    const int dim = sample.dim();
    const double cell = hi;
    std::unordered_map<std::array<long long, 3>, std::vector<std::uint32_t>, KeyHash> cells;
    auto cell_of = [&](const Coord& c) {
        std::array<long long, 3> key{0, 0, 0};
        for (int k = 0; k < dim; ++k) key[k] = static_cast<long long>(std::floor(c[k] / cell));
        return key;
    };
    for (std::size_t i = 0; i < sample.size(); ++i) {
        cells[cell_of(sample.location(i))].push_back(static_cast<std::uint32_t>(i));
    }
    const int rx = 1;
    const int ry = dim >= 2 ? 1 : 0;
    const int rz = dim >= 3 ? 1 : 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const Coord& ti = sample.location(i);
        const auto base = cell_of(ti);
        for (int a = -rx; a <= rx; ++a) {
            for (int b = -ry; b <= ry; ++b) {
                for (int c = -rz; c <= rz; ++c) {
                    auto it = cells.find({base[0] + a, base[1] + b, base[2] + c});
                    if (it == cells.end()) continue;
                    for (std::uint32_t j : it->second) {
                        if (j == i) continue;
                        const Coord& tj = sample.location(j);
                        const double d = euclidean_distance(ti, tj, dim);
                        if (d < lo || d > hi) continue;
                        if (direction && !direction->contains(tj[0] - ti[0], tj[1] - ti[1])) continue;
                        out.pairs.emplace_back(static_cast<std::uint32_t>(i), j);
                    }
                }
            }
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

}  // namespace

PairSet enumerate_pairs(const SpatialSample& sample, double tau, double delta) {
    return enumerate_filtered(sample, tau, delta, nullptr);
}

PairSet enumerate_directional_pairs(const SpatialSample& sample, double tau, double delta,
                                    const DirectionSpec& direction) {
    if (sample.dim() != 2) throw std::invalid_argument("unsupported dimension: directional pairs need 2-D data");
    direction.validate();
    return enumerate_filtered(sample, tau, delta, &direction);
}

// ---------------------------------------------------------------------------
// Grid detection and the separation-vector index

std::optional<GridGeometry> detect_grid(const SpatialSample& sample) {
    const int dim = sample.dim();
    const std::size_t n = sample.size();
    GridGeometry g;
    double extent = 0.0;
    for (int k = 0; k < dim; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& c : sample.locations()) {
            lo = std::min(lo, c[k]);
            hi = std::max(hi, c[k]);
        }
        extent = std::max(extent, hi - lo);
    }
    const double tol = 1e-9 * std::max(1.0, extent);
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) {
        std::vector<double> u;
        u.reserve(n);
        for (const auto& c : sample.locations()) u.push_back(c[k]);
        std::sort(u.begin(), u.end());
        std::vector<double> uniq;
        for (double v : u) {
            if (uniq.empty() || v - uniq.back() > tol) uniq.push_back(v);
        }
        g.shape[k] = uniq.size();
        g.origin[k] = uniq.front();
        if (uniq.size() > 1) {
            const double step = (uniq.back() - uniq.front()) / static_cast<double>(uniq.size() - 1);
            for (std::size_t i = 0; i < uniq.size(); ++i) {
                if (std::abs(uniq[i] - (uniq.front() + step * static_cast<double>(i))) > tol) return std::nullopt;
            }
            g.step[k] = step;
        }
        total *= uniq.size();
    }
    if (total != n) return std::nullopt;
    g.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (k >= dim || g.shape[k] == 1) {
                g.cells[i][k] = 0;
                continue;
            }
            const double idx = std::round((sample.location(i)[k] - g.origin[k]) / g.step[k]);
            g.cells[i][k] = static_cast<std::uint32_t>(idx);
        }
    }
    return g;
}

PairIndex::PairIndex(const SpatialSample& sample, double max_distance)
    : n_(sample.size()), dim_(sample.dim()) {
    const double cutoff = max_distance * (1.0 + 1e-12);
    std::vector<SeparationGroup> raw;

    if (auto grid = detect_grid(sample)) {
        grid_ = true;
        std::array<long long, 3> span{};
        for (int k = 0; k < 3; ++k) span[k] = 2 * static_cast<long long>(grid->shape[k]) - 1;
        std::vector<int> slot(static_cast<std::size_t>(span[0] * span[1] * span[2]), -1);
        for (std::uint32_t i = 0; i < n_; ++i) {
            const auto& ci = grid->cells[i];
            for (std::uint32_t j = i + 1; j < n_; ++j) {
                const auto& cj = grid->cells[j];
                std::array<long long, 3> off{};
                for (int k = 0; k < 3; ++k) off[k] = static_cast<long long>(ci[k]) - static_cast<long long>(cj[k]);
                std::uint32_t a = i;
                std::uint32_t b = j;
                if (!is_canonical(off)) {
                    for (auto& v : off) v = -v;
                    std::swap(a, b);
                }
                const std::size_t key = static_cast<std::size_t>(
                    ((off[0] + (span[0] - 1) / 2) * span[1] + (off[1] + (span[1] - 1) / 2)) * span[2] +
                    (off[2] + (span[2] - 1) / 2));
                int& g = slot[key];
                if (g < 0) {
                    SeparationGroup grp;
                    for (int k = 0; k < 3; ++k) grp.offset[k] = static_cast<double>(off[k]) * grid->step[k];
                    grp.distance = std::sqrt(grp.offset[0] * grp.offset[0] + grp.offset[1] * grp.offset[1] +
                                             grp.offset[2] * grp.offset[2]);
                    if (grp.distance > cutoff) {
                        g = -2;
                        continue;
                    }
                    g = static_cast<int>(raw.size());
                    raw.push_back(std::move(grp));
                } else if (g == -2) {
                    continue;
                }
                raw[static_cast<std::size_t>(g)].pairs.emplace_back(a, b);
            }
        }
    } else {
        double extent = 0.0;
        for (int k = 0; k < dim_; ++k) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& c : sample.locations()) {
                lo = std::min(lo, c[k]);
                hi = std::max(hi, c[k]);
            }
            extent = std::max(extent, hi - lo);
        }
        const double quantum = 1e-9 * std::max(extent, 1e-300);
        std::unordered_map<std::array<long long, 3>, std::size_t, KeyHash> slot;
        for (std::uint32_t i = 0; i < n_; ++i) {
            for (std::uint32_t j = i + 1; j < n_; ++j) {
                Coord d{};
                std::array<long long, 3> key{};
                for (int k = 0; k < dim_; ++k) {
                    d[k] = sample.location(i)[k] - sample.location(j)[k];
                    key[k] = std::llround(d[k] / quantum);
                }
                std::uint32_t a = i;
                std::uint32_t b = j;
                if (!is_canonical(key)) {
                    for (auto& v : key) v = -v;
                    for (auto& v : d) v = -v;
                    std::swap(a, b);
                }
                const double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
                if (dist > cutoff) continue;
                auto [it, inserted] = slot.try_emplace(key, raw.size());
                if (inserted) {
                    SeparationGroup grp;
                    grp.offset = d;
                    grp.distance = dist;
                    raw.push_back(std::move(grp));
                }
                raw[it->second].pairs.emplace_back(a, b);
            }
        }
    }

    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (raw[x].distance != raw[y].distance) return raw[x].distance < raw[y].distance;
        return raw[x].offset < raw[y].offset;
    });
    groups_.reserve(raw.size());
    for (std::size_t idx : order) groups_.push_back(std::move(raw[idx]));
}

}  // namespace covario
