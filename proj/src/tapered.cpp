#include "covario/tapered.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "covario/classical.hpp"

namespace covario {

namespace {

std::array<std::size_t, 3> padded_dims(std::span<const std::size_t> dims) {
    std::array<std::size_t, 3> n{1, 1, 1};
    for (std::size_t k = 0; k < dims.size(); ++k) n[k] = dims[k];
    return n;
}

std::int64_t squared_norm(const LatticeLag& h) { return h[0] * h[0] + h[1] * h[1] + h[2] * h[2]; }

bool canonical(const LatticeLag& h) {
    for (auto v : h) {
        if (v != 0) return v > 0;
    }
    return true;
}

// Σ_t y(t) y(t+h) over admissible t, with the admissible count.
std::pair<double, std::size_t> lag_product(const std::vector<double>& y, const std::array<std::size_t, 3>& n,
                                           const LatticeLag& h) {
    std::array<std::int64_t, 3> lo{};
    std::array<std::int64_t, 3> hi{};
    for (int k = 0; k < 3; ++k) {
        const auto nk = static_cast<std::int64_t>(n[k]);
        lo[k] = std::max<std::int64_t>(0, -h[k]);
        hi[k] = std::min<std::int64_t>(nk, nk - h[k]);
        if (hi[k] <= lo[k]) return {0.0, 0};
    }
    const auto n1 = static_cast<std::int64_t>(n[1]);
    const auto n2 = static_cast<std::int64_t>(n[2]);
    const std::int64_t shift = (h[0] * n1 + h[1]) * n2 + h[2];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::int64_t a = lo[0]; a < hi[0]; ++a) {
        for (std::int64_t b = lo[1]; b < hi[1]; ++b) {
            const std::int64_t row = (a * n1 + b) * n2;
            for (std::int64_t c = lo[2]; c < hi[2]; ++c) {
                const std::int64_t t = row + c;
                sum += y[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t + shift)];
            }
            count += static_cast<std::size_t>(hi[2] - lo[2]);
        }
    }
    return {sum, count};
}

}  // namespace

void LatticeSample::validate() const {
    if (dims.empty() || dims.size() > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
    std::size_t total = 1;
    for (auto d : dims) {
        if (d == 0) throw std::invalid_argument("lattice extents must be positive");
        total *= d;
    }
    if (values.size() != total) throw std::invalid_argument("lattice value count does not match dims");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("lattice value is not finite");
    }
}

Coord LatticeSample::location(std::size_t index) const {
    const auto n = padded_dims(dims);
    Coord c{};
    const std::size_t cell[3] = {index / (n[1] * n[2]), (index / n[2]) % n[1], index % n[2]};
    for (std::size_t k = 0; k < dims.size(); ++k) c[k] = origin[k] + step[k] * static_cast<double>(cell[k]);
    return c;
}

SpatialSample LatticeSample::to_sample() const {
    validate();
    std::vector<Coord> locs(size());
    for (std::size_t i = 0; i < size(); ++i) locs[i] = location(i);
    return SpatialSample(dim(), std::move(locs), values);
}

LatticeSample LatticeSample::from_sample(const SpatialSample& sample) {
    const auto grid = detect_grid(sample);
    if (!grid) throw std::invalid_argument("locations do not form a complete rectangular grid");
    LatticeSample out;
    for (int k = 0; k < sample.dim(); ++k) {
        out.dims.push_back(grid->shape[k]);
        out.origin[k] = grid->origin[k];
        out.step[k] = grid->step[k];
    }
    const auto n = padded_dims(out.dims);
    out.values.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto& c = grid->cells[i];
        out.values[(c[0] * n[1] + c[1]) * n[2] + c[2]] = sample.value(i);
    }
    return out;
}

std::vector<LatticeLag> lattice_lags_within(std::span<const std::size_t> dims, double max_norm) {
    if (dims.empty() || dims.size() > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
    if (!(max_norm >= 0.0)) throw std::invalid_argument("max_norm must be nonnegative");
    const auto n = padded_dims(dims);
    const double limit = max_norm * max_norm * (1.0 + 1e-12);
    std::array<std::int64_t, 3> reach{};
    for (int k = 0; k < 3; ++k) {
        reach[k] = std::min<std::int64_t>(static_cast<std::int64_t>(n[k]) - 1,
                                          static_cast<std::int64_t>(std::floor(max_norm + 1e-9)));
    }
    std::vector<LatticeLag> out;
    for (std::int64_t a = -reach[0]; a <= reach[0]; ++a) {
        for (std::int64_t b = -reach[1]; b <= reach[1]; ++b) {
            for (std::int64_t c = -reach[2]; c <= reach[2]; ++c) {
                const LatticeLag h{a, b, c};
                if (!canonical(h)) continue;
                if (static_cast<double>(squared_norm(h)) > limit) continue;
                out.push_back(h);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const LatticeLag& x, const LatticeLag& y) {
        const auto nx = squared_norm(x);
        const auto ny = squared_norm(y);
        return nx != ny ? nx < ny : x < y;
    });
    return out;
}

void TaperConfig::validate() const {
    if (!(rho > 0.0) || !(rho <= 1.0)) throw std::invalid_argument("taper rho must lie in (0, 1]");
}

double taper_window(TaperWindow window, double x) {
    switch (window) {
        case TaperWindow::tukey: return 0.5 * (1.0 - std::cos(std::numbers::pi * x));
    }
    return 1.0;
}

double taper_weight(double u, double rho, TaperWindow window) {
    if (!(u >= 0.0) || !(u <= 1.0)) throw std::invalid_argument("taper argument must lie in [0, 1]");
    if (!(rho > 0.0) || !(rho <= 1.0)) throw std::invalid_argument("taper rho must lie in (0, 1]");
    if (u > 0.5) u = 1.0 - u;
    if (u < rho / 2.0) return taper_window(window, 2.0 * u / rho);
    return 1.0;
}

double taper_norm(std::size_t n, const TaperConfig& taper) {
    taper.validate();
    double h = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double a = taper_weight((static_cast<double>(s) + 0.5) / static_cast<double>(n), taper.rho, taper.window);
        h += a * a;
    }
    return h;
}

VectorCovariogram guyon_covariogram(const LatticeSample& lattice, std::span<const LatticeLag> lags,
                                    Centering centering) {
    lattice.validate();
    const auto n = padded_dims(lattice.dims);
    const auto y = centered_values(lattice.values, centering);
    VectorCovariogram out;
    for (const auto& h : lags) {
        const auto [sum, count] = lag_product(y, n, h);
        if (count == 0) continue;
        out.lags.push_back(h);
        out.values.push_back(sum / static_cast<double>(count));
        out.counts.push_back(count);
    }
    return out;
}

VectorCovariogram dahlhaus_covariogram(const LatticeSample& lattice, std::span<const LatticeLag> lags,
                                       const TaperConfig& taper, Centering centering) {
    lattice.validate();
    taper.validate();
    const auto n = padded_dims(lattice.dims);
    std::array<std::vector<double>, 3> axis;
    double norm = 1.0;
    for (int k = 0; k < 3; ++k) {
        axis[k].assign(n[k], 1.0);
        if (static_cast<std::size_t>(k) >= lattice.dims.size()) continue;
        for (std::size_t s = 0; s < n[k]; ++s) {
            axis[k][s] = taper_weight((static_cast<double>(s) + 0.5) / static_cast<double>(n[k]), taper.rho,
                                      taper.window);
        }
        norm *= taper_norm(n[k], taper);
    }
    auto y = centered_values(lattice.values, centering);
    for (std::size_t a = 0; a < n[0]; ++a) {
        for (std::size_t b = 0; b < n[1]; ++b) {
            for (std::size_t c = 0; c < n[2]; ++c) y[(a * n[1] + b) * n[2] + c] *= axis[0][a] * axis[1][b] * axis[2][c];
        }
    }
    VectorCovariogram out;
    for (const auto& h : lags) {
        const auto [sum, count] = lag_product(y, n, h);
        if (count == 0) continue;
        out.lags.push_back(h);
        out.values.push_back(sum / norm);
        out.counts.push_back(count);
    }
    return out;
}

EmpiricalCovariogram isotropic_profile(const VectorCovariogram& cov, double unit) {
    if (!(unit > 0.0)) throw std::invalid_argument("unit must be positive");
    std::map<std::int64_t, std::array<double, 3>> by_norm;  // sum, lag count, pair count
    for (std::size_t k = 0; k < cov.lags.size(); ++k) {
        auto& slot = by_norm[squared_norm(cov.lags[k])];
        slot[0] += cov.values[k];
        slot[1] += 1.0;
        slot[2] += static_cast<double>(cov.counts[k]) * (squared_norm(cov.lags[k]) == 0 ? 1.0 : 2.0);
    }
    if (by_norm.empty() || by_norm.begin()->first != 0) throw std::invalid_argument("profile needs the zero lag");
    EmpiricalCovariogram out;
    for (const auto& [sq, slot] : by_norm) {
        out.lags.push_back(std::sqrt(static_cast<double>(sq)) * unit);
        out.values.push_back(slot[0] / slot[1]);
        out.counts.push_back(static_cast<std::size_t>(slot[2]));
    }
    return out;
}

EmpiricalCovariogram binned_profile(const VectorCovariogram& cov, const LagBinning& bins, double unit) {
    bins.validate();
    if (!(unit > 0.0)) throw std::invalid_argument("unit must be positive");
    std::vector<double> sum(bins.size(), 0.0);
    std::vector<double> lags(bins.size(), 0.0);
    std::vector<std::size_t> pairs(bins.size(), 0);
    EmpiricalCovariogram out;
    out.half_width = bins.half_width;
    bool zero = false;
    for (std::size_t k = 0; k < cov.lags.size(); ++k) {
        const auto sq = squared_norm(cov.lags[k]);
        if (sq == 0) {
            out.lags.push_back(0.0);
            out.values.push_back(cov.values[k]);
            out.counts.push_back(cov.counts[k]);
            zero = true;
            continue;
        }
        const auto b = bins.bin_of(std::sqrt(static_cast<double>(sq)) * unit);
        if (!b) continue;
        sum[*b] += cov.values[k];
        lags[*b] += 1.0;
        pairs[*b] += 2 * cov.counts[k];
    }
    if (!zero) throw std::invalid_argument("profile needs the zero lag");
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (lags[b] == 0.0) continue;
        out.lags.push_back(bins.centers[b]);
        out.values.push_back(sum[b] / lags[b]);
        out.counts.push_back(pairs[b]);
    }
    if (out.size() < 2) throw std::runtime_error("no estimable lags");
    return out;
}

EmpiricalCovariogram series_profile(const VectorCovariogram& cov) { return isotropic_profile(cov, 1.0); }

}  // namespace covario
