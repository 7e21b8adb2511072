#pragma once

// Exhaustive reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "covario/spatial.hpp"

namespace oracle {

using covario::Coord;
using covario::SpatialSample;

inline double dist(const SpatialSample& s, std::size_t i, std::size_t j) {
    double d = 0.0;
    for (int k = 0; k < s.dim(); ++k) {
        const double e = s.location(i)[k] - s.location(j)[k];
        d += e * e;
    }
    return std::sqrt(d);
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(const SpatialSample& s, double tau, double delta) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (i != j && std::abs(dist(s, i, j) - tau) <= delta + 1e-12) {
                out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
    }
    return out;
}

inline std::vector<double> centered(const SpatialSample& s, bool center) {
    double mean = 0.0;
    for (double v : s.values()) mean += v;
    mean /= static_cast<double>(s.size());
    std::vector<double> out;
    for (double v : s.values()) out.push_back(center ? v - mean : v);
    return out;
}

struct BinStats {
    double tau;
    std::size_t count;
    double product_sum;
    double square_diff_sum;
};

inline std::vector<BinStats> bin_stats(const SpatialSample& s, const std::vector<double>& centers, double delta,
                                       bool center) {
    const auto x = centered(s, center);
    std::vector<BinStats> out;
    for (double tau : centers) {
        BinStats b{tau, 0, 0.0, 0.0};
        for (auto [i, j] : pairs(s, tau, delta)) {
            ++b.count;
            b.product_sum += x[i] * x[j];
            b.square_diff_sum += (x[i] - x[j]) * (x[i] - x[j]);
        }
        out.push_back(b);
    }
    return out;
}

inline double kth_abs_difference(const std::vector<double>& x, std::size_t k) {
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) d.push_back(std::abs(x[i] - x[j]));
    }
    std::sort(d.begin(), d.end());
    return d.at(k - 1);
}

inline double kth_pair_mean(const std::vector<double>& x, std::size_t k) {
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) d.push_back((x[i] + x[j]) / 2.0);
    }
    std::sort(d.begin(), d.end());
    return d.at(k - 1);
}

inline Eigen::MatrixXd toeplitz(const std::vector<double>& v) {
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) t(a, b) = v[static_cast<std::size_t>(std::abs(a - b))];
    }
    return t;
}

inline double min_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Random scatter without duplicate locations.
inline SpatialSample random_scatter(std::mt19937_64& rng, std::size_t n, int dim, double extent = 10.0) {
    std::uniform_real_distribution<double> u(0.0, extent);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Coord> locs;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
        Coord c{};
        for (int k = 0; k < dim; ++k) c[k] = u(rng);
        locs.push_back(c);
        vals.push_back(g(rng));
    }
    return SpatialSample(dim, std::move(locs), std::move(vals));
}

/// Integer grid {0..nx-1} × {0..ny-1} with normal values.
inline SpatialSample random_grid(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Coord> locs;
    std::vector<double> vals;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            locs.push_back({static_cast<double>(i), static_cast<double>(j), 0.0});
            vals.push_back(g(rng));
        }
    }
    return SpatialSample(2, std::move(locs), std::move(vals));
}

inline std::vector<double> normals(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) v = g(rng);
    return out;
}

}  // namespace oracle
