#include "doctest.h"

#include <numeric>
#include <random>

#include "covario/classical.hpp"
#include "covario/kernel.hpp"
#include "covario/simulation.hpp"
#include "covario/tapered.hpp"
#include "oracles.hpp"

using namespace covario;

namespace {

std::vector<double> grid_lags(double step, std::size_t count) {
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(static_cast<double>(k) * step);
    return out;
}

EmpiricalCovariogram arithmetic(std::vector<double> values) {
    EmpiricalCovariogram c;
    c.lags = grid_lags(1.0, values.size());
    c.values = std::move(values);
    c.counts.assign(c.lags.size(), 1);
    return c;
}

}  // namespace

TEST_SUITE("kernel") {
    TEST_CASE("smoothing kernels are densities") {
        for (auto k : {SmoothingKernel::gaussian, SmoothingKernel::epanechnikov, SmoothingKernel::triangular}) {
            double mass = 0.0;
            const double h = 1e-3;
            for (double u = -8.0; u < 8.0; u += h) mass += smoothing_kernel_density(k, u + h / 2) * h;
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(smoothing_kernel_density(k, 0.7) == smoothing_kernel_density(k, -0.7));
        }
        CHECK(parse_smoothing_kernel("epanechnikov") == SmoothingKernel::epanechnikov);
        CHECK_THROWS(parse_smoothing_kernel("box"));
        CHECK_THROWS(KernelRegressionConfig{SmoothingKernel::gaussian, 0.0}.validate());
        CHECK_THROWS(TruncationConfig{2.0, 1.0}.validate());
    }

    TEST_CASE("single pair ratio") {
        const SpatialSample s(1, {{0, 0, 0}, {2.5, 0, 0}}, {1.0, 3.0});
        for (auto k : {SmoothingKernel::epanechnikov, SmoothingKernel::triangular}) {
            const KernelCovariogram kc(s, {k, 1.0});
            CHECK(*kc(2.5) == doctest::Approx(-1.0));  // (1−2)(3−2)
            CHECK(*kc(-2.5) == doctest::Approx(-1.0));
            CHECK(*kc(0.0) == doctest::Approx(1.0));
            CHECK_FALSE(kc(1.25).has_value());
        }
    }

    TEST_CASE("small bandwidth reproduces exact-distance averages") {
        std::mt19937_64 rng(31);
        const auto s = oracle::random_grid(rng, 6, 5);
        const KernelCovariogram kc(s, {SmoothingKernel::gaussian, 1e-3});
        for (double tau : {1.0, std::sqrt(2.0), 2.0, std::sqrt(5.0), 3.0}) {
            const auto want = oracle::bin_stats(s, {tau}, 1e-9, true)[0];
            CHECK(*kc(tau) == doctest::Approx(want.product_sum / static_cast<double>(want.count)).epsilon(1e-6));
        }
        const auto series = SpatialSample::from_series(oracle::normals(rng, 40));
        const auto c = classical_covariogram(series, LagBinning::regular(1, 1, 6, 0.5));
        const auto k = kernel_covariogram(series, grid_lags(1.0, 7), {SmoothingKernel::gaussian, 1e-3});
        for (std::size_t h = 0; h < 7; ++h) CHECK(k.values[h] == doctest::Approx(c.values[h]).epsilon(1e-6));
    }

    TEST_CASE("symmetry and relabeling") {
        std::mt19937_64 rng(32);
        const auto s = oracle::random_scatter(rng, 30, 2);
        const KernelRegressionConfig cfg{SmoothingKernel::gaussian, default_bandwidth(s)};
        CHECK(cfg.bandwidth == doctest::Approx(1.5 * mean_nearest_neighbour_distance(s)));
        const KernelCovariogram kc(s, cfg);
        std::vector<std::size_t> perm(s.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Coord> locs;
        std::vector<double> vals;
        for (auto p : perm) {
            locs.push_back(s.location(p));
            vals.push_back(s.value(p));
        }
        const KernelCovariogram kp(SpatialSample(2, locs, vals), cfg);
        for (double t : {0.0, 0.4, 1.3, 2.7, 5.0}) {
            CHECK(*kc(t) == doctest::Approx(*kc(-t)).epsilon(1e-12));
            CHECK(*kc(t) == doctest::Approx(*kp(t)).epsilon(1e-10));
        }
    }

    TEST_CASE("evaluate omits empty lags") {
        const SpatialSample s(1, {{0, 0, 0}, {1, 0, 0}}, {1.0, 3.0});
        const KernelCovariogram kc(s, {SmoothingKernel::epanechnikov, 0.3});
        const auto e = kc.evaluate(std::vector<double>{0.0, 0.5, 1.0});
        CHECK(e.lags == std::vector<double>{0.0, 1.0});
        CHECK_THROWS(kc.evaluate(std::vector<double>{0.5, 1.0}));
    }

    TEST_CASE("positivize spectrum") {
        const auto zero = positivize_spectrum(arithmetic({0, 0, 0, 0}));
        for (double v : zero.values) CHECK(v == 0.0);

        const auto ab = positivize_spectrum(arithmetic({2.0 / 3.0, 0.0, 1.0}));
        CHECK(check_positive_definite(ab).min_eigenvalue >= -1e-10);

        std::vector<double> pd;
        for (int k = 0; k < 12; ++k) pd.push_back(std::exp(-0.5 * k));
        const auto same = positivize_spectrum(arithmetic(pd));
        for (std::size_t k = 0; k < pd.size(); ++k) CHECK(same.values[k] == doctest::Approx(pd[k]).epsilon(1e-10));

        std::mt19937_64 rng(33);
        for (int t = 0; t < 100; ++t) {
            auto v = oracle::normals(rng, 3 + static_cast<std::size_t>(t % 20));
            v[0] = std::abs(v[0]) + 0.1;
            const auto once = positivize_spectrum(arithmetic(v));
            CHECK(check_positive_definite(once).min_eigenvalue >= -1e-8 * std::max(once.values[0], 1e-300));
            const auto twice = positivize_spectrum(once);
            for (std::size_t k = 0; k < v.size(); ++k)
                CHECK(twice.values[k] == doctest::Approx(once.values[k]).epsilon(1e-10).scale(1.0));
        }
    }

    TEST_CASE("hall truncation step") {
        std::mt19937_64 rng(34);
        const auto s = SpatialSample::from_series(oracle::normals(rng, 60), 0.25);
        const KernelCovariogram kc(s, {SmoothingKernel::gaussian, 0.4});
        const auto lags = grid_lags(0.25, 17);
        const auto est = kc.evaluate(lags);
        const TruncationConfig trunc{1.5, 2.0};
        const auto details = hall_truncated_details(est, kc, trunc);
        const auto& tr = details.truncated;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double t = tr.lags[k];
            if (t <= 1.5) CHECK(tr.values[k] == doctest::Approx(*kc(t)));
            else if (t >= 2.0) CHECK(tr.values[k] == 0.0);
            else CHECK(tr.values[k] == doctest::Approx(*kc(1.5) * (2.0 - t) / 0.5));
        }
        CHECK(details.estimate.size() == est.size());
        CHECK(check_positive_definite(details.estimate).min_eigenvalue >= -1e-8 * details.estimate.values[0]);
        CHECK_THROWS(hall_truncated_details(kc.evaluate(grid_lags(0.25, 6)), kc, trunc));
    }

    TEST_CASE("hall on a constant field") {
        const auto s = SpatialSample::from_series(std::vector<double>(20, 1.5));
        const auto out = hall_truncated_estimator(s, grid_lags(1.0, 5), {SmoothingKernel::gaussian, 1.0}, std::nullopt);
        for (double v : out.values) CHECK(v == 0.0);
    }

    TEST_CASE("hall fails when the spectrum turns negative at once") {
        // strongly alternating estimate: the first frequency is already negative
        const auto s = SpatialSample::from_series(std::vector<double>{1, -1, 1, -1, 1, -1, 1, -1});
        CHECK_THROWS_WITH(
            hall_truncated_estimator(s, grid_lags(1.0, 6), {SmoothingKernel::gaussian, 0.05}, TruncationConfig{1.5, 2.0}),
            "positivization failed near zero");
    }

    TEST_CASE("hall tail on a gaussian-model series") {
        GridSpec grid;
        grid.dim = 1;
        grid.lo = {0, 0, 0};
        grid.hi = {60, 0, 0};
        grid.step = 0.25;
        const auto field = simulate_grf({ModelFamily::gaussian, 1.0, 1}, grid, 77);
        const auto s = field.to_sample();
        const auto lags = grid_lags(0.25, 25);
        const auto out = hall_truncated_estimator(s, lags, {SmoothingKernel::gaussian, 0.375}, TruncationConfig{1.5, 2.0});
        CHECK(check_positive_definite(out).min_eigenvalue >= -1e-8 * out.values[0]);
        // ringing beyond T2 decays: peak |value| over successive unit windows does not grow
        double prev = std::numeric_limits<double>::infinity();
        for (double lo = 2.0; lo + 1.0 <= 6.0 + 1e-9; lo += 1.0) {
            double peak = 0.0;
            for (std::size_t k = 0; k < out.size(); ++k)
                if (out.lags[k] >= lo && out.lags[k] < lo + 1.0) peak = std::max(peak, std::abs(out.values[k]));
            CHECK(peak <= prev + 1e-9 * out.values[0]);
            prev = peak;
        }
    }
}
