#include "doctest.h"

#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "covario/basis.hpp"
#include "covario/nnls.hpp"
#include "oracles.hpp"

using namespace covario;

namespace {

std::vector<double> lags_to(double max, std::size_t count) {
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(max * static_cast<double>(k) / static_cast<double>(count - 1));
    return out;
}

EmpiricalCovariogram from_fn(const std::function<double(double)>& f, std::span<const double> lags) {
    auto c = tabulate(f, lags);
    c.counts.assign(lags.size(), 10);
    return c;
}

double objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = b - a * x;
    return (w.array() * r.array().square()).sum();
}

}  // namespace

TEST_SUITE("basis") {
    TEST_CASE("b-spline basis") {
        const auto k = bspline_knots(2, 3);
        CHECK(k.size() == 2 + 2 * 4);
        CHECK(k.front() == 0.0);
        CHECK(k.back() == 1.0);
        std::mt19937_64 rng(51);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            const double x = u(rng);
            double sum = 0.0;
            for (int i = 0; i < 2 + 3 + 1; ++i) {
                const double b = bspline_eval(k, 3, i, x);
                CHECK(b >= 0.0);
                sum += b;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("monotone basis") {
        for (int m : {1, 2, 4}) {
            for (int p : {1, 2, 3}) {
                const auto knots = bspline_knots(m, p - 1);
                for (int j = 1; j <= m + p; ++j) {
                    const double closed = (m + 1) * (knots[static_cast<std::size_t>(j - 1 + p)] - knots[static_cast<std::size_t>(j - 1)]) / p;
                    CHECK(monotone_basis_eval(j, p, 0.0, m) == doctest::Approx(closed).epsilon(1e-12));
                }
            }
        }
        const auto knots = bspline_knots(2, 2);
        boost::math::quadrature::tanh_sinh<double> ts;
        for (int j = 1; j <= 5; ++j) {
            for (double x : {0.3, 2.0, 17.0, 400.0}) {
                auto f = [&](double t) { return std::pow(t, x) * bspline_eval(knots, 2, j - 1, t); };
                double ref = 0.0;
                for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
                    if (knots[s + 1] > knots[s])
                        ref += 3.0 * ts.integrate(f, knots[s], knots[s + 1]);
                }
                CHECK(monotone_basis_eval(j, 3, x, 2) == doctest::Approx(ref).epsilon(1e-10));
            }
        }
        std::mt19937_64 rng(52);
        std::uniform_real_distribution<double> u(0.0, 50.0);
        for (int t = 0; t < 100; ++t) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            const int j = 1 + t % 5;
            const double fa = monotone_basis_eval(j, 3, a, 2);
            CHECK(fa >= monotone_basis_eval(j, 3, b, 2));
            CHECK(fa >= 0.0);
        }
        CHECK_THROWS(monotone_basis_eval(0, 3, 1.0, 2));
        CHECK_THROWS(monotone_basis_eval(6, 3, 1.0, 2));
    }

    TEST_CASE("bessel basis") {
        CHECK(bessel_basis_eval(2, 1.3, 0.0) == 1.0);
        for (double tau : {0.1, 1.0, 2.4048, 7.5}) {
            CHECK(bessel_basis_eval(2, 1.0, tau) == doctest::Approx(boost::math::cyl_bessel_j(0, tau)).epsilon(1e-12).scale(1e-12));
            CHECK(bessel_basis_eval(3, 2.0, tau) == doctest::Approx(std::sin(2 * tau) / (2 * tau)).epsilon(1e-12));
            const double z = 0.7 * tau;
            const double four = 2.0 * boost::math::cyl_bessel_j(1, z) / z;
            CHECK(bessel_basis_eval(4, 0.7, tau) == doctest::Approx(four).epsilon(1e-12));
        }
        const auto jumps = default_bessel_jumps(2, 3, 10.0);
        REQUIRE(jumps.size() == 3);
        CHECK(jumps[0] * 10.0 == doctest::Approx(2.404825557695773).epsilon(1e-12));
        CHECK(std::abs(boost::math::cyl_bessel_j(0, jumps[2] * 10.0)) < 1e-10);
        const auto odd = default_bessel_jumps(3, 2, 1.0);
        CHECK(odd[0] == doctest::Approx(std::numbers::pi));
    }

    TEST_CASE("bernstein basis") {
        CHECK(bernstein_basis_eval(1, 1, 1.0) == doctest::Approx(0.5));
        CHECK(bernstein_basis_eval(2, 4, 0.0) == 1.0);
        for (double tau = 0.0; tau < 5.0; tau += 0.25) {
            for (int i = 1; i < 5; ++i) {
                CHECK(bernstein_basis_eval(i, 5, tau) <= bernstein_basis_eval(i + 1, 5, tau));
                CHECK(bernstein_basis_eval(i, 5, tau + 0.25) <= bernstein_basis_eval(i, 5, tau));
            }
        }
    }

    TEST_CASE("nnls") {
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
        CHECK(nnls_solve(id, Eigen::Vector2d(1.0, 2.0)).x.isApprox(Eigen::Vector2d(1.0, 2.0)));
        const auto clip = nnls_solve(id, Eigen::Vector2d(-1.0, 2.0)).x;
        CHECK(clip[0] == 0.0);
        CHECK(clip[1] == doctest::Approx(2.0));

        std::mt19937_64 rng(53);
        std::normal_distribution<double> g;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 5; ++t) {
            Eigen::MatrixXd a(10, 4);
            Eigen::VectorXd b(10), w(10);
            for (int i = 0; i < 10; ++i) {
                for (int j = 0; j < 4; ++j) a(i, j) = g(rng);
                b[i] = g(rng);
                w[i] = 0.2 + u(rng);
            }
            const auto r = nnls_solve(a, b, w);
            CHECK((r.x.array() >= 0.0).all());
            const double best = objective(a, b, w, r.x);
            // KKT: gradient of the objective is ≥ 0 on zero coefficients and ≈ 0 on free ones
            const Eigen::VectorXd grad = -2.0 * a.transpose() * (w.asDiagonal() * (b - a * r.x));
            for (int j = 0; j < 4; ++j) {
                if (r.x[j] > 0.0) CHECK(std::abs(grad[j]) < 1e-9);
                else CHECK(grad[j] > -1e-9);
            }
            int beaten = 0;
            for (int s = 0; s < 100000; ++s) {
                Eigen::VectorXd x(4);
                for (int j = 0; j < 4; ++j) x[j] = s % 2 == 0 ? 2.0 * u(rng) : std::max(0.0, r.x[j] + 0.05 * g(rng));
                beaten += objective(a, b, w, x) < best - 1e-12;
            }
            CHECK(beaten == 0);
        }

        Eigen::MatrixXd dup(3, 2);
        dup << 1, 1, 2, 2, 3, 3;
        const auto rd = nnls_solve(dup, Eigen::Vector3d(1, 2, 3));
        CHECK((dup * rd.x - Eigen::Vector3d(1, 2, 3)).norm() < 1e-10);
        CHECK(rd.x[0] == doctest::Approx(rd.x[1]));
        CHECK(rd.rank_deficient);
        CHECK_THROWS(nnls_solve(id, Eigen::Vector2d(1, 1), Eigen::Vector2d(1, -1)));
    }

    TEST_CASE("fits recover single basis functions") {
        const auto lags = lags_to(3.0, 16);
        for (auto family : {BasisFamily::bspline, BasisFamily::bessel, BasisFamily::bernstein}) {
            BasisConfig cfg;
            cfg.family = family;
            cfg.m = 3;
            cfg.weights_mode = WeightsMode::uniform;
            if (family == BasisFamily::bessel) cfg.jumps = {0.4, 0.9, 1.7};
            const std::size_t target = family == BasisFamily::bspline ? 2 : 1;
            FittedCovariogram one{cfg, {}};
            one.coefficients.assign(one.basis_size(), 0.0);
            one.coefficients[target] = 1.0;
            const auto emp = from_fn([&](double t) { return one(t); }, lags);
            const auto fit = fit_basis_covariogram(emp, cfg);
            for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
                CHECK(fit.coefficients[j] == doctest::Approx(j == target ? 1.0 : 0.0).epsilon(1e-6).scale(1.0));
            double resid = 0.0;
            for (std::size_t k = 0; k < lags.size(); ++k) resid = std::max(resid, std::abs(fit(lags[k]) - emp.values[k]));
            CHECK(resid < 1e-8);

            const auto zero = fit_basis_covariogram(from_fn([](double) { return 0.0; }, lags), cfg);
            for (double c : zero.coefficients) CHECK(c == 0.0);
            if (family != BasisFamily::bspline) {
                double sum = 0.0;
                for (double c : fit.coefficients) sum += c;
                CHECK(fit(0.0) == doctest::Approx(sum));
            }
        }
    }

    TEST_CASE("fits are positive definite and beat zero") {
        std::mt19937_64 rng(54);
        const auto lags = lags_to(4.0, 12);
        for (int t = 0; t < 12; ++t) {
            auto noise = oracle::normals(rng, lags.size());
            const auto emp = from_fn([&](double x) { return std::exp(-x * x / 2.0); }, lags);
            auto noisy = emp;
            for (std::size_t k = 0; k < lags.size(); ++k) noisy.values[k] += 0.1 * noise[k];
            BasisConfig cfg;
            cfg.family = static_cast<BasisFamily>(t % 3);
            cfg.m = 2 + t % 3;
            const auto fit = fit_basis_covariogram(noisy, cfg);
            for (double c : fit.coefficients) CHECK(c >= 0.0);
            const auto w = fit_weights(noisy, cfg);
            double r_fit = 0.0, r_zero = 0.0;
            for (std::size_t k = 0; k < lags.size(); ++k) {
                r_fit += w[k] * std::pow(noisy.values[k] - fit(lags[k]), 2);
                r_zero += w[k] * std::pow(noisy.values[k], 2);
            }
            CHECK(r_fit <= r_zero + 1e-12);
            const auto grid = lags_to(8.0, 64);
            const auto tab = fit.tabulate(grid);
            CHECK(oracle::min_eig(oracle::toeplitz(tab.values)) >= -1e-8 * std::max(tab.values[0], 1e-300));
        }
    }

    TEST_CASE("weights") {
        EmpiricalCovariogram emp{{0, 1, 2}, {1.0, 0.5, 0.2}, {10, 8, 6}};
        BasisConfig cfg;
        const auto w = fit_weights(emp, cfg);
        CHECK(w[0] == doctest::Approx(10.0 / 1e-6));
        CHECK(w[1] == doctest::Approx(8.0 / 0.25));
        cfg.weights_mode = WeightsMode::custom;
        cfg.custom_weights = {1, 2, 3};
        CHECK(fit_weights(emp, cfg) == std::vector<double>{1, 2, 3});

        // scaling every weight leaves the fit unchanged
        std::mt19937_64 rng(55);
        const auto lags = lags_to(3.0, 10);
        auto noisy = from_fn([](double x) { return std::exp(-x); }, lags);
        for (auto& v : noisy.values) v += 0.05 * oracle::normals(rng, 1)[0];
        BasisConfig a;
        a.weights_mode = WeightsMode::custom;
        for (std::size_t k = 0; k < lags.size(); ++k) a.custom_weights.push_back(1.0 + static_cast<double>(k));
        BasisConfig b = a;
        for (auto& v : b.custom_weights) v *= 37.0;
        const auto fa = fit_basis_covariogram(noisy, a);
        const auto fb = fit_basis_covariogram(noisy, b);
        for (std::size_t j = 0; j < fa.coefficients.size(); ++j)
            CHECK(fa.coefficients[j] == doctest::Approx(fb.coefficients[j]).epsilon(1e-8).scale(1e-12));
        BasisConfig bad;
        bad.m = 0;
        CHECK_THROWS(bad.validate());
        BasisConfig badjumps;
        badjumps.family = BasisFamily::bessel;
        badjumps.jumps = {1.0, 0.5};
        CHECK_THROWS(badjumps.validate());
    }
}
