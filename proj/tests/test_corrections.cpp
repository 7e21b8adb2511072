#include "doctest.h"

#include <numbers>
#include <random>
#include <sstream>

#include "covario/classical.hpp"
#include "covario/corrections.hpp"
#include "oracles.hpp"

using namespace covario;

namespace {

Eigen::MatrixXd equicorrelation(int p, double r) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(p, p, r);
    m.diagonal().setOnes();
    return m;
}

Eigen::MatrixXd random_pseudo(std::mt19937_64& rng, int p) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

EmpiricalCovariogram arithmetic(std::vector<double> v, double step = 1.0) {
    EmpiricalCovariogram c;
    for (std::size_t k = 0; k < v.size(); ++k) c.lags.push_back(step * static_cast<double>(k));
    c.values = std::move(v);
    c.counts.assign(c.lags.size(), 1);
    return c;
}

}  // namespace

TEST_SUITE("corrections") {
    TEST_CASE("linear shrink") {
        const auto pd = equicorrelation(4, 0.3);
        const auto a = linear_shrink(pd);
        CHECK(a.lambda == 1.0);
        CHECK(a.matrix.isApprox(pd));
        Eigen::Matrix2d edge;
        edge << 1, -1, -1, 1;
        CHECK(linear_shrink(edge).lambda == 1.0);
        const auto b = linear_shrink(equicorrelation(3, -0.9));
        CHECK(b.lambda == doctest::Approx(1.0 / 1.8).epsilon(1e-9));

        std::mt19937_64 rng(61);
        for (int t = 0; t < 30; ++t) {
            const auto r = random_pseudo(rng, 3 + t % 6);
            const auto s = linear_shrink(r);
            CHECK(oracle::min_eig(s.matrix) >= -1e-9);
            if (s.lambda < 1.0) {
                const double l = s.lambda + 1e-6;
                const Eigen::MatrixXd over = l * r + (1.0 - l) * Eigen::MatrixXd::Identity(r.rows(), r.cols());
                CHECK(oracle::min_eig(over) < 0.0);
            }
        }
        Eigen::Matrix2d bad;
        bad << 1, 2, 2, 1;
        CHECK_THROWS(linear_shrink(bad));
    }

    TEST_CASE("shrink entry") {
        CHECK(shrink_entry(0.0, 0.05, ShrinkFunction::tanh) == 0.0);
        CHECK(shrink_entry(0.5, 0.05, ShrinkFunction::tanh) == doctest::Approx(std::tanh(std::atanh(0.5) - 0.05)));
        CHECK(shrink_entry(-0.5, 0.05, ShrinkFunction::tanh) == doctest::Approx(-std::tanh(std::atanh(0.5) - 0.05)));
        CHECK(shrink_entry(0.04, 0.05, ShrinkFunction::tanh) == 0.0);
        const double arg = std::tan(std::numbers::pi * 0.5 / 2.0);
        CHECK(shrink_entry(0.5, 0.05, ShrinkFunction::scaled_arctan) ==
              doctest::Approx(2.0 / std::numbers::pi * std::atan(arg - 0.05)));
        CHECK(shrink_entry(1.0, 0.05, ShrinkFunction::tanh) < 1.0);
        CHECK(parse_shrink_function("scaled_arctan") == ShrinkFunction::scaled_arctan);
    }

    TEST_CASE("nonlinear shrink") {
        std::mt19937_64 rng(62);
        for (auto fn : {ShrinkFunction::tanh, ShrinkFunction::scaled_arctan}) {
            for (int t = 0; t < 20; ++t) {
                const auto r = random_pseudo(rng, 4 + t % 5);
                const auto s = nonlinear_shrink(r, 0.05, fn);
                CHECK(oracle::min_eig(s.matrix) >= -1e-12 * static_cast<double>(r.rows()));
                CHECK(s.matrix.diagonal().isOnes());
                for (int i = 0; i < r.rows(); ++i)
                    for (int j = 0; j < r.cols(); ++j)
                        if (i != j) {
                            if (s.iterations > 0 && r(i, j) != 0.0) CHECK(std::abs(s.matrix(i, j)) < std::abs(r(i, j)));
                            CHECK(s.matrix(i, j) * r(i, j) >= 0.0);
                        }
            }
        }
        const auto pd = equicorrelation(3, 0.2);
        CHECK(nonlinear_shrink(pd).iterations == 0);
        CHECK_THROWS(nonlinear_shrink(pd, 0.0));
    }

    TEST_CASE("kernels") {
        for (auto name : {KernelName::circular, KernelName::spherical, KernelName::rational_quadratic,
                          KernelName::exponential, KernelName::gaussian, KernelName::wave}) {
            const IsotropicKernel k{name, 1.7};
            CHECK(kernel_eval(k, 0.0) == doctest::Approx(1.0));
            CHECK(parse_kernel_name(to_string(name)) == name);
            for (double t = 0.0; t < 6.0; t += 0.1) CHECK(std::abs(kernel_eval(k, t)) <= 1.0 + 1e-12);
        }
        CHECK(kernel_eval({KernelName::gaussian, 1.0}, 1.0) == doctest::Approx(std::exp(-1.0)));
        CHECK(kernel_eval({KernelName::circular, 2.0}, 2.0) == 0.0);
        CHECK(kernel_eval({KernelName::circular, 2.0}, 3.0) == 0.0);
        CHECK(kernel_eval({KernelName::spherical, 2.0}, 1.0) == doctest::Approx(1.0 - 0.75 + 0.0625));
        CHECK(kernel_eval({KernelName::spherical, 2.0}, 2.5) == 0.0);
        CHECK(kernel_eval({KernelName::wave, 2.0}, 1.0) == doctest::Approx(2.0 * std::sin(0.5)));
        CHECK(kernel_eval({KernelName::wave, 2.0}, 1e-12) == doctest::Approx(1.0));
        CHECK_THROWS(IsotropicKernel{KernelName::circular, 1.0}.check_dimension(3));
        CHECK_NOTHROW(IsotropicKernel{KernelName::circular, 1.0}.check_dimension(2));
        CHECK_THROWS(IsotropicKernel{KernelName::spherical, 1.0}.check_dimension(4));
        CHECK_THROWS(IsotropicKernel{KernelName::wave, 1.0}.check_dimension(4));
        CHECK_NOTHROW(IsotropicKernel{KernelName::gaussian, 1.0}.check_dimension(7));
        CHECK_THROWS(IsotropicKernel{KernelName::gaussian, 0.0}.validate());
    }

    TEST_CASE("kernel correction") {
        std::mt19937_64 rng(63);
        const auto x = oracle::normals(rng, 40);
        const auto c = constant_denominator_series(x, 39);
        const auto flat = kernel_correct(c, {KernelName::rational_quadratic, 1e12});
        for (std::size_t k = 0; k < c.size(); ++k) CHECK(flat.values[k] == doctest::Approx(c.values[k]).epsilon(1e-9));
        const auto cut = kernel_correct(c, {KernelName::spherical, 5.0});
        CHECK(cut.values[0] == c.values[0]);
        for (std::size_t k = 5; k < c.size(); ++k) CHECK(cut.values[k] == 0.0);
        for (auto name : {KernelName::circular, KernelName::spherical, KernelName::rational_quadratic,
                          KernelName::exponential, KernelName::gaussian, KernelName::wave}) {
            const auto out = kernel_correct(c, {name, 6.0});
            CHECK(check_positive_definite(out).min_eigenvalue >= -1e-8);
            for (std::size_t k = 0; k < c.size(); ++k) CHECK(std::abs(out.values[k]) <= std::abs(c.values[k]) + 1e-15);
        }
        CHECK_THROWS(kernel_correct(c, {KernelName::circular, 2.0}, 3));
    }

    TEST_CASE("matrix round trips") {
        const auto c = arithmetic({2.0, 0.8, -0.1, 0.3});
        const auto r = correlation_toeplitz(c);
        for (int k = 0; k < 4; ++k) CHECK(r(0, k) * 2.0 == doctest::Approx(c.values[static_cast<std::size_t>(k)]));
        const auto t = oracle::toeplitz(c.values);
        for (int k = 0; k < 4; ++k) CHECK(t(0, k) == c.values[static_cast<std::size_t>(k)]);
        CHECK_NOTHROW(validate_pseudo_correlation(r));
        std::stringstream ss;
        write_matrix_csv(ss, r);
        const auto back = read_matrix_csv(ss);
        CHECK(back.isApprox(r, 1e-15));
        std::stringstream asym("1,0.5\n0.4,1\n");
        CHECK_THROWS(read_matrix_csv(asym));
        Eigen::Matrix2d diag;
        diag << 2, 0, 0, 1;
        CHECK_THROWS(validate_pseudo_correlation(diag));
    }
}
