#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "covario/covariogram.hpp"

namespace covario {

enum class BasisFamily { bspline, bessel, bernstein };
enum class WeightsMode { choi, uniform, custom };

std::string_view to_string(BasisFamily family);
BasisFamily parse_basis_family(std::string_view name);

struct BasisConfig {
    BasisFamily family = BasisFamily::bspline;
    int m = 2;               // interior knots (bspline), jump count (bessel), terms (bernstein)
    int p = 3;               // spline degree (bspline)
    int dimension = 2;       // n of Λ_n (bessel)
    std::vector<double> jumps;  // bessel jump points; empty selects the default
    WeightsMode weights_mode = WeightsMode::choi;
    std::vector<double> custom_weights;

    void validate() const;
};

/// Clamped knot vector for degree p with m interior knots k/(m+1).
std::vector<double> bspline_knots(int m, int p);

/// Value at t of the i-th (0-based) B-spline of the given degree on `knots`.
double bspline_eval(std::span<const double> knots, int degree, int i, double t);

/// f_j^{(p−1)}(x) = (m+1) ∫_0^1 t^x B_{j+1}^{(p−1)}(t) dt, j = 1..m+p, where
/// B^{(p−1)} are the degree p−1 B-splines obtained by differentiating the
/// degree-p spline basis.
double monotone_basis_eval(int j, int p, double x, int m);

/// Λ_n(kτ) = 2^{(n−2)/2} Γ(n/2) J_{(n−2)/2}(kτ)/(kτ)^{(n−2)/2}, Λ_n(0) = 1.
double bessel_basis_eval(int n, double k, double tau);

/// First `count` positive zeros of J_{(n−2)/2} divided by tau_max.
std::vector<double> default_bessel_jumps(int n, int count, double tau_max);

/// A_{i,m}(τ) = Π_{j=i}^m (1 + τ²/j)⁻¹.
double bernstein_basis_eval(int i, int m, double tau);

/// Nonnegative combination of basis functions.
struct FittedCovariogram {
    BasisConfig config;
    std::vector<double> coefficients;
    bool rank_deficient = false;

    std::size_t basis_size() const;
    double basis(std::size_t j, double tau) const;
    double operator()(double tau) const;
    EmpiricalCovariogram tabulate(std::span<const double> lags) const;
};

/// Basis matrix with rows per lag and columns per basis function.
Eigen::MatrixXd basis_design(const BasisConfig& config, std::span<const double> lags);

/// Per-lag weights for the chosen mode; choi uses |N(τ)|/max((1 − Ĉ(τ))², 1e-6).
std::vector<double> fit_weights(const EmpiricalCovariogram& emp, const BasisConfig& config);

FittedCovariogram fit_bspline_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config);
FittedCovariogram fit_bessel_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config);
FittedCovariogram fit_bernstein_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config);
/// Dispatches on config.family.
FittedCovariogram fit_basis_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config);

}  // namespace covario
