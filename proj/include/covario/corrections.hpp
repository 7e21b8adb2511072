#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

#include "covario/covariogram.hpp"

namespace covario {

/// Symmetric, unit diagonal, entries in [−1, 1].
void validate_pseudo_correlation(const Eigen::MatrixXd& r);

/// Pseudo-correlation matrix from an arithmetic-lag covariogram: the
/// Toeplitz matrix scaled by value(0).
Eigen::MatrixXd correlation_toeplitz(const EmpiricalCovariogram& cov);

struct LinearShrinkResult {
    Eigen::MatrixXd matrix;
    double lambda = 1.0;
};

/// Largest λ ∈ [0, 1] with λR + (1 − λ)I positive semidefinite (bisection to 1e-10).
LinearShrinkResult linear_shrink(const Eigen::MatrixXd& r);

enum class ShrinkFunction { tanh, scaled_arctan };

ShrinkFunction parse_shrink_function(std::string_view name);

/// One application of the three-branch rule to a single entry:
/// f⁻¹(f(r) − Δ) for f(r) > Δ, f⁻¹(f(r) + Δ) for f(r) < −Δ, 0 otherwise.
double shrink_entry(double r, double delta, ShrinkFunction f);

struct NonlinearShrinkResult {
    Eigen::MatrixXd matrix;
    std::size_t iterations = 0;
};

/// Applies shrink_entry to every off-diagonal until the minimum eigenvalue is
/// ≥ −1e-12·p. Throws after 10⁴ iterations.
NonlinearShrinkResult nonlinear_shrink(const Eigen::MatrixXd& r, double delta = 0.05,
                                       ShrinkFunction f = ShrinkFunction::tanh);

enum class KernelName { circular, spherical, rational_quadratic, exponential, gaussian, wave };

KernelName parse_kernel_name(std::string_view name);
std::string_view to_string(KernelName name);

struct IsotropicKernel {
    KernelName name = KernelName::gaussian;
    double theta = 1.0;

    void validate() const;
    /// Highest dimension in which the kernel is positive definite (0 = all).
    int max_dimension() const;
    void check_dimension(int dim) const;
};

double kernel_eval(const IsotropicKernel& kernel, double tau);

/// Ĉ^{(a)}(τ) = a(τ)Ĉ(τ). `dim` is the dimension of the data.
EmpiricalCovariogram kernel_correct(const EmpiricalCovariogram& cov, const IsotropicKernel& kernel, int dim = 1);

/// Symmetric square matrix CSV (no header).
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

}  // namespace covario
