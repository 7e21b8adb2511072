#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace covario {

struct NnlsResult {
    Eigen::VectorXd x;
    /// The weighted design (or the final passive-set subproblem) is rank
    /// deficient. x is then the unconstrained minimum-norm solution when that
    /// is nonnegative and optimal, else the minimum-norm passive-set solution.
    bool rank_deficient = false;
    std::size_t iterations = 0;
};

/// argmin_{x ≥ 0} Σ_i w_i (b − A x)_i² by the Lawson–Hanson active-set method.
/// Among equal gradients the lowest index enters the passive set first.
/// Weights must be nonnegative; zero-weight rows are ignored.
NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, const Eigen::VectorXd& weights);
NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);

}  // namespace covario
