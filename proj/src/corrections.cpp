#include "covario/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace covario {

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// map into the unbounded argument space of f and back
double to_argument(double r, ShrinkFunction f) {
    constexpr double edge = 1.0 - 1e-15;
    r = std::clamp(r, -edge, edge);
    switch (f) {
        case ShrinkFunction::tanh: return std::atanh(r);
        case ShrinkFunction::scaled_arctan: return std::tan(std::numbers::pi * r / 2.0);
    }
    return r;
}

double from_argument(double x, ShrinkFunction f) {
    switch (f) {
        case ShrinkFunction::tanh: return std::tanh(x);
        case ShrinkFunction::scaled_arctan: return 2.0 / std::numbers::pi * std::atan(x);
    }
    return x;
}

}  // namespace

void validate_pseudo_correlation(const Eigen::MatrixXd& r) {
    if (r.rows() != r.cols() || r.rows() == 0) throw std::invalid_argument("pseudo-correlation matrix must be square");
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        if (std::abs(r(i, i) - 1.0) > 1e-12) throw std::invalid_argument("pseudo-correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            if (!std::isfinite(r(i, j)) || std::abs(r(i, j)) > 1.0 + 1e-12) {
                throw std::invalid_argument("pseudo-correlation entries must lie in [-1, 1]");
            }
            if (std::abs(r(i, j) - r(j, i)) > 1e-12) throw std::invalid_argument("pseudo-correlation matrix must be symmetric");
        }
    }
}

Eigen::MatrixXd correlation_toeplitz(const EmpiricalCovariogram& cov) {
    cov.validate();
    arithmetic_step(cov.lags);
    if (!(cov.at_zero() > 0.0)) throw std::invalid_argument("covariogram value at lag 0 must be positive");
    Eigen::MatrixXd r = toeplitz(cov.values) / cov.at_zero();
    return r.cwiseMax(-1.0).cwiseMin(1.0);
}

LinearShrinkResult linear_shrink(const Eigen::MatrixXd& r) {
    validate_pseudo_correlation(r);
    const Eigen::Index p = r.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
    const double floor = -1e-12 * static_cast<double>(p);
    LinearShrinkResult out;
    if (min_eigenvalue(r) >= floor) {
        out.matrix = r;
        out.lambda = 1.0;
        return out;
    }
    // min eig of λR + (1 − λ)I is 1 − λ(1 − μ_min): decreasing in λ
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (min_eigenvalue(mid * r + (1.0 - mid) * id) >= floor) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.lambda = lo;
    out.matrix = lo * r + (1.0 - lo) * id;
    return out;
}

ShrinkFunction parse_shrink_function(std::string_view name) {
    if (name == "tanh") return ShrinkFunction::tanh;
    if (name == "scaled_arctan" || name == "arctan") return ShrinkFunction::scaled_arctan;
    throw std::invalid_argument("unknown shrink function '" + std::string(name) + "'");
}

double shrink_entry(double r, double delta, ShrinkFunction f) {
    if (!(delta > 0.0)) throw std::invalid_argument("shrink delta must be positive");
    const double threshold = from_argument(delta, f);
    if (std::abs(r) <= threshold) return 0.0;
    const double x = to_argument(r, f);
    return from_argument(r > 0.0 ? x - delta : x + delta, f);
}

NonlinearShrinkResult nonlinear_shrink(const Eigen::MatrixXd& r, double delta, ShrinkFunction f) {
    validate_pseudo_correlation(r);
    if (!(delta > 0.0)) throw std::invalid_argument("shrink delta must be positive");
    const Eigen::Index p = r.rows();
    const double floor = -1e-12 * static_cast<double>(p);
    NonlinearShrinkResult out;
    out.matrix = r;
    while (min_eigenvalue(out.matrix) < floor) {
        if (++out.iterations > 10000) throw std::runtime_error("nonlinear shrinking did not reach a PD matrix in 10^4 iterations");
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = i + 1; j < p; ++j) {
                const double v = shrink_entry(out.matrix(i, j), delta, f);
                out.matrix(i, j) = v;
                out.matrix(j, i) = v;
            }
        }
    }
    return out;
}

KernelName parse_kernel_name(std::string_view name) {
    if (name == "circular") return KernelName::circular;
    if (name == "spherical") return KernelName::spherical;
    if (name == "rational_quadratic") return KernelName::rational_quadratic;
    if (name == "exponential") return KernelName::exponential;
    if (name == "gaussian") return KernelName::gaussian;
    if (name == "wave") return KernelName::wave;
    throw std::invalid_argument("unknown correction kernel '" + std::string(name) + "'");
}

std::string_view to_string(KernelName name) {
    switch (name) {
        case KernelName::circular: return "circular";
        case KernelName::spherical: return "spherical";
        case KernelName::rational_quadratic: return "rational_quadratic";
        case KernelName::exponential: return "exponential";
        case KernelName::gaussian: return "gaussian";
        case KernelName::wave: return "wave";
    }
    return "gaussian";
}

void IsotropicKernel::validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("kernel theta must be positive");
}

int IsotropicKernel::max_dimension() const {
    switch (name) {
        case KernelName::circular: return 2;
        case KernelName::spherical:
        case KernelName::wave: return 3;
        default: return 0;
    }
}

void IsotropicKernel::check_dimension(int dim) const {
    const int limit = max_dimension();
    if (limit != 0 && dim > limit) {
        throw std::invalid_argument("kernel '" + std::string(to_string(name)) + "' is not positive definite in dimension " +
                                    std::to_string(dim));
    }
}

double kernel_eval(const IsotropicKernel& kernel, double tau) {
    kernel.validate();
    if (!(tau >= 0.0)) throw std::invalid_argument("kernel argument must be nonnegative");
    const double th = kernel.theta;
    const double u = tau / th;
    switch (kernel.name) {
        case KernelName::circular:
            if (u >= 1.0) return 0.0;
            return 2.0 / std::numbers::pi * (std::acos(u) - u * std::sqrt(1.0 - u * u));
        case KernelName::spherical:
            if (u >= 1.0) return 0.0;
            return 1.0 - 1.5 * u + 0.5 * u * u * u;
        case KernelName::rational_quadratic: return 1.0 - tau * tau / (tau * tau + th);
        case KernelName::exponential: return std::exp(-u);
        case KernelName::gaussian: return std::exp(-tau * tau / th);
        case KernelName::wave:
            if (u < 1e-8) return 1.0 - u * u / 6.0;
            return std::sin(u) / u;
    }
    return 0.0;
}

EmpiricalCovariogram kernel_correct(const EmpiricalCovariogram& cov, const IsotropicKernel& kernel, int dim) {
    cov.validate();
    kernel.validate();
    kernel.check_dimension(dim);
    EmpiricalCovariogram out = cov;
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] *= kernel_eval(kernel, out.lags[k]);
    return out;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw std::invalid_argument("matrix CSV: bad number '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    const auto p = static_cast<Eigen::Index>(rows.size());
    if (p == 0) throw std::invalid_argument("matrix CSV is empty");
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != p) {
            throw std::invalid_argument("matrix CSV must be square");
        }
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, std::abs(m(i, j)))) {
                throw std::invalid_argument("matrix CSV is not symmetric");
            }
        }
    }
    return m;
}

}  // namespace covario
