#include "covario/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "covario/nnls.hpp"

namespace covario {

std::string_view to_string(BasisFamily family) {
    switch (family) {
        case BasisFamily::bspline: return "bspline";
        case BasisFamily::bessel: return "bessel";
        case BasisFamily::bernstein: return "bernstein";
    }
    return "bspline";
}

BasisFamily parse_basis_family(std::string_view name) {
    if (name == "bspline") return BasisFamily::bspline;
    if (name == "bessel") return BasisFamily::bessel;
    if (name == "bernstein") return BasisFamily::bernstein;
    throw std::invalid_argument("unknown basis family '" + std::string(name) + "'");
}

void BasisConfig::validate() const {
    if (m < 1) throw std::invalid_argument("basis size m must be at least 1");
    if (family == BasisFamily::bspline && p < 1) throw std::invalid_argument("spline degree p must be at least 1");
    if (family == BasisFamily::bessel) {
        if (dimension < 1) throw std::invalid_argument("Bessel basis dimension must be at least 1");
        for (std::size_t k = 0; k < jumps.size(); ++k) {
            if (!(jumps[k] > 0.0)) throw std::invalid_argument("Bessel jump points must be positive");
            if (k > 0 && !(jumps[k] > jumps[k - 1])) throw std::invalid_argument("Bessel jump points must increase");
        }
    }
}

std::vector<double> bspline_knots(int m, int p) {
    if (m < 0 || p < 0) throw std::invalid_argument("invalid knot specification");
    std::vector<double> knots;
    for (int r = 0; r <= p; ++r) knots.push_back(0.0);
    for (int k = 1; k <= m; ++k) knots.push_back(static_cast<double>(k) / static_cast<double>(m + 1));
    for (int r = 0; r <= p; ++r) knots.push_back(1.0);
    return knots;
}

double bspline_eval(std::span<const double> knots, int degree, int i, double t) {
    const auto n_basis = static_cast<int>(knots.size()) - degree - 1;
    if (i < 0 || i >= n_basis) throw std::invalid_argument("B-spline index out of range");
    const auto u = static_cast<std::size_t>(i);
    const auto d = static_cast<std::size_t>(degree);
    // Cox–de Boor; the right end of the domain belongs to the last span
    std::vector<double> nval(d + 1);
    const double last = knots.back();
    for (std::size_t r = 0; r <= d; ++r) {
        const double a = knots[u + r];
        const double b = knots[u + r + 1];
        bool inside = (t >= a && t < b);
        if (t == last && b == last && a < b) inside = true;
        nval[r] = inside ? 1.0 : 0.0;
    }
    for (std::size_t k = 1; k <= d; ++k) {
        for (std::size_t r = 0; r + k <= d; ++r) {
            double v = 0.0;
            const double l0 = knots[u + r];
            const double l1 = knots[u + r + k];
            if (l1 > l0) v += (t - l0) / (l1 - l0) * nval[r];
            const double r0 = knots[u + r + 1];
            const double r1 = knots[u + r + k + 1];
            if (r1 > r0) v += (r1 - t) / (r1 - r0) * nval[r + 1];
            nval[r] = v;
        }
    }
    return nval[0];
}

double monotone_basis_eval(int j, int p, double x, int m) {
    if (m < 1 || p < 1) throw std::invalid_argument("invalid spline specification");
    if (j < 1 || j > m + p) throw std::invalid_argument("basis index outside 1..m+p");
    if (!(x >= 0.0)) throw std::invalid_argument("basis argument must be nonnegative");
    // the degree p−1 basis lives on the clamped knot vector of degree p−1
    const auto knots = bspline_knots(m, p - 1);
    const int i = j - 1;
    const double lo = knots[static_cast<std::size_t>(i)];
    const double hi = knots[static_cast<std::size_t>(i + p)];
    double total = 0.0;
    for (int s = i; s < i + p; ++s) {
        const double a = knots[static_cast<std::size_t>(s)];
        const double b = knots[static_cast<std::size_t>(s + 1)];
        if (!(b > a) || b <= lo || a >= hi) continue;
        auto f = [&](double t) {
            const double power = (x == 0.0) ? 1.0 : std::pow(t, x);
            return power * bspline_eval(knots, p - 1, i, std::clamp(t, a, std::nextafter(b, a)));
        };
        // geometric pieces walking down from b: each spans at most a factor
        // of 10 and moves x·ln t by at most 20. Stop once [0, c] is negligible.
        double d = b;
        while (d > a) {
            const double c = x == 0.0 ? a : std::max(a, d * std::max(0.1, std::exp(-20.0 / x)));
            total += boost::math::quadrature::gauss<double, 30>::integrate(f, c, d);
            if (x > 0.0 && (x + 1.0) * std::log(c / b) < -70.0) break;
            d = c;
        }
    }
    return static_cast<double>(m + 1) * total;
}

double bessel_basis_eval(int n, double k, double tau) {
    if (n < 1) throw std::invalid_argument("dimension must be at least 1");
    if (!(k > 0.0) || !(tau >= 0.0)) throw std::invalid_argument("Bessel basis needs k > 0 and τ ≥ 0");
    const double z = k * tau;
    const double nu = (static_cast<double>(n) - 2.0) / 2.0;
    if (z < 1e-5) return 1.0 - z * z / (2.0 * static_cast<double>(n));
    if (n == 1) return std::cos(z);
    if (n == 3) return std::sin(z) / z;
    return std::pow(2.0, nu) * std::tgamma(static_cast<double>(n) / 2.0) * boost::math::cyl_bessel_j(nu, z) /
           std::pow(z, nu);
}

std::vector<double> default_bessel_jumps(int n, int count, double tau_max) {
    if (n < 1 || count < 1 || !(tau_max > 0.0)) throw std::invalid_argument("invalid Bessel jump request");
    const double nu = (static_cast<double>(n) - 2.0) / 2.0;
    std::vector<double> out;
    for (int r = 1; r <= count; ++r) {
        double root = 0.0;
        if (n == 1) {
            root = (static_cast<double>(r) - 0.5) * std::numbers::pi;  // zeros of J_{−1/2} ∝ cos
        } else {
            root = boost::math::cyl_bessel_j_zero(nu, r);
        }
        out.push_back(root / tau_max);
    }
    return out;
}

double bernstein_basis_eval(int i, int m, double tau) {
    if (i < 1 || i > m) throw std::invalid_argument("Bernstein index outside 1..m");
    double v = 1.0;
    for (int j = i; j <= m; ++j) v /= 1.0 + tau * tau / static_cast<double>(j);
    return v;
}

std::size_t FittedCovariogram::basis_size() const {
    switch (config.family) {
        case BasisFamily::bspline: return static_cast<std::size_t>(config.m + config.p);
        case BasisFamily::bessel: return config.jumps.size();
        case BasisFamily::bernstein: return static_cast<std::size_t>(config.m);
    }
    return 0;
}

double FittedCovariogram::basis(std::size_t j, double tau) const {
    switch (config.family) {
        case BasisFamily::bspline:
            return monotone_basis_eval(static_cast<int>(j) + 1, config.p, tau * tau, config.m);
        case BasisFamily::bessel: return bessel_basis_eval(config.dimension, config.jumps[j], tau);
        case BasisFamily::bernstein: return bernstein_basis_eval(static_cast<int>(j) + 1, config.m, tau);
    }
    return 0.0;
}

double FittedCovariogram::operator()(double tau) const {
    double v = 0.0;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        if (coefficients[j] != 0.0) v += coefficients[j] * basis(j, tau);
    }
    return v;
}

EmpiricalCovariogram FittedCovariogram::tabulate(std::span<const double> lags) const {
    return covario::tabulate([this](double t) { return (*this)(t); }, lags);
}

namespace {

BasisConfig resolved(const BasisConfig& config, std::span<const double> lags) {
    config.validate();
    BasisConfig out = config;
    if (out.family == BasisFamily::bessel && out.jumps.empty()) {
        double tau_max = 0.0;
        for (double t : lags) tau_max = std::max(tau_max, t);
        if (!(tau_max > 0.0)) throw std::invalid_argument("cannot place default Bessel jumps without positive lags");
        out.jumps = default_bessel_jumps(out.dimension, out.m, tau_max);
    }
    return out;
}

FittedCovariogram fit_family(const EmpiricalCovariogram& emp, const BasisConfig& config, BasisFamily family) {
    if (config.family != family) throw std::invalid_argument("basis configuration names another family");
    emp.validate();
    if (emp.size() < 2) throw std::invalid_argument("fit needs at least two lags");
    FittedCovariogram fit;
    fit.config = resolved(config, emp.lags);
    const Eigen::MatrixXd design = basis_design(fit.config, emp.lags);
    const auto w = fit_weights(emp, fit.config);
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(emp.values.data(), static_cast<Eigen::Index>(emp.size()));
    const auto solution = nnls_solve(design, target, Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
    fit.coefficients.assign(solution.x.data(), solution.x.data() + solution.x.size());
    fit.rank_deficient = solution.rank_deficient;
    return fit;
}

}  // namespace

Eigen::MatrixXd basis_design(const BasisConfig& config, std::span<const double> lags) {
    FittedCovariogram probe;
    probe.config = resolved(config, lags);
    const std::size_t cols = probe.basis_size();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(lags.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < lags.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = probe.basis(j, lags[i]);
        }
    }
    return design;
}

std::vector<double> fit_weights(const EmpiricalCovariogram& emp, const BasisConfig& config) {
    std::vector<double> w(emp.size(), 1.0);
    switch (config.weights_mode) {
        case WeightsMode::uniform: break;
        case WeightsMode::custom:
            if (config.custom_weights.size() != emp.size()) throw std::invalid_argument("custom weights must match the lags");
            w = config.custom_weights;
            break;
        case WeightsMode::choi:
            for (std::size_t i = 0; i < emp.size(); ++i) {
                const double gap = 1.0 - emp.values[i];
                w[i] = static_cast<double>(emp.counts[i]) / std::max(gap * gap, 1e-6);
            }
            break;
    }
    bool any = false;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("fit weights must be finite and nonnegative");
        any = any || v > 0.0;
    }
    if (!any) throw std::invalid_argument("all fit weights are zero");
    return w;
}

FittedCovariogram fit_bspline_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config) {
    return fit_family(emp, config, BasisFamily::bspline);
}

FittedCovariogram fit_bessel_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config) {
    return fit_family(emp, config, BasisFamily::bessel);
}

FittedCovariogram fit_bernstein_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config) {
    return fit_family(emp, config, BasisFamily::bernstein);
}

FittedCovariogram fit_basis_covariogram(const EmpiricalCovariogram& emp, const BasisConfig& config) {
    return fit_family(emp, config, config.family);
}

}  // namespace covario
