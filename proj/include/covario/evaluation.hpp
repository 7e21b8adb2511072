#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "covario/covariogram.hpp"
#include "covario/simulation.hpp"
#include "covario/spatial.hpp"
#include "covario/tapered.hpp"

namespace covario {

using CovarianceFunction = std::function<double(double)>;

/// Covariance at arbitrary distance from an empirical estimate: the mean of
/// estimates whose lag lies within the bin half-width of the distance,
/// otherwise linear interpolation between neighbouring lags. Beyond the last
/// lag the last value is held.
class CovariogramLookup {
public:
    explicit CovariogramLookup(EmpiricalCovariogram est);
    double operator()(double distance) const;

private:
    EmpiricalCovariogram est_;
};

/// Linear interpolation of est (no neighbourhood averaging).
double interpolate(const EmpiricalCovariogram& est, double tau);

/// Union of est lags in [0, τ0] with ten equal subdivisions of each interval.
std::vector<double> evaluation_grid(const EmpiricalCovariogram& est, double tau0);

/// ∫_0^{τ0} |C − Ĉ| by the trapezoid rule on evaluation_grid.
double area_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est, double tau0);

/// max |C − Ĉ| on evaluation_grid.
double distance_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est, double tau0);

/// Largest singular value of the Toeplitz matrix of D(τ) = C(τ) − Ĉ(τ) over
/// the est lags up to τ0 (which must be arithmetic from 0).
double spectral_norm_metric(const CovarianceFunction& truth, const EmpiricalCovariogram& est,
                            double tau0 = std::numeric_limits<double>::infinity());

struct KrigingSystem {
    Eigen::MatrixXd gamma;  // (M+1)×(M+1), bordered by ones
    Eigen::VectorXd rhs;    // (C(d_1), ..., C(d_M), 1)
    std::vector<std::size_t> neighbors;
};

/// Indices of the M nearest data locations to `target`, nearest first, ties by index.
std::vector<std::size_t> nearest_neighbors(const SpatialSample& data, const Coord& target, std::size_t M);

KrigingSystem kriging_system(const CovarianceFunction& cov, const SpatialSample& data, const Coord& target,
                             std::size_t M);

/// Moore–Penrose inverse; eigenvalues below 1e-10 × the largest magnitude are dropped.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric);

/// Ordinary kriging predictions with the bordered system and pseudo-inverse.
std::vector<double> krige(const CovarianceFunction& cov, const SpatialSample& data, std::span<const Coord> targets,
                          std::size_t M);
std::vector<double> krige_empirical(const EmpiricalCovariogram& est, const SpatialSample& data,
                                    std::span<const Coord> targets, std::size_t M);

double mean_squared_error(std::span<const double> truth, std::span<const double> predicted);

double mspe_metric(const EmpiricalCovariogram& est, const SpatialSample& data, std::span<const double> truth_values,
                   std::span<const Coord> targets, std::size_t M = 512);

/// Single-parameter least squares fit of the family to est (σ, ν or γ):
/// 16 starts on a fixed grid, then Brent refinement around the best start.
double fit_model_nls(const EmpiricalCovariogram& est, ModelFamily family, int dim = 2);

double mspe_gstat_metric(const EmpiricalCovariogram& est, const SpatialSample& data,
                         std::span<const double> truth_values, std::span<const Coord> targets, ModelFamily family,
                         int dim = 2, std::size_t M = 512);

/// `count` distinct lattice nodes drawn uniformly from those outside the
/// closed inner box (the frame minus the estimation subregion).
std::vector<std::size_t> sample_target_nodes(const LatticeSample& frame, const Coord& inner_lo, const Coord& inner_hi,
                                             std::size_t count, std::uint64_t seed);

inline constexpr std::array<std::string_view, 5> kMetricNames{"area", "distance", "sn", "mspe", "mspe_gstat"};

/// Metric values for one estimator on one realisation; NaN marks a failed metric.
struct MetricReport {
    std::string estimator;
    std::size_t realisation = 0;
    std::array<double, 5> metrics{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN()};
    std::string error;
};

/// Estimator × metric summary table.
struct MetricTable {
    std::vector<std::string> estimators;
    std::vector<std::array<double, 5>> values;  // per estimator
};

/// Ranks within each realisation and metric (1 = smallest, ties share the
/// average rank, failed values rank after all finite ones), averaged over
/// realisations. Estimators keep their first-appearance order.
MetricTable rank_table(std::span<const MetricReport> reports);

/// Mean of finite metric values over realisations.
MetricTable average_table(std::span<const MetricReport> reports);

/// Average (fractional) ranks of a value list; NaN ranks last.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace covario
