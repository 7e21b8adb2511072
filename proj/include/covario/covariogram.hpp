#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace covario {

enum class CovariogramKind { covariance, semivariogram, correlation };

std::string_view to_string(CovariogramKind kind);
CovariogramKind parse_kind(std::string_view text);

/// Whether estimators center the data with the sample mean or treat it as
/// already zero-mean.
enum class Centering { sample_mean, none };

/// Estimated values on increasing lags starting at 0, with the number of
/// ordered pairs behind each value.
struct EmpiricalCovariogram {
    std::vector<double> lags;
    std::vector<double> values;
    std::vector<std::size_t> counts;
    CovariogramKind kind = CovariogramKind::covariance;
    /// Half-width of the distance bins the estimate came from (0 if unknown).
    double half_width = 0.0;

    std::size_t size() const noexcept { return lags.size(); }
    void validate() const;
    double at_zero() const { return values.front(); }
};

/// Common spacing of an arithmetic lag sequence 0, s, 2s, ...; throws otherwise.
double arithmetic_step(std::span<const double> lags);
bool is_arithmetic(std::span<const double> lags);

/// Symmetric Toeplitz matrix T[a,b] = values[|a-b|].
Eigen::MatrixXd toeplitz(std::span<const double> values);
double min_toeplitz_eigenvalue(std::span<const double> values);

/// Evaluates fn on the given lags (kind = covariance, zero counts).
EmpiricalCovariogram tabulate(const std::function<double(double)>& fn, std::span<const double> lags);

void write_covariogram_csv(std::ostream& out, const EmpiricalCovariogram& cov);
EmpiricalCovariogram read_covariogram_csv(std::istream& in);

}  // namespace covario
