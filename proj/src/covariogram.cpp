#include "covario/covariogram.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace covario {

std::string_view to_string(CovariogramKind kind) {
    switch (kind) {
        case CovariogramKind::covariance: return "covariance";
        case CovariogramKind::semivariogram: return "semivariogram";
        case CovariogramKind::correlation: return "correlation";
    }
    return "covariance";
}

CovariogramKind parse_kind(std::string_view text) {
    if (text == "covariance") return CovariogramKind::covariance;
    if (text == "semivariogram") return CovariogramKind::semivariogram;
    if (text == "correlation") return CovariogramKind::correlation;
    throw std::invalid_argument("unknown covariogram kind '" + std::string(text) + "'");
}

void EmpiricalCovariogram::validate() const {
    if (lags.empty()) throw std::invalid_argument("covariogram has no lags");
    if (values.size() != lags.size() || counts.size() != lags.size()) {
        throw std::invalid_argument("covariogram columns differ in length");
    }
    if (lags.front() != 0.0) throw std::invalid_argument("covariogram must start at lag 0");
    for (std::size_t k = 1; k < lags.size(); ++k) {
        if (!(lags[k] > lags[k - 1])) throw std::invalid_argument("covariogram lags must be strictly increasing");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("covariogram value is not finite");
    }
    if (kind == CovariogramKind::correlation && std::abs(values.front() - 1.0) > 1e-12) {
        throw std::invalid_argument("correlation must equal 1 at lag 0");
    }
}

double arithmetic_step(std::span<const double> lags) {
    if (lags.empty() || lags.front() != 0.0) throw std::invalid_argument("lags must start at 0");
    if (lags.size() == 1) return 0.0;
    const double step = lags[1];
    if (!(step > 0.0)) throw std::invalid_argument("lags must be increasing");
    for (std::size_t k = 2; k < lags.size(); ++k) {
        if (std::abs(lags[k] - step * static_cast<double>(k)) > 1e-9 * std::max(1.0, lags[k])) {
            throw std::invalid_argument("lags are not an arithmetic progression from 0");
        }
    }
    return step;
}

bool is_arithmetic(std::span<const double> lags) {
    try {
        arithmetic_step(lags);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

Eigen::MatrixXd toeplitz(std::span<const double> values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) t(a, b) = values[static_cast<std::size_t>(std::abs(a - b))];
    }
    return t;
}

double min_toeplitz_eigenvalue(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("empty covariogram");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(toeplitz(values), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

EmpiricalCovariogram tabulate(const std::function<double(double)>& fn, std::span<const double> lags) {
    EmpiricalCovariogram out;
    out.lags.assign(lags.begin(), lags.end());
    out.values.reserve(lags.size());
    for (double t : lags) out.values.push_back(fn(t));
    out.counts.assign(lags.size(), 0);
    return out;
}

void write_covariogram_csv(std::ostream& out, const EmpiricalCovariogram& cov) {
    out << "lag,value,count,kind\n";
    char buf[128];
    for (std::size_t k = 0; k < cov.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,", cov.lags[k], cov.values[k]);
        out << buf << cov.counts[k] << ',' << to_string(cov.kind) << '\n';
    }
}

EmpiricalCovariogram read_covariogram_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("covariogram CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "lag,value,count,kind") throw std::runtime_error("covariogram CSV header must be 'lag,value,count,kind'");
    EmpiricalCovariogram cov;
    bool first = true;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string lag, value, count, kind;
        if (!std::getline(ss, lag, ',') || !std::getline(ss, value, ',') || !std::getline(ss, count, ',') ||
            !std::getline(ss, kind)) {
            throw std::runtime_error("malformed covariogram row " + std::to_string(row));
        }
        try {
            cov.lags.push_back(std::stod(lag));
            cov.values.push_back(std::stod(value));
            cov.counts.push_back(static_cast<std::size_t>(std::stoull(count)));
        } catch (const std::exception&) {
            throw std::runtime_error("malformed number in covariogram row " + std::to_string(row));
        }
        const auto k = parse_kind(kind);
        if (first) {
            cov.kind = k;
            first = false;
        } else if (k != cov.kind) {
            throw std::runtime_error("mixed covariogram kinds in one file");
        }
    }
    if (cov.lags.size() >= 2) {
        // bins are contiguous unless told otherwise
        cov.half_width = (cov.lags[1] - cov.lags[0]) / 2.0;
    }
    cov.validate();
    return cov;
}

}  // namespace covario
