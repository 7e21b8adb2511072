#include "covario/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "covario/basis.hpp"
#include "covario/classical.hpp"
#include "covario/robust.hpp"
#include "covario/tapered.hpp"

namespace covario {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t realisation_seed(std::uint64_t seed, std::size_t r) { return splitmix(seed ^ splitmix(r + 1)); }

bool known_estimator(std::string_view id) {
    return std::find(std::begin(kStudyEstimators), std::end(kStudyEstimators), id) != std::end(kStudyEstimators);
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate();
    grid.validate();
    if (model.dim != grid.dim) throw std::invalid_argument("model and grid dimensions differ");
    if (realisations < 1) throw std::invalid_argument("realisations must be at least 1");
    if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
    if (estimators.empty()) throw std::invalid_argument("no estimators configured");
    for (const auto& e : estimators) {
        if (!known_estimator(e)) throw std::invalid_argument("unknown estimator '" + e + "'");
    }
    double reach = 0.0;
    for (int k = 0; k < grid.dim; ++k) {
        if (sub_lo[k] < grid.lo[k] || sub_hi[k] > grid.hi[k] || !(sub_hi[k] > sub_lo[k])) {
            throw std::invalid_argument("subregion must lie inside the grid");
        }
        reach += (sub_hi[k] - sub_lo[k]) * (sub_hi[k] - sub_lo[k]);
    }
    if (tau0 > std::sqrt(reach)) throw std::invalid_argument("tau0 exceeds the subregion diameter");
    correction.validate();
    correction.check_dimension(grid.dim);
    if (hall_bandwidth < 0.0) throw std::invalid_argument("bandwidth must be nonnegative");
    if (truncation) truncation->validate();
    TaperConfig{taper_rho, TaperWindow::tukey}.validate();
    if (spline_m < 1 || spline_p < 1) throw std::invalid_argument("spline m and p must be positive");
    if (compute_mspe && (targets < 1 || neighbors < 1)) throw std::invalid_argument("MSPE needs targets and neighbors");
    if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

ExperimentConfig default_study_config(ModelFamily family) {
    ExperimentConfig c;
    c.neighbors = 64;
    switch (family) {
        case ModelFamily::gaussian:
            c.model = {ModelFamily::gaussian, 1.0, 2};
            c.correction = {KernelName::gaussian, (c.tau0 / 2.0) * (c.tau0 / 2.0)};
            c.truncation = TruncationConfig{1.5, 2.0};
            break;
        case ModelFamily::bessel:
            c.model = {ModelFamily::bessel, 0.0, 2};
            c.correction = {KernelName::wave, c.tau0 / std::numbers::pi};
            c.truncation.reset();
            break;
        case ModelFamily::cauchy:
            c.model = {ModelFamily::cauchy, 0.2, 2};
            c.correction = {KernelName::rational_quadratic, (c.tau0 / 2.0) * (c.tau0 / 2.0)};
            c.truncation.reset();
            break;
    }
    return c;
}

RealisationEstimates estimate_all(const ExperimentConfig& config, const LatticeSample& subregion) {
    const SpatialSample sample = subregion.to_sample();
    const double tau1 = mean_nearest_neighbour_distance(sample);
    const auto K = static_cast<std::size_t>(std::ceil(config.tau0 / tau1 - 1e-9));
    const LagBinning bins = build_lag_bins(sample, K);
    std::vector<double> lags{0.0};
    for (double c : bins.centers) lags.push_back(c);
    const PairIndex index(sample);

    std::map<std::string, EmpiricalCovariogram, std::less<>> cache;
    auto get = [&](std::string_view id, auto&& self) -> const EmpiricalCovariogram& {
        if (auto it = cache.find(id); it != cache.end()) return it->second;
        EmpiricalCovariogram est;
        if (id == "cstar") {
            est = classical_covariogram(sample, index, bins, config.centering);
        } else if (id == "cstarstar") {
            est = constant_denominator_covariogram(sample, index, bins, config.centering);
        } else if (id == "ca") {
            est = kernel_correct(self("cstarstar", self), config.correction, sample.dim());
        } else if (id == "hall") {
            KernelRegressionConfig kr{config.hall_kernel,
                                      config.hall_bandwidth > 0.0 ? config.hall_bandwidth : default_bandwidth(sample)};
            const KernelCovariogram kernel(sample, index, kr, config.centering);
            std::optional<TruncationConfig> trunc = config.truncation;
            if (trunc && trunc->t2 > kernel.max_distance()) trunc.reset();  // beyond the data range
            est = hall_truncated_estimator(kernel, lags, trunc);
        } else if (id == "qn") {
            est = qn_spatial_covariogram(sample, index, bins);
        } else if (id == "tapered") {
            const double unit = subregion.step[0];
            const auto vec_lags = lattice_lags_within(subregion.dims, (bins.centers.back() + bins.half_width) / unit);
            const auto cov = dahlhaus_covariogram(subregion, vec_lags, {config.taper_rho, TaperWindow::tukey},
                                                  config.centering);
            est = binned_profile(cov, bins, unit);
        } else if (id == "bspline") {
            BasisConfig bc;
            bc.family = BasisFamily::bspline;
            bc.m = config.spline_m;
            bc.p = config.spline_p;
            bc.weights_mode = WeightsMode::choi;
            est = fit_bspline_covariogram(self("cstar", self), bc).tabulate(lags);
            est.half_width = bins.half_width;
        } else {
            throw std::invalid_argument("unknown estimator '" + std::string(id) + "'");
        }
        return cache.emplace(std::string(id), std::move(est)).first->second;
    };

    RealisationEstimates out;
    for (const auto& id : config.estimators) {
        out.estimators.push_back(id);
        try {
            out.estimates.emplace_back(get(id, get));
            out.errors.emplace_back();
        } catch (const std::exception& e) {
            out.estimates.emplace_back(std::nullopt);
            out.errors.emplace_back(e.what());
        }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const FieldSimulator simulator(config.model, config.grid);
    const CovarianceModel model = config.model;
    const auto truth = [model](double t) { return model_eval(model, t); };
    const std::size_t R = config.realisations;
    const std::size_t E = config.estimators.size();

    std::vector<std::vector<MetricReport>> reports(R);
    std::vector<std::vector<std::optional<EmpiricalCovariogram>>> kept(R);

    auto work = [&](std::size_t r) {
        const auto seed = realisation_seed(config.seed, r);
        const LatticeSample full = simulator(seed);
        const LatticeSample sub = subgrid_extract(full, config.sub_lo, config.sub_hi);
        const SpatialSample data = sub.to_sample();
        const auto estimates = estimate_all(config, sub);

        std::vector<Coord> targets;
        std::vector<double> truth_values;
        if (config.compute_mspe) {
            for (auto node : sample_target_nodes(full, config.sub_lo, config.sub_hi, config.targets, seed)) {
                targets.push_back(full.location(node));
                truth_values.push_back(full.values[node]);
            }
        }
        for (std::size_t e = 0; e < E; ++e) {
            MetricReport rep;
            rep.estimator = estimates.estimators[e];
            rep.realisation = r;
            rep.error = estimates.errors[e];
            const auto& est = estimates.estimates[e];
            if (est) {
                auto attempt = [&](std::size_t m, auto&& fn) {
                    try {
                        rep.metrics[m] = fn();
                    } catch (const std::exception& ex) {
                        if (!rep.error.empty()) rep.error += "; ";
                        rep.error += std::string(kMetricNames[m]) + ": " + ex.what();
                    }
                };
                attempt(0, [&] { return area_metric(truth, *est, config.tau0); });
                attempt(1, [&] { return distance_metric(truth, *est, config.tau0); });
                attempt(2, [&] { return spectral_norm_metric(truth, *est, config.tau0); });
                if (config.compute_mspe) {
                    attempt(3, [&] { return mspe_metric(*est, data, truth_values, targets, config.neighbors); });
                    attempt(4, [&] {
                        return mspe_gstat_metric(*est, data, truth_values, targets, model.family, model.dim,
                                                 config.neighbors);
                    });
                }
            }
            reports[r].push_back(std::move(rep));
        }
        kept[r] = estimates.estimates;
    };

    std::vector<std::exception_ptr> failures(R);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < R; r = next++) {
            try {
                work(r);
            } catch (...) {
                failures[r] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(config.jobs, R);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentResult result;
    result.embedding = simulator.info();
    for (std::size_t r = 0; r < R; ++r) {
        if (failures[r]) {
            // the realisation itself failed: every estimator gets an error row
            std::string what = "realisation failed";
            try {
                std::rethrow_exception(failures[r]);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            for (const auto& id : config.estimators) {
                MetricReport rep;
                rep.estimator = id;
                rep.realisation = r;
                rep.error = what;
                result.reports.push_back(rep);
            }
            continue;
        }
        for (auto& rep : reports[r]) result.reports.push_back(std::move(rep));
    }
    result.averages = average_table(result.reports);
    result.ranks = rank_table(result.reports);

    // envelopes on the bin-centre grid
    const double step = config.grid.step;
    const auto K = static_cast<std::size_t>(std::ceil(config.tau0 / step - 1e-9));
    std::vector<double> lags;
    for (std::size_t k = 0; k <= K; ++k) lags.push_back(step * static_cast<double>(k));
    for (std::size_t e = 0; e < E; ++e) {
        Envelope env;
        env.estimator = config.estimators[e];
        env.lags = lags;
        env.lo.assign(lags.size(), std::numeric_limits<double>::infinity());
        env.hi.assign(lags.size(), -std::numeric_limits<double>::infinity());
        env.mean.assign(lags.size(), 0.0);
        std::size_t used = 0;
        for (std::size_t r = 0; r < R; ++r) {
            if (failures[r] || !kept[r][e]) continue;
            ++used;
            for (std::size_t k = 0; k < lags.size(); ++k) {
                const double v = interpolate(*kept[r][e], lags[k]);
                env.lo[k] = std::min(env.lo[k], v);
                env.hi[k] = std::max(env.hi[k], v);
                env.mean[k] += v;
            }
        }
        if (used == 0) continue;
        for (auto& v : env.mean) v /= static_cast<double>(used);
        result.envelopes.push_back(std::move(env));
    }
    return result;
}

}  // namespace covario
