#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "covario/basis.hpp"
#include "covario/classical.hpp"
#include "covario/corrections.hpp"
#include "covario/evaluation.hpp"
#include "covario/experiment.hpp"
#include "covario/io.hpp"
#include "covario/kernel.hpp"
#include "covario/robust.hpp"
#include "covario/simulation.hpp"
#include "covario/tapered.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace covario;

namespace {

// Bad flags, configs or file contents that the user has to fix.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        std::cout.flush();
    } else {
        atomic_write(path, writer);
    }
}

Centering parse_centering(const std::string& s) {
    if (s == "mean") return Centering::sample_mean;
    if (s == "none") return Centering::none;
    throw UsageError("centering must be 'mean' or 'none'");
}

Coord to_coord(const std::vector<double>& v, const char* what) {
    if (v.empty() || v.size() > 3) throw UsageError(std::string(what) + " needs 1 to 3 coordinates");
    Coord c{};
    std::copy(v.begin(), v.end(), c.begin());
    return c;
}

// ---- configuration ----

struct Overrides {
    std::optional<std::string> model;
    std::optional<double> parameter;
    std::vector<double> lo, hi, sub_lo, sub_hi;
    std::optional<double> step;
    std::optional<double> tau0;
    std::optional<std::size_t> realisations;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::size_t> neighbors;
    std::optional<std::size_t> targets;
    std::vector<std::string> estimators;
    bool no_mspe = false;
    std::string output_dir;
};

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
            throw UsageError("unknown config field '" + where + key + "'");
        }
    }
}

struct LoadedConfig {
    ExperimentConfig experiment;
    std::string output_dir;
};

LoadedConfig build_config(const std::string& path, const Overrides& o) {
    json j = json::object();
    if (!path.empty()) {
        try {
            j = json::parse(slurp(path));
        } catch (const json::exception& e) {
            throw UsageError("invalid config JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw UsageError("config must be a JSON object");
    }
    LoadedConfig out;
    try {
        check_keys(j, {"model", "grid", "subregion", "tau0", "realisations", "seed", "estimators", "options", "targets",
                       "neighbors", "mspe", "jobs", "output_dir"},
                   "");
        // the model family selects the per-model defaults
        std::string family = "gaussian";
        if (j.contains("model")) {
            const auto& m = j["model"];
            if (m.is_string()) {
                family = m.get<std::string>();
            } else {
                check_keys(m, {"family", "parameter", "dim"}, "model.");
                family = m.value("family", family);
            }
        }
        if (o.model) family = *o.model;
        ExperimentConfig& c = out.experiment;
        c = default_study_config(parse_model_family(family));
        if (j.contains("model") && j["model"].is_object()) {
            c.model.parameter = j["model"].value("parameter", c.model.parameter);
            c.model.dim = j["model"].value("dim", c.model.dim);
        }
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            check_keys(g, {"lo", "hi", "step"}, "grid.");
            if (g.contains("lo")) c.grid.lo = to_coord(g["lo"].get<std::vector<double>>(), "grid.lo");
            if (g.contains("hi")) c.grid.hi = to_coord(g["hi"].get<std::vector<double>>(), "grid.hi");
            if (g.contains("lo")) c.grid.dim = static_cast<int>(g["lo"].size());
            c.grid.step = g.value("step", c.grid.step);
        }
        if (j.contains("subregion")) {
            const auto& s = j["subregion"];
            check_keys(s, {"lo", "hi"}, "subregion.");
            if (s.contains("lo")) c.sub_lo = to_coord(s["lo"].get<std::vector<double>>(), "subregion.lo");
            if (s.contains("hi")) c.sub_hi = to_coord(s["hi"].get<std::vector<double>>(), "subregion.hi");
        }
        c.tau0 = j.value("tau0", c.tau0);
        c.realisations = j.value("realisations", c.realisations);
        c.seed = j.value("seed", c.seed);
        if (j.contains("estimators")) c.estimators = j["estimators"].get<std::vector<std::string>>();
        c.targets = j.value("targets", c.targets);
        c.neighbors = j.value("neighbors", c.neighbors);
        c.compute_mspe = j.value("mspe", c.compute_mspe);
        c.jobs = j.value("jobs", c.jobs);
        out.output_dir = j.value("output_dir", std::string{});
        if (j.contains("options")) {
            const auto& opt = j["options"];
            check_keys(opt, {"centering", "ca", "hall", "tapered", "bspline"}, "options.");
            if (opt.contains("centering")) c.centering = parse_centering(opt["centering"].get<std::string>());
            if (opt.contains("ca")) {
                const auto& a = opt["ca"];
                check_keys(a, {"kernel", "theta"}, "options.ca.");
                if (a.contains("kernel")) c.correction.name = parse_kernel_name(a["kernel"].get<std::string>());
                c.correction.theta = a.value("theta", c.correction.theta);
            }
            if (opt.contains("hall")) {
                const auto& h = opt["hall"];
                check_keys(h, {"kernel", "bandwidth", "t1", "t2", "truncate"}, "options.hall.");
                if (h.contains("kernel")) c.hall_kernel = parse_smoothing_kernel(h["kernel"].get<std::string>());
                c.hall_bandwidth = h.value("bandwidth", c.hall_bandwidth);
                if (h.contains("truncate") && !h["truncate"].get<bool>()) {
                    c.truncation.reset();
                } else if (h.contains("t1") || h.contains("t2") || h.value("truncate", false)) {
                    TruncationConfig t = c.truncation.value_or(TruncationConfig{});
                    t.t1 = h.value("t1", t.t1);
                    t.t2 = h.value("t2", t.t2);
                    c.truncation = t;
                }
            }
            if (opt.contains("tapered")) {
                check_keys(opt["tapered"], {"rho"}, "options.tapered.");
                c.taper_rho = opt["tapered"].value("rho", c.taper_rho);
            }
            if (opt.contains("bspline")) {
                check_keys(opt["bspline"], {"m", "p"}, "options.bspline.");
                c.spline_m = opt["bspline"].value("m", c.spline_m);
                c.spline_p = opt["bspline"].value("p", c.spline_p);
            }
        }
    } catch (const json::exception& e) {
        throw UsageError("invalid config: " + std::string(e.what()));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    ExperimentConfig& c = out.experiment;
    if (const char* env = std::getenv("COVARIO_SEED")) {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(env, &used);
            if (env[used] != '\0') throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw UsageError("COVARIO_SEED must be a nonnegative integer");
        }
    }
    if (o.parameter) c.model.parameter = *o.parameter;
    if (!o.lo.empty()) {
        c.grid.lo = to_coord(o.lo, "--lo");
        c.grid.dim = static_cast<int>(o.lo.size());
    }
    if (!o.hi.empty()) c.grid.hi = to_coord(o.hi, "--hi");
    if (o.step) c.grid.step = *o.step;
    if (!o.sub_lo.empty()) c.sub_lo = to_coord(o.sub_lo, "--sub-lo");
    if (!o.sub_hi.empty()) c.sub_hi = to_coord(o.sub_hi, "--sub-hi");
    if (o.tau0) c.tau0 = *o.tau0;
    if (o.realisations) c.realisations = *o.realisations;
    if (o.seed) c.seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.neighbors) c.neighbors = *o.neighbors;
    if (o.targets) c.targets = *o.targets;
    if (!o.estimators.empty()) c.estimators = o.estimators;
    if (o.no_mspe) c.compute_mspe = false;
    if (!o.output_dir.empty()) out.output_dir = o.output_dir;
    c.model.dim = c.grid.dim;
    return out;
}

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--model", o.model, "gaussian | bessel | cauchy");
    cmd->add_option("--parameter", o.parameter, "model parameter (sigma, nu or gamma)");
    cmd->add_option("--lo", o.lo, "grid lower corner")->delimiter(',');
    cmd->add_option("--hi", o.hi, "grid upper corner")->delimiter(',');
    cmd->add_option("--step", o.step, "grid spacing");
    cmd->add_option("--realisations", o.realisations, "number of realisations");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--jobs", o.jobs, "worker threads");
    cmd->add_option("--output-dir", o.output_dir, "output directory");
}

// ---- simulate ----

int cmd_simulate(const std::string& config_path, const Overrides& o, const std::string& format) {
    const auto loaded = build_config(config_path, o);
    const auto& c = loaded.experiment;
    if (loaded.output_dir.empty()) throw UsageError("simulate needs --output-dir");
    if (format != "csv" && format != "binary") throw UsageError("--format must be csv or binary");
    try {
        c.model.validate();
        c.grid.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (c.realisations < 1) throw UsageError("realisations must be at least 1");
    if (c.jobs < 1) throw UsageError("jobs must be at least 1");

    const FieldSimulator sim(c.model, c.grid);
    const fs::path dir = loaded.output_dir;
    fs::create_directories(dir);
    std::vector<std::exception_ptr> failures(c.realisations);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < c.realisations; r = next++) {
            try {
                const auto lattice = sim(c.seed + r);
                char name[64];
                std::snprintf(name, sizeof name, "realisation_%04zu.%s", r, format == "csv" ? "csv" : "cvlg");
                if (format == "csv") {
                    atomic_write(dir / name, [&](std::ostream& out) { write_lattice_csv(out, lattice); });
                } else {
                    atomic_write(dir / name, [&](std::ostream& out) { write_lattice_binary(out, lattice); }, true);
                }
            } catch (...) {
                failures[r] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(c.jobs, c.realisations); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    atomic_write(dir / "metadata.json", [&](std::ostream& out) {
        std::ostringstream ss;
        write_metadata_json(ss, c.model, c.grid, c.seed, sim.info());
        json meta = json::parse(ss.str());
        std::vector<std::uint64_t> seeds;
        for (std::size_t r = 0; r < c.realisations; ++r) seeds.push_back(c.seed + r);
        meta["realisation_seeds"] = seeds;
        meta["format"] = format;
        out << meta.dump(2) << '\n';
    });
    return 0;
}

// ---- estimate ----

struct EstimateOptions {
    std::string input;
    std::string estimator;
    std::string output;
    std::optional<std::size_t> bins;
    std::optional<double> tau0;
    std::string binning;
    std::string centering = "mean";
    std::string kernel = "gaussian";
    std::optional<double> bandwidth;
    std::optional<double> t1, t2;
    double rho = 0.2;
    int m = 2;
    int p = 3;
    int dimension = 2;
    std::string weights = "choi";
    std::string fit_output;
    double azimuth = 0.0;
    double tolerance = 0.0;
    std::optional<double> cone_bandwidth;
    std::string correction_kernel = "gaussian";
    double theta = 1.0;
    std::string binning_output;
};

bool looks_like_lattice(const std::string& text) { return !text.empty() && (text[0] == '#' || text[0] == 'C'); }

SpatialSample load_sample(const std::string& text, std::optional<LatticeSample>* lattice) {
    std::istringstream in(text);
    try {
        if (looks_like_lattice(text)) {
            auto lat = read_lattice(in);
            if (lattice) *lattice = lat;
            return lat.to_sample();
        }
        return read_sample_csv(in);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()) == "empty sample") throw;
        throw UsageError(e.what());
    }
}

LagBinning choose_bins(const SpatialSample& sample, const EstimateOptions& o) {
    if (!o.binning.empty()) {
        std::istringstream in(slurp(o.binning));
        return read_binning_json(in);
    }
    const double tau1 = mean_nearest_neighbour_distance(sample);
    std::size_t K = 0;
    if (o.bins) {
        K = *o.bins;
    } else if (o.tau0) {
        K = static_cast<std::size_t>(std::ceil(*o.tau0 / tau1 - 1e-9));
    } else {
        // enough bins to reach across the bounding box
        double diag = 0.0;
        for (int k = 0; k < sample.dim(); ++k) {
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& c : sample.locations()) {
                lo = std::min(lo, c[k]);
                hi = std::max(hi, c[k]);
            }
            diag += (hi - lo) * (hi - lo);
        }
        K = static_cast<std::size_t>(std::floor(std::sqrt(diag) / tau1 + 1e-9));
    }
    if (K < 1) throw UsageError("at least one lag bin is required");
    return build_lag_bins(sample, K);
}

int cmd_estimate(const EstimateOptions& o) {
    static const std::vector<std::string> known{
        "classical", "cstar",  "constant-denominator", "cstarstar", "ca",    "matheron", "cressie-hawkins",
        "qn-variogram", "qn",  "directional",          "kernel",    "hall",  "guyon",    "dahlhaus",
        "tapered",   "bspline", "bessel",              "bernstein"};
    if (std::find(known.begin(), known.end(), o.estimator) == known.end()) {
        throw UsageError("unknown estimator '" + o.estimator + "'");
    }
    const Centering centering = parse_centering(o.centering);
    std::optional<LatticeSample> lattice;
    const SpatialSample sample = load_sample(slurp(o.input), &lattice);
    const LagBinning bins = choose_bins(sample, o);
    if (!o.binning_output.empty()) {
        atomic_write(o.binning_output, [&](std::ostream& out) { write_binning_json(out, bins); });
    }
    std::vector<double> lags{0.0};
    lags.insert(lags.end(), bins.centers.begin(), bins.centers.end());
    const auto& e = o.estimator;

    auto basis_config = [&](BasisFamily family) {
        BasisConfig bc;
        bc.family = family;
        bc.m = o.m;
        bc.p = o.p;
        bc.dimension = o.dimension;
        if (o.weights == "choi") {
            bc.weights_mode = WeightsMode::choi;
        } else if (o.weights == "uniform") {
            bc.weights_mode = WeightsMode::uniform;
        } else {
            throw UsageError("--weights must be choi or uniform");
        }
        return bc;
    };
    auto lattice_of = [&]() -> LatticeSample {
        if (lattice) return *lattice;
        try {
            return LatticeSample::from_sample(sample);
        } catch (const std::invalid_argument& ex) {
            throw UsageError(std::string("lattice estimator needs gridded data: ") + ex.what());
        }
    };

    EmpiricalCovariogram result;
    if (e == "classical" || e == "cstar") {
        result = classical_covariogram(sample, bins, centering);
    } else if (e == "constant-denominator" || e == "cstarstar") {
        result = constant_denominator_covariogram(sample, bins, centering);
    } else if (e == "ca") {
        IsotropicKernel k{parse_kernel_name(o.correction_kernel), o.theta};
        result = kernel_correct(constant_denominator_covariogram(sample, bins, centering), k, sample.dim());
    } else if (e == "matheron") {
        result = matheron_semivariogram(sample, bins);
    } else if (e == "cressie-hawkins") {
        result = cressie_hawkins_semivariogram(sample, bins);
    } else if (e == "qn-variogram") {
        result = qn_variogram(sample, bins);
    } else if (e == "qn") {
        result = qn_spatial_covariogram(sample, PairIndex(sample), bins);
    } else if (e == "directional") {
        DirectionSpec dir;
        dir.azimuth = o.azimuth;
        dir.angle_tolerance = o.tolerance;
        if (o.cone_bandwidth) dir.bandwidth = *o.cone_bandwidth;
        result = directional_covariogram(sample, bins, dir, centering);
    } else if (e == "kernel" || e == "hall") {
        KernelRegressionConfig kr{parse_smoothing_kernel(o.kernel), o.bandwidth ? *o.bandwidth : default_bandwidth(sample)};
        if (e == "kernel") {
            result = kernel_covariogram(sample, lags, kr, centering);
        } else {
            std::optional<TruncationConfig> trunc;
            if (o.t1 || o.t2) trunc = TruncationConfig{o.t1.value_or(1.5), o.t2.value_or(2.0)};
            result = hall_truncated_estimator(sample, lags, kr, trunc, centering);
        }
    } else if (e == "guyon" || e == "dahlhaus" || e == "tapered") {
        const auto lat = lattice_of();
        const double unit = lat.step[0];
        const auto vec = lattice_lags_within(lat.dims, (bins.centers.back() + bins.half_width) / unit);
        const auto cov = e == "guyon" ? guyon_covariogram(lat, vec, centering)
                                      : dahlhaus_covariogram(lat, vec, {o.rho, TaperWindow::tukey}, centering);
        result = binned_profile(cov, bins, unit);
    } else {
        const BasisFamily family = e == "bspline" ? BasisFamily::bspline
                                   : e == "bessel" ? BasisFamily::bessel
                                                   : BasisFamily::bernstein;
        const auto fit = fit_basis_covariogram(classical_covariogram(sample, bins, centering), basis_config(family));
        if (!o.fit_output.empty()) {
            atomic_write(o.fit_output, [&](std::ostream& out) { write_fitted_json(out, fit); });
        }
        result = fit.tabulate(lags);
        result.half_width = bins.half_width;
    }
    emit(o.output, [&](std::ostream& out) { write_covariogram_csv(out, result); });
    return 0;
}

// ---- correct ----

struct CorrectOptions {
    std::string input;
    std::string matrix;
    std::string method;
    std::string output;
    std::string kernel = "gaussian";
    double theta = 1.0;
    int dim = 1;
    double delta = 0.05;
    std::string shrink_function = "tanh";
};

int cmd_correct(const CorrectOptions& o) {
    const auto& m = o.method;
    const bool matrix_method = m == "linear-shrink" || m == "nonlinear-shrink";
    if (!matrix_method && m != "positivize" && m != "kernel") throw UsageError("unknown correction method '" + m + "'");
    if (o.input.empty() == o.matrix.empty()) throw UsageError("give exactly one of --input or --matrix");
    if (!o.matrix.empty() && !matrix_method) throw UsageError("--matrix only works with the shrink methods");

    std::optional<EmpiricalCovariogram> cov;
    if (!o.input.empty()) {
        std::istringstream in(slurp(o.input));
        try {
            cov = read_covariogram_csv(in);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    if (m == "positivize") {
        const auto out = positivize_spectrum(*cov);
        emit(o.output, [&](std::ostream& s) { write_covariogram_csv(s, out); });
        return 0;
    }
    if (m == "kernel") {
        const auto out = kernel_correct(*cov, {parse_kernel_name(o.kernel), o.theta}, o.dim);
        emit(o.output, [&](std::ostream& s) { write_covariogram_csv(s, out); });
        return 0;
    }
    Eigen::MatrixXd r;
    if (cov) {
        r = correlation_toeplitz(*cov);
    } else {
        std::istringstream in(slurp(o.matrix));
        try {
            r = read_matrix_csv(in);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    Eigen::MatrixXd out;
    if (m == "linear-shrink") {
        auto res = linear_shrink(r);
        std::cerr << "lambda " << res.lambda << '\n';
        out = std::move(res.matrix);
    } else {
        auto res = nonlinear_shrink(r, o.delta, parse_shrink_function(o.shrink_function));
        std::cerr << "iterations " << res.iterations << '\n';
        out = std::move(res.matrix);
    }
    emit(o.output, [&](std::ostream& s) { write_matrix_csv(s, out); });
    return 0;
}

// ---- evaluate ----

struct EvaluateOptions {
    std::string input;
    std::string model = "gaussian";
    std::optional<double> parameter;
    int dim = 2;
    double tau0 = 0.0;
    std::string data;
    std::string holdout;
    std::size_t neighbors = 512;
    std::string output;
};

int cmd_evaluate(const EvaluateOptions& o) {
    CovarianceModel model = default_study_config(parse_model_family(o.model)).model;
    if (o.parameter) model.parameter = *o.parameter;
    model.dim = o.dim;
    model.validate();
    std::istringstream in(slurp(o.input));
    EmpiricalCovariogram est;
    try {
        est = read_covariogram_csv(in);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const double tau0 = o.tau0 > 0.0 ? o.tau0 : est.lags.back();
    const auto truth = [&](double t) { return model_eval(model, t); };

    json metrics = json::object();
    auto put = [&](const char* name, auto&& fn) {
        try {
            metrics[name] = fn();
        } catch (const std::runtime_error& e) {
            metrics[name] = nullptr;
            std::cerr << "warning: " << name << ": " << e.what() << '\n';
        }
    };
    put("area", [&] { return area_metric(truth, est, tau0); });
    put("distance", [&] { return distance_metric(truth, est, tau0); });
    put("sn", [&] { return spectral_norm_metric(truth, est, tau0); });
    if (o.data.empty() != o.holdout.empty()) throw UsageError("--data and --holdout go together");
    if (!o.data.empty()) {
        const SpatialSample data = load_sample(slurp(o.data), nullptr);
        const SpatialSample held = load_sample(slurp(o.holdout), nullptr);
        const std::vector<Coord> targets = held.locations();
        const std::vector<double> values(held.values().begin(), held.values().end());
        put("mspe", [&] { return mspe_metric(est, data, values, targets, o.neighbors); });
        put("mspe_gstat", [&] { return mspe_gstat_metric(est, data, values, targets, model.family, o.dim, o.neighbors); });
    }
    json out{{"model", {{"family", std::string(to_string(model.family))}, {"parameter", model.parameter}}},
             {"tau0", tau0},
             {"metrics", metrics}};
    emit(o.output, [&](std::ostream& s) { s << out.dump(2) << '\n'; });
    return 0;
}

// ---- reproduce ----

int cmd_reproduce(const std::string& config_path, const Overrides& o) {
    const auto loaded = build_config(config_path, o);
    const auto& c = loaded.experiment;
    if (loaded.output_dir.empty()) throw UsageError("reproduce needs --output-dir");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto result = run_experiment(c);
    const fs::path dir = loaded.output_dir;
    atomic_write(dir / "average_errors.csv", [&](std::ostream& out) { write_table_csv(out, result.averages); });
    atomic_write(dir / "average_ranks.csv", [&](std::ostream& out) { write_table_csv(out, result.ranks); });
    atomic_write(dir / "envelopes.csv", [&](std::ostream& out) { write_envelopes_csv(out, result.envelopes); });
    atomic_write(dir / "report.json", [&](std::ostream& out) { write_report_json(out, result); });
    std::cout << "average ranks\n";
    write_table_csv(std::cout, result.ranks);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariogram estimation, correction and simulation study tool"};
    app.require_subcommand(1);

    std::string sim_config, sim_format = "csv";
    Overrides sim_over;
    auto* sim = app.add_subcommand("simulate", "simulate Gaussian random field realisations");
    sim->add_option("--config", sim_config, "JSON config");
    sim->add_option("--format", sim_format, "csv | binary");
    add_override_flags(sim, sim_over);

    EstimateOptions est;
    auto* es = app.add_subcommand("estimate", "estimate a covariogram from a sample");
    es->add_option("--input", est.input, "sample CSV or lattice file ('-' for stdin)")->required();
    es->add_option("--estimator", est.estimator, "estimator id")->required();
    es->add_option("--output", est.output, "covariogram CSV (default stdout)");
    es->add_option("--bins", est.bins, "number of distance bins");
    es->add_option("--tau0", est.tau0, "largest lag");
    es->add_option("--binning", est.binning, "binning JSON to use");
    es->add_option("--binning-output", est.binning_output, "write the binning JSON");
    es->add_option("--centering", est.centering, "mean | none");
    es->add_option("--kernel", est.kernel, "smoothing kernel");
    es->add_option("--bandwidth", est.bandwidth, "smoothing bandwidth");
    es->add_option("--t1", est.t1, "truncation start");
    es->add_option("--t2", est.t2, "truncation end");
    es->add_option("--rho", est.rho, "taper fraction");
    es->add_option("--m", est.m, "basis size parameter");
    es->add_option("--p", est.p, "spline degree");
    es->add_option("--dimension", est.dimension, "Bessel basis dimension");
    es->add_option("--weights", est.weights, "choi | uniform");
    es->add_option("--fit-output", est.fit_output, "write the fitted model JSON");
    es->add_option("--azimuth", est.azimuth, "direction azimuth (radians)");
    es->add_option("--tolerance", est.tolerance, "cone half-angle (radians)");
    es->add_option("--cone-bandwidth", est.cone_bandwidth, "cone bandwidth");
    es->add_option("--correction-kernel", est.correction_kernel, "kernel for ca");
    es->add_option("--theta", est.theta, "kernel scale for ca");

    CorrectOptions cor;
    auto* co = app.add_subcommand("correct", "make an estimate positive definite");
    co->add_option("--input", cor.input, "covariogram CSV ('-' for stdin)");
    co->add_option("--matrix", cor.matrix, "pseudo-correlation matrix CSV");
    co->add_option("--method", cor.method, "positivize | kernel | linear-shrink | nonlinear-shrink")->required();
    co->add_option("--output", cor.output, "output file (default stdout)");
    co->add_option("--kernel", cor.kernel, "correction kernel");
    co->add_option("--theta", cor.theta, "kernel scale");
    co->add_option("--dim", cor.dim, "data dimension");
    co->add_option("--delta", cor.delta, "nonlinear shrink step");
    co->add_option("--shrink-function", cor.shrink_function, "tanh | scaled_arctan");

    EvaluateOptions ev;
    auto* eva = app.add_subcommand("evaluate", "score an estimate against a model");
    eva->add_option("--input", ev.input, "covariogram CSV")->required();
    eva->add_option("--model", ev.model, "gaussian | bessel | cauchy");
    eva->add_option("--parameter", ev.parameter, "model parameter");
    eva->add_option("--dim", ev.dim, "field dimension");
    eva->add_option("--tau0", ev.tau0, "upper lag (default: last lag)");
    eva->add_option("--data", ev.data, "sample used for kriging");
    eva->add_option("--holdout", ev.holdout, "target locations with true values");
    eva->add_option("--neighbors", ev.neighbors, "kriging neighbours");
    eva->add_option("--output", ev.output, "metrics JSON (default stdout)");

    std::string rep_config;
    Overrides rep_over;
    auto* rep = app.add_subcommand("reproduce", "run the estimator comparison study");
    rep->add_option("--config", rep_config, "JSON config");
    add_override_flags(rep, rep_over);
    rep->add_option("--tau0", rep_over.tau0, "largest lag");
    rep->add_option("--sub-lo", rep_over.sub_lo, "subregion lower corner")->delimiter(',');
    rep->add_option("--sub-hi", rep_over.sub_hi, "subregion upper corner")->delimiter(',');
    rep->add_option("--neighbors", rep_over.neighbors, "kriging neighbours");
    rep->add_option("--targets", rep_over.targets, "kriging targets per realisation");
    rep->add_option("--estimators", rep_over.estimators, "estimator ids")->delimiter(',');
    rep->add_flag("--no-mspe", rep_over.no_mspe, "skip the kriging metrics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(sim_config, sim_over, sim_format);
        if (*es) return cmd_estimate(est);
        if (*co) return cmd_correct(cor);
        if (*eva) return cmd_evaluate(ev);
        if (*rep) return cmd_reproduce(rep_config, rep_over);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
