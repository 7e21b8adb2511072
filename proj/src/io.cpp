#include "covario/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace covario {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, std::size_t row) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || trim(s.substr(used)).size() != 0) {
        throw std::runtime_error("malformed number '" + s + "' on line " + std::to_string(row));
    }
    return v;
}

json read_json(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid JSON: ") + e.what());
    }
}

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "binary lattice I/O assumes little-endian hosts");
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated binary lattice");
    return v;
}

json metrics_json(const std::array<double, 5>& m) {
    json o = json::object();
    for (std::size_t k = 0; k < 5; ++k) {
        o[std::string(kMetricNames[k])] = std::isfinite(m[k]) ? json(m[k]) : json(nullptr);
    }
    return o;
}

json table_json(const MetricTable& t) {
    json o = json::object();
    for (std::size_t e = 0; e < t.estimators.size(); ++e) o[t.estimators[e]] = metrics_json(t.values[e]);
    return o;
}

}  // namespace

SpatialSample read_sample_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("sample CSV is empty");
    auto header = split_csv(line);
    for (auto& h : header) h = trim(h);
    static const std::vector<std::vector<std::string>> accepted{
        {"x", "value"}, {"x", "y", "value"}, {"x", "y", "z", "value"}};
    int dim = 0;
    for (const auto& a : accepted) {
        if (header == a) dim = static_cast<int>(a.size()) - 1;
    }
    if (dim == 0) throw std::runtime_error("sample CSV header must be x[,y[,z]],value");
    std::vector<Coord> locations;
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty() || trim(line) == "\r") continue;
        const auto fields = split_csv(line);
        if (fields.size() != static_cast<std::size_t>(dim + 1)) {
            throw std::runtime_error("expected " + std::to_string(dim + 1) + " fields on line " + std::to_string(row));
        }
        Coord c{};
        for (int k = 0; k < dim; ++k) c[k] = to_double(fields[k], row);
        locations.push_back(c);
        values.push_back(to_double(fields[dim], row));
    }
    if (values.empty()) throw std::runtime_error("empty sample");
    return SpatialSample(dim, std::move(locations), std::move(values));
}

void write_sample_csv(std::ostream& out, const SpatialSample& sample) {
    static const char* headers[] = {"x,value", "x,y,value", "x,y,z,value"};
    out << headers[sample.dim() - 1] << '\n';
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (int k = 0; k < sample.dim(); ++k) out << fmt(sample.location(i)[k]) << ',';
        out << fmt(sample.value(i)) << '\n';
    }
}

void write_binning_json(std::ostream& out, const LagBinning& bins) {
    json j{{"centers", bins.centers}, {"half_width", bins.half_width}};
    out << j.dump(2) << '\n';
}

LagBinning read_binning_json(std::istream& in) {
    const json j = read_json(in);
    LagBinning bins;
    try {
        bins.centers = j.at("centers").get<std::vector<double>>();
        bins.half_width = j.at("half_width").get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid binning JSON: ") + e.what());
    }
    bins.validate();
    return bins;
}

void write_lattice_csv(std::ostream& out, const LatticeSample& lattice) {
    lattice.validate();
    const int d = lattice.dim();
    out << "#dims";
    for (auto n : lattice.dims) out << ',' << n;
    out << "\n#origin";
    for (int k = 0; k < d; ++k) out << ',' << fmt(lattice.origin[k]);
    out << "\n#step";
    for (int k = 0; k < d; ++k) out << ',' << fmt(lattice.step[k]);
    out << '\n';
    for (double v : lattice.values) out << fmt(v) << '\n';
}

LatticeSample read_lattice_csv(std::istream& in) {
    LatticeSample lat;
    std::string line;
    std::size_t row = 0;
    auto header = [&](const char* tag) {
        ++row;
        if (!std::getline(in, line)) throw std::runtime_error("lattice file is truncated");
        auto fields = split_csv(line);
        if (fields.empty() || fields[0] != tag) throw std::runtime_error(std::string("expected ") + tag + " line");
        fields.erase(fields.begin());
        return fields;
    };
    for (const auto& f : header("#dims")) {
        const double n = to_double(f, row);
        if (!(n >= 1) || n != std::floor(n)) throw std::runtime_error("lattice dimensions must be positive integers");
        lat.dims.push_back(static_cast<std::size_t>(n));
    }
    const auto d = lat.dims.size();
    if (d < 1 || d > 3) throw std::runtime_error("lattice must have 1 to 3 axes");
    auto origin = header("#origin");
    auto step = header("#step");
    if (origin.size() != d || step.size() != d) throw std::runtime_error("lattice header lengths disagree");
    for (std::size_t k = 0; k < d; ++k) {
        lat.origin[k] = to_double(origin[k], row - 1);
        lat.step[k] = to_double(step[k], row);
    }
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty() || trim(line) == "\r") continue;
        auto fields = split_csv(line);
        if (fields.size() != 1) throw std::runtime_error("one value per line expected on line " + std::to_string(row));
        lat.values.push_back(to_double(fields[0], row));
    }
    lat.validate();
    return lat;
}

void write_lattice_binary(std::ostream& out, const LatticeSample& lattice) {
    lattice.validate();
    out.write("CVLG", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(lattice.dim()));
    for (auto n : lattice.dims) put<std::uint64_t>(out, n);
    for (int k = 0; k < lattice.dim(); ++k) put<double>(out, lattice.origin[k]);
    for (int k = 0; k < lattice.dim(); ++k) put<double>(out, lattice.step[k]);
    out.write(reinterpret_cast<const char*>(lattice.values.data()),
              static_cast<std::streamsize>(lattice.values.size() * sizeof(double)));
}

LatticeSample read_lattice_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "CVLG", 4) != 0) throw std::runtime_error("not a binary lattice file");
    if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported binary lattice version");
    const auto d = get<std::uint32_t>(in);
    if (d < 1 || d > 3) throw std::runtime_error("lattice must have 1 to 3 axes");
    LatticeSample lat;
    std::size_t total = 1;
    for (std::uint32_t k = 0; k < d; ++k) {
        lat.dims.push_back(get<std::uint64_t>(in));
        total *= lat.dims.back();
    }
    for (std::uint32_t k = 0; k < d; ++k) lat.origin[k] = get<double>(in);
    for (std::uint32_t k = 0; k < d; ++k) lat.step[k] = get<double>(in);
    lat.values.resize(total);
    if (!in.read(reinterpret_cast<char*>(lat.values.data()), static_cast<std::streamsize>(total * sizeof(double)))) {
        throw std::runtime_error("truncated binary lattice");
    }
    lat.validate();
    return lat;
}

LatticeSample read_lattice(std::istream& in) {
    if (in.peek() == 'C') return read_lattice_binary(in);
    return read_lattice_csv(in);
}

void write_fitted_json(std::ostream& out, const FittedCovariogram& fit) {
    const auto& c = fit.config;
    json params{{"m", c.m}, {"p", c.p}, {"dimension", c.dimension}, {"jumps", c.jumps}};
    json j{{"family", std::string(to_string(c.family))},
           {"params", params},
           {"coefficients", fit.coefficients},
           {"rank_deficient", fit.rank_deficient}};
    out << j.dump(2) << '\n';
}

FittedCovariogram read_fitted_json(std::istream& in) {
    const json j = read_json(in);
    FittedCovariogram fit;
    try {
        fit.config.family = parse_basis_family(j.at("family").get<std::string>());
        const auto& p = j.at("params");
        fit.config.m = p.value("m", 2);
        fit.config.p = p.value("p", 3);
        fit.config.dimension = p.value("dimension", 2);
        fit.config.jumps = p.value("jumps", std::vector<double>{});
        fit.coefficients = j.at("coefficients").get<std::vector<double>>();
        fit.rank_deficient = j.value("rank_deficient", false);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid fitted-model JSON: ") + e.what());
    }
    fit.config.validate();
    if (fit.coefficients.size() != fit.basis_size()) throw std::runtime_error("coefficient count does not match basis");
    return fit;
}

void write_metadata_json(std::ostream& out, const CovarianceModel& model, const GridSpec& grid, std::uint64_t seed,
                         const EmbeddingInfo& info) {
    const auto d = static_cast<std::size_t>(grid.dim);
    json j{{"model", {{"family", std::string(to_string(model.family))}, {"parameter", model.parameter}}},
           {"seed", seed},
           {"grid",
            {{"dim", grid.dim},
             {"lo", std::vector<double>(grid.lo.begin(), grid.lo.begin() + d)},
             {"hi", std::vector<double>(grid.hi.begin(), grid.hi.begin() + d)},
             {"step", grid.step},
             {"dims", grid.dims()}}},
           {"generation",
            {{"method", std::string(to_string(info.method))},
             {"embedding", std::vector<std::size_t>(info.embedding.begin(), info.embedding.begin() + d)},
             {"min_eigenvalue", info.min_eigenvalue},
             {"negative_mass", info.negative_mass},
             {"ring_directions", info.ring_directions}}}};
    out << j.dump(2) << '\n';
}

std::string_view estimator_label(std::string_view id) {
    if (id == "cstar") return "C*";
    if (id == "cstarstar") return "C**";
    if (id == "ca") return "C^(a)";
    if (id == "hall") return "C~";
    if (id == "qn") return "C_Q";
    if (id == "tapered") return "C_N^a";
    if (id == "bspline") return "C^B";
    return id;
}

void write_table_csv(std::ostream& out, const MetricTable& table) {
    out << "estimator,label";
    for (auto name : kMetricNames) out << ',' << name;
    out << '\n';
    for (std::size_t e = 0; e < table.estimators.size(); ++e) {
        out << table.estimators[e] << ',' << estimator_label(table.estimators[e]);
        for (double v : table.values[e]) out << ',' << (std::isfinite(v) ? fmt(v) : "NA");
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const ExperimentResult& result) {
    json raw = json::array();
    for (const auto& r : result.reports) {
        json row{{"estimator", r.estimator}, {"realisation", r.realisation}, {"metrics", metrics_json(r.metrics)}};
        if (!r.error.empty()) row["error"] = r.error;
        raw.push_back(std::move(row));
    }
    json j{{"metrics", kMetricNames},
           {"averages", table_json(result.averages)},
           {"ranks", table_json(result.ranks)},
           {"realisations", std::move(raw)},
           {"generation",
            {{"method", std::string(to_string(result.embedding.method))},
             {"min_eigenvalue", result.embedding.min_eigenvalue},
             {"negative_mass", result.embedding.negative_mass}}}};
    out << j.dump(2) << '\n';
}

void write_envelopes_csv(std::ostream& out, std::span<const Envelope> envelopes) {
    out << "lag,estimator,lo,hi,mean\n";
    for (const auto& env : envelopes) {
        for (std::size_t k = 0; k < env.lags.size(); ++k) {
            out << fmt(env.lags[k]) << ',' << env.estimator << ',' << fmt(env.lo[k]) << ',' << fmt(env.hi[k]) << ','
                << fmt(env.mean[k]) << '\n';
        }
    }
}

void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer, bool binary) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        writer(out);
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    fs::rename(tmp, path);
}

}  // namespace covario
