#include "covario/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "covario/diagnostics.hpp"
#include "covario/random.hpp"

namespace covario {

namespace {

std::mutex fftw_planner_mutex;

// smallest 2^a 3^b 5^c ≥ n
std::size_t fft_size(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2, 3, 5}) {
            while (r % f == 0) r /= f;
        }
        if (r == 1) return m;
    }
}

struct FftwBuffer {
    fftw_complex* data = nullptr;
    explicit FftwBuffer(std::size_t n) : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

fftw_plan make_plan(int rank, const std::array<int, 3>& n, fftw_complex* in, fftw_complex* out) {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_plan p = fftw_plan_dft(rank, n.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    if (!p) throw std::runtime_error("FFTW planning failed");
    return p;
}

void destroy_plan(fftw_plan p) {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(p);
}

}  // namespace

std::string_view to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::gaussian: return "gaussian";
        case ModelFamily::bessel: return "bessel";
        case ModelFamily::cauchy: return "cauchy";
    }
    return "gaussian";
}

ModelFamily parse_model_family(std::string_view name) {
    if (name == "gaussian") return ModelFamily::gaussian;
    if (name == "bessel") return ModelFamily::bessel;
    if (name == "cauchy") return ModelFamily::cauchy;
    throw std::invalid_argument("unknown covariance model '" + std::string(name) + "'");
}

void CovarianceModel::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("model dimension must be 1, 2 or 3");
    if (!std::isfinite(parameter)) throw std::invalid_argument("model parameter must be finite");
    switch (family) {
        case ModelFamily::gaussian:
            if (!(parameter > 0.0)) throw std::invalid_argument("gaussian model needs sigma > 0");
            break;
        case ModelFamily::bessel:
            if (parameter < (static_cast<double>(dim) - 2.0) / 2.0) {
                throw std::invalid_argument("bessel model needs nu >= (d-2)/2");
            }
            break;
        case ModelFamily::cauchy:
            if (!(parameter > 0.0)) throw std::invalid_argument("cauchy model needs gamma > 0");
            break;
    }
}

double CovarianceModel::operator()(double tau) const { return model_eval(*this, tau); }

double model_eval(const CovarianceModel& model, double tau) {
    model.validate();
    if (!(tau >= 0.0)) throw std::invalid_argument("model lag must be nonnegative");
    const double p = model.parameter;
    switch (model.family) {
        case ModelFamily::gaussian: return std::exp(-tau * tau / (p * p));
        case ModelFamily::cauchy: return std::pow(1.0 + tau * tau, -p);
        case ModelFamily::bessel:
            if (tau < 1e-6) return 1.0 - tau * tau / (4.0 * (p + 1.0));
            if (p == 0.0) return boost::math::cyl_bessel_j(0.0, tau);
            return std::pow(2.0, p) * std::tgamma(p + 1.0) * boost::math::cyl_bessel_j(p, tau) / std::pow(tau, p);
    }
    return 0.0;
}

void GridSpec::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
    for (int k = 0; k < dim; ++k) {
        if (!(hi[k] > lo[k])) throw std::invalid_argument("grid bounds need hi > lo");
        const double cells = (hi[k] - lo[k]) / step;
        if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells)) {
            throw std::invalid_argument("grid step must divide the axis length");
        }
    }
}

std::array<std::size_t, 3> GridSpec::shape() const {
    validate();
    std::array<std::size_t, 3> n{1, 1, 1};
    for (int k = 0; k < dim; ++k) n[k] = static_cast<std::size_t>(std::llround((hi[k] - lo[k]) / step)) + 1;
    return n;
}

std::size_t GridSpec::size() const {
    const auto n = shape();
    return n[0] * n[1] * n[2];
}

std::vector<std::size_t> GridSpec::dims() const {
    const auto n = shape();
    return std::vector<std::size_t>(n.begin(), n.begin() + dim);
}

std::string_view to_string(GenerationMethod method) {
    switch (method) {
        case GenerationMethod::circulant: return "circulant";
        case GenerationMethod::ring_spectral: return "ring_spectral";
        case GenerationMethod::dense: return "dense";
    }
    return "circulant";
}

struct FieldSimulator::Impl {
    CovarianceModel model;
    GridSpec grid;
    std::array<std::size_t, 3> n{1, 1, 1};
    EmbeddingInfo info;

    // circulant
    std::array<std::size_t, 3> m{1, 1, 1};
    std::vector<double> amplitude;  // sqrt(λ/M)
    fftw_plan plan = nullptr;

    // ring spectral
    std::vector<std::vector<double>> ring_cos_a, ring_sin_a, ring_cos_b, ring_sin_b;

    // dense
    Eigen::MatrixXd root;

    Impl(const CovarianceModel& mod, const GridSpec& g) : model(mod), grid(g) {
        model.validate();
        grid.validate();
        if (model.dim != grid.dim) throw std::invalid_argument("model and grid dimensions differ");
        n = grid.shape();
        if (model.family == ModelFamily::bessel && model.parameter == 0.0 && grid.dim == 2) {
            setup_ring();
            return;
        }
        const std::size_t base = model.family == ModelFamily::cauchy ? 4 : 2;
        for (std::size_t pad = base; pad <= 4 * base; pad *= 2) {
            if (setup_circulant(pad)) return;
        }
        if (grid.size() <= 4096) {
            setup_dense();
            return;
        }
        throw std::runtime_error("embedding failed; enlarge padding");
    }

    ~Impl() {
        if (plan) destroy_plan(plan);
    }

    Coord coordinate(std::size_t a, std::size_t b, std::size_t c) const {
        Coord p{};
        const std::size_t idx[3] = {a, b, c};
        for (int k = 0; k < grid.dim; ++k) p[k] = grid.lo[k] + grid.step * static_cast<double>(idx[k]);
        return p;
    }

    bool setup_circulant(std::size_t pad) {
        std::size_t total = 1;
        for (int k = 0; k < 3; ++k) {
            m[k] = n[k] > 1 ? fft_size(pad * (n[k] - 1)) : 1;
            total *= m[k];
        }
        FftwBuffer in(total);
        FftwBuffer out(total);
        for (std::size_t a = 0; a < m[0]; ++a) {
            for (std::size_t b = 0; b < m[1]; ++b) {
                for (std::size_t c = 0; c < m[2]; ++c) {
                    const double da = static_cast<double>(std::min(a, m[0] - a));
                    const double db = static_cast<double>(std::min(b, m[1] - b));
                    const double dc = static_cast<double>(std::min(c, m[2] - c));
                    const double tau = grid.step * std::sqrt(da * da + db * db + dc * dc);
                    const std::size_t i = (a * m[1] + b) * m[2] + c;
                    in.data[i][0] = model_eval(model, tau);
                    in.data[i][1] = 0.0;
                }
            }
        }
        const std::array<int, 3> dims_int{static_cast<int>(m[0]), static_cast<int>(m[1]), static_cast<int>(m[2])};
        fftw_plan p = make_plan(grid.dim, dims_int, in.data, out.data);
        fftw_execute(p);
        destroy_plan(p);
        double max_l = 0.0;
        double min_l = 0.0;
        double pos = 0.0;
        double neg = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            const double l = out.data[i][0];
            max_l = std::max(max_l, l);
            min_l = std::min(min_l, l);
            (l < 0.0 ? neg : pos) += std::abs(l);
        }
        info.method = GenerationMethod::circulant;
        info.embedding = m;
        info.min_eigenvalue = max_l > 0.0 ? min_l / max_l : min_l;
        info.negative_mass = neg / std::max(pos + neg, 1e-300);
        const bool exact = min_l >= -1e-9 * max_l;
        if (!exact && info.negative_mass > 1e-2) return false;
        if (!exact) {
            warn("circulant embedding: clipped negative eigenvalues (min " + std::to_string(info.min_eigenvalue) +
                 " of max, negative mass " + std::to_string(info.negative_mass) + ")");
        }
        amplitude.resize(total);
        for (std::size_t i = 0; i < total; ++i) {
            amplitude[i] = std::sqrt(std::max(0.0, out.data[i][0]) / static_cast<double>(total));
        }
        FftwBuffer pin(total);
        FftwBuffer pout(total);
        plan = make_plan(grid.dim, dims_int, pin.data, pout.data);
        return true;
    }

    void setup_ring() {
        double diameter = 0.0;
        for (int k = 0; k < grid.dim; ++k) diameter += (grid.hi[k] - grid.lo[k]) * (grid.hi[k] - grid.lo[k]);
        diameter = std::sqrt(diameter);
        const auto K = static_cast<std::size_t>(std::ceil((diameter + 40.0) / 2.0));
        info.method = GenerationMethod::ring_spectral;
        info.ring_directions = K;
        ring_cos_a.assign(K, std::vector<double>(n[0]));
        ring_sin_a.assign(K, std::vector<double>(n[0]));
        ring_cos_b.assign(K, std::vector<double>(n[1]));
        ring_sin_b.assign(K, std::vector<double>(n[1]));
        for (std::size_t k = 0; k < K; ++k) {
            const double phi = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
            const double wx = std::cos(phi);
            const double wy = std::sin(phi);
            for (std::size_t a = 0; a < n[0]; ++a) {
                const double x = grid.lo[0] + grid.step * static_cast<double>(a);
                ring_cos_a[k][a] = std::cos(wx * x);
                ring_sin_a[k][a] = std::sin(wx * x);
            }
            for (std::size_t b = 0; b < n[1]; ++b) {
                const double y = grid.lo[1] + grid.step * static_cast<double>(b);
                ring_cos_b[k][b] = std::cos(wy * y);
                ring_sin_b[k][b] = std::sin(wy * y);
            }
        }
    }

    void setup_dense() {
        const std::size_t total = grid.size();
        std::vector<Coord> pts;
        pts.reserve(total);
        for (std::size_t a = 0; a < n[0]; ++a) {
            for (std::size_t b = 0; b < n[1]; ++b) {
                for (std::size_t c = 0; c < n[2]; ++c) pts.push_back(coordinate(a, b, c));
            }
        }
        Eigen::MatrixXd cov(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
        for (std::size_t i = 0; i < total; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = model_eval(model, euclidean_distance(pts[i], pts[j], grid.dim));
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        const Eigen::VectorXd l = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        root = solver.eigenvectors() * l.asDiagonal();
        info.method = GenerationMethod::dense;
        info.min_eigenvalue = solver.eigenvalues().minCoeff() / solver.eigenvalues().maxCoeff();
        info.embedding = n;
        warn("circulant embedding failed; using dense factorization");
    }

    LatticeSample draw(std::uint64_t seed) const {
        LatticeSample out;
        out.dims = grid.dims();
        for (int k = 0; k < grid.dim; ++k) {
            out.origin[k] = grid.lo[k];
            out.step[k] = grid.step;
        }
        out.values.assign(grid.size(), 0.0);
        CounterRng rng(seed);
        switch (info.method) {
            case GenerationMethod::circulant: draw_circulant(rng, out.values); break;
            case GenerationMethod::ring_spectral: draw_ring(rng, out.values); break;
            case GenerationMethod::dense: {
                Eigen::VectorXd z(root.cols());
                for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
                const Eigen::VectorXd x = root * z;
                for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = x[static_cast<Eigen::Index>(i)];
                break;
            }
        }
        return out;
    }

    void draw_circulant(CounterRng& rng, std::vector<double>& values) const {
        const std::size_t total = amplitude.size();
        FftwBuffer in(total);
        FftwBuffer out(total);
        for (std::size_t i = 0; i < total; ++i) {
            in.data[i][0] = amplitude[i] * rng.normal();
            in.data[i][1] = amplitude[i] * rng.normal();
        }
        fftw_execute_dft(plan, in.data, out.data);
        for (std::size_t a = 0; a < n[0]; ++a) {
            for (std::size_t b = 0; b < n[1]; ++b) {
                for (std::size_t c = 0; c < n[2]; ++c) {
                    values[(a * n[1] + b) * n[2] + c] = out.data[(a * m[1] + b) * m[2] + c][0];
                }
            }
        }
    }

    void draw_ring(CounterRng& rng, std::vector<double>& values) const {
        const std::size_t K = info.ring_directions;
        const double scale = 1.0 / std::sqrt(static_cast<double>(K));
        for (std::size_t k = 0; k < K; ++k) {
            const double A = scale * rng.normal();
            const double B = scale * rng.normal();
            for (std::size_t a = 0; a < n[0]; ++a) {
                const double ca = ring_cos_a[k][a];
                const double sa = ring_sin_a[k][a];
                double* row = values.data() + a * n[1];
                for (std::size_t b = 0; b < n[1]; ++b) {
                    const double cb = ring_cos_b[k][b];
                    const double sb = ring_sin_b[k][b];
                    row[b] += A * (ca * cb - sa * sb) + B * (sa * cb + ca * sb);
                }
            }
        }
    }
};

FieldSimulator::FieldSimulator(const CovarianceModel& model, const GridSpec& grid)
    : impl_(std::make_unique<Impl>(model, grid)) {}
FieldSimulator::~FieldSimulator() = default;
FieldSimulator::FieldSimulator(FieldSimulator&&) noexcept = default;
FieldSimulator& FieldSimulator::operator=(FieldSimulator&&) noexcept = default;

LatticeSample FieldSimulator::operator()(std::uint64_t seed) const { return impl_->draw(seed); }
const EmbeddingInfo& FieldSimulator::info() const noexcept { return impl_->info; }
const GridSpec& FieldSimulator::grid() const noexcept { return impl_->grid; }

LatticeSample simulate_grf(const CovarianceModel& model, const GridSpec& grid, std::uint64_t seed) {
    return FieldSimulator(model, grid)(seed);
}

SpatialSample subgrid_extract(const SpatialSample& sample, const Coord& lo, const Coord& hi) {
    const int dim = sample.dim();
    double extent = 0.0;
    for (int k = 0; k < dim; ++k) {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        for (const auto& c : sample.locations()) {
            mn = std::min(mn, c[k]);
            mx = std::max(mx, c[k]);
        }
        extent = std::max(extent, mx - mn);
        const double tol = 1e-9 * std::max(1.0, mx - mn);
        if (lo[k] < mn - tol || hi[k] > mx + tol || !(hi[k] >= lo[k])) {
            throw std::invalid_argument("extraction bounds must lie inside the sample extent");
        }
    }
    const double tol = 1e-9 * std::max(1.0, extent);
    std::vector<Coord> locs;
    std::vector<double> vals;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto& c = sample.location(i);
        bool inside = true;
        for (int k = 0; k < dim; ++k) inside = inside && c[k] >= lo[k] - tol && c[k] <= hi[k] + tol;
        if (inside) {
            locs.push_back(c);
            vals.push_back(sample.value(i));
        }
    }
    if (locs.empty()) throw std::invalid_argument("extraction box contains no points");
    return SpatialSample(dim, std::move(locs), std::move(vals));
}

LatticeSample subgrid_extract(const LatticeSample& lattice, const Coord& lo, const Coord& hi) {
    lattice.validate();
    std::array<std::size_t, 3> n{1, 1, 1};
    std::array<std::size_t, 3> first{0, 0, 0};
    std::array<std::size_t, 3> count{1, 1, 1};
    for (int k = 0; k < lattice.dim(); ++k) {
        n[k] = lattice.dims[static_cast<std::size_t>(k)];
        const double s = lattice.step[k];
        const double top = lattice.origin[k] + s * static_cast<double>(n[k] - 1);
        const double tol = 1e-9 * std::max(1.0, std::abs(top - lattice.origin[k]));
        if (lo[k] < lattice.origin[k] - tol || hi[k] > top + tol || !(hi[k] >= lo[k])) {
            throw std::invalid_argument("extraction bounds must lie inside the lattice extent");
        }
        const auto a = static_cast<std::size_t>(std::ceil((lo[k] - lattice.origin[k]) / s - 1e-9));
        const auto b = static_cast<std::size_t>(std::floor((hi[k] - lattice.origin[k]) / s + 1e-9));
        if (b < a) throw std::invalid_argument("extraction box contains no points");
        first[k] = a;
        count[k] = b - a + 1;
    }
    LatticeSample out;
    for (int k = 0; k < lattice.dim(); ++k) {
        out.dims.push_back(count[k]);
        out.origin[k] = lattice.origin[k] + lattice.step[k] * static_cast<double>(first[k]);
        out.step[k] = lattice.step[k];
    }
    out.values.reserve(count[0] * count[1] * count[2]);
    for (std::size_t a = 0; a < count[0]; ++a) {
        for (std::size_t b = 0; b < count[1]; ++b) {
            for (std::size_t c = 0; c < count[2]; ++c) {
                out.values.push_back(lattice.values[((first[0] + a) * n[1] + first[1] + b) * n[2] + first[2] + c]);
            }
        }
    }
    return out;
}

}  // namespace covario
