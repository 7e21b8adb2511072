#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "covario/spatial.hpp"
#include "covario/tapered.hpp"

namespace covario {

enum class ModelFamily { gaussian, bessel, cauchy };

std::string_view to_string(ModelFamily family);
ModelFamily parse_model_family(std::string_view name);

/// Unit-variance isotropic model: gaussian exp(−τ²/σ²), bessel
/// 2^ν Γ(ν+1) J_ν(τ)/τ^ν, cauchy (1 + τ²)^{−γ}. `parameter` holds σ, ν or γ.
struct CovarianceModel {
    ModelFamily family = ModelFamily::gaussian;
    double parameter = 1.0;
    int dim = 2;

    void validate() const;
    double operator()(double tau) const;
};

double model_eval(const CovarianceModel& model, double tau);

/// Regular grid: per-axis bounds and a common step.
struct GridSpec {
    int dim = 2;
    Coord lo{};
    Coord hi{};
    double step = 1.0;

    void validate() const;
    std::array<std::size_t, 3> shape() const;
    std::size_t size() const;
    std::vector<std::size_t> dims() const;
};

enum class GenerationMethod { circulant, ring_spectral, dense };

std::string_view to_string(GenerationMethod method);

struct EmbeddingInfo {
    GenerationMethod method = GenerationMethod::circulant;
    std::array<std::size_t, 3> embedding{1, 1, 1};
    double min_eigenvalue = 0.0;   // relative to the largest
    double negative_mass = 0.0;    // Σ|λ⁻| / Σ|λ|
    std::size_t ring_directions = 0;
};

/// Zero-mean Gaussian field generator for one model and grid. Setup work
/// (spectrum, factorization) is done once; each call draws the realisation
/// keyed by `seed`. Calls are thread-safe and bit-reproducible.
class FieldSimulator {
public:
    FieldSimulator(const CovarianceModel& model, const GridSpec& grid);
    ~FieldSimulator();
    FieldSimulator(FieldSimulator&&) noexcept;
    FieldSimulator& operator=(FieldSimulator&&) noexcept;

    LatticeSample operator()(std::uint64_t seed) const;
    const EmbeddingInfo& info() const noexcept;
    const GridSpec& grid() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

LatticeSample simulate_grf(const CovarianceModel& model, const GridSpec& grid, std::uint64_t seed);

/// Points inside the closed box [lo, hi] (per used axis).
SpatialSample subgrid_extract(const SpatialSample& sample, const Coord& lo, const Coord& hi);
LatticeSample subgrid_extract(const LatticeSample& lattice, const Coord& lo, const Coord& hi);

}  // namespace covario
