#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "covario/basis.hpp"
#include "covario/experiment.hpp"
#include "covario/simulation.hpp"
#include "covario/spatial.hpp"
#include "covario/tapered.hpp"

namespace covario {

/// Header `x[,y[,z]],value`, one row per location.
SpatialSample read_sample_csv(std::istream& in);
void write_sample_csv(std::ostream& out, const SpatialSample& sample);

/// {"centers": [...], "half_width": r}
void write_binning_json(std::ostream& out, const LagBinning& bins);
LagBinning read_binning_json(std::istream& in);

/// Text lattice: `#dims,n1[,n2[,n3]]`, `#origin,...`, `#step,...`, then one
/// value per line in row-major order.
void write_lattice_csv(std::ostream& out, const LatticeSample& lattice);
LatticeSample read_lattice_csv(std::istream& in);

/// Binary lattice: "CVLG", u32 version (1), u32 dim, u64 dims[dim],
/// f64 origin[dim], f64 step[dim], f64 values. Little-endian.
void write_lattice_binary(std::ostream& out, const LatticeSample& lattice);
LatticeSample read_lattice_binary(std::istream& in);

/// Either lattice format, chosen by the leading magic bytes.
LatticeSample read_lattice(std::istream& in);

/// {"family", "params": {...}, "coefficients": [...]}
void write_fitted_json(std::ostream& out, const FittedCovariogram& fit);
FittedCovariogram read_fitted_json(std::istream& in);

/// Simulation metadata: model, parameter, seed, grid and embedding.
void write_metadata_json(std::ostream& out, const CovarianceModel& model, const GridSpec& grid, std::uint64_t seed,
                         const EmbeddingInfo& info);

/// Display label of a study estimator id (e.g. "cstar" -> "C*").
std::string_view estimator_label(std::string_view id);

/// estimator,label,area,distance,sn,mspe,mspe_gstat
void write_table_csv(std::ostream& out, const MetricTable& table);
/// Averages, ranks and per-realisation raw values.
void write_report_json(std::ostream& out, const ExperimentResult& result);
/// Tidy band data: lag,estimator,lo,hi,mean
void write_envelopes_csv(std::ostream& out, std::span<const Envelope> envelopes);

/// Writes through a temporary file in the same directory and renames it into
/// place. Parent directories are created.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer,
                  bool binary = false);

}  // namespace covario
