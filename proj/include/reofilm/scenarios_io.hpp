#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reofilm/discretization.hpp"
#include "reofilm/model_kernels.hpp"
#include "reofilm/records.hpp"
#include "reofilm/rheology.hpp"
#include "reofilm/timestepping.hpp"

namespace reofilm {

struct GridConfig {
  std::size_t n = 0;
  double length = 0.0;
  BoundaryKind bc = BoundaryKind::Periodic;
};

struct ModelConfig {
  ModelFamily family = ModelFamily::PowerLawUbar;
  double gamma = 1.0;
  bool implicit_drag = false;
  FluxScheme flux_scheme = FluxScheme::Central;
};

enum class InitialKind { Uniform, GaussianBump, DamBreak, EquilibriumPerturbed };

std::string_view to_string(InitialKind kind);

/// Initial-condition parameters; which ones apply depends on `kind`.
///
/// `u0` is a mean velocity. For the EtaE family it is converted to the
/// shear parameter with invert_mean_velocity.
struct InitialCondition {
  InitialKind kind = InitialKind::Uniform;
  double eta0 = 1.0;
  double u0 = 0.0;
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;       // bump centre
  double eta_right = 0.0;    // dam break: thickness right of the gate
  double position = 0.0;     // dam break: gate position
  std::optional<double> smoothing;  // dam break tanh width; default 5 dx
  double wavenumber = 0.0;   // equilibrium_perturbed
};

enum class OutputFormat { Ndjson, Csv };

std::string_view to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view name);

struct RunConfig {
  double t_end = 0.0;
  double cfl = 0.4;
  double output_every = 0.0;
  double dt_max = 1.0;
  double dt_min = 1e-10;
  std::string out_path;
  OutputFormat format = OutputFormat::Ndjson;
};

/// A fully validated scenario.
struct ScenarioConfig {
  GridConfig grid;
  ModelConfig model;
  Rheology rheology = Newtonian{1.0};
  ModelParams params;
  InitialCondition ic;
  RunConfig run;

  Grid make_grid() const;
  FilmModel make_model() const;
  StepControl make_control() const;
};

/// Parses a YAML scenario with the sections grid, model, rheology, params,
/// ic and run. Unknown keys are errors; every error is a ConfigError naming
/// the dotted key.
ScenarioConfig parse_config(std::string_view text);

/// Reads and parses a scenario file. Missing files raise ConfigError.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Reads only the rheology section of a YAML file; other sections are
/// ignored, so a full scenario file is accepted.
Rheology load_rheology(const std::filesystem::path& path);

/// Builds the initial film state for `cfg` on `grid`.
///
/// Throws ConfigError if the thickness would fall below kThicknessFloor.
FilmState build_initial_state(const ScenarioConfig& cfg, const Grid& grid);

/// Writes records as NDJSON (one record per line) or long-format CSV
/// (time, x, eta, vel) plus a sidecar diagnostics CSV.
void write_records(const std::vector<SimRecord>& records, const Grid& grid,
                   const std::filesystem::path& path, OutputFormat format);

std::vector<SimRecord> read_records(const std::filesystem::path& path, OutputFormat format);

/// foo.csv -> foo.diagnostics.csv
std::filesystem::path diagnostics_sidecar_path(const std::filesystem::path& path);

/// Appends records to a stream as they are produced.
class RecordWriter {
 public:
  RecordWriter(const std::filesystem::path& path, const Grid& grid, OutputFormat format);
  ~RecordWriter();
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  void write(const SimRecord& record);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace reofilm
