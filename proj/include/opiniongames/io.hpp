#pragma once

#include <string>
#include <vector>

#include "opiniongames/harness.hpp"
#include "opiniongames/spectral.hpp"

namespace opg {

/// Deterministic decimal rendering (%.17g): value -> text -> value is exact.
std::string format_double(double v);

/// Writes the run's columnar files plus the manifest into `out_dir` and
/// returns the paths written. Bytes are a pure function of (cfg, summary).
std::vector<std::string> export_results(const EnsembleSummary& summary,
                                        const ScenarioConfig& cfg,
                                        const std::string& out_dir);

/// FNV-1a over every rendered output byte, without touching the filesystem.
uint64_t results_digest(const EnsembleSummary& summary,
                        const ScenarioConfig& cfg);

struct TrajectoryRow {
  double s = 0.0;
  int agent = 0;
  double x = 0.0;
  double u = 0.0;
  double dB = 0.0;
};

/// Reads back a trajectory.csv produced by export_results.
std::vector<TrajectoryRow> import_trajectory(const std::string& path);

/// Columnar (x, Re, Im) snapshot of a field.
void export_field(const WaveField& field, const std::string& path);

}  // namespace opg
