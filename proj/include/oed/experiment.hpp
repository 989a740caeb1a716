#pragma once

#include <string>
#include <vector>

#include "oed/config.hpp"
#include "oed/stability.hpp"

// Batch runner: executes a configured study and writes the machine-readable
// artifacts (report.json, rates.csv, per-level utility_surface_N<k>.csv,
// MANIFEST.json) into the configured output directory.
//
// Every artifact except MANIFEST.json is a pure function of the config and
// binary; MANIFEST.json additionally records the wall-clock time.

namespace oed {

struct RunResult {
  StabilityReport report;
  bool ok = false;                    // all runtime invariants held
  std::vector<std::string> problems;  // human-readable invariant failures
  std::string out_dir;
  std::vector<std::string> files;     // artifact names actually written
  double wall_seconds = 0.0;
};

// Runs the study and writes artifacts. Throws only on configuration or I/O
// errors; numerical invariant failures are reported via ok/problems and a
// FAILED status in the manifest (partial outputs are retained).
RunResult run_experiment(const ExperimentConfig& cfg);

// Serialization used for report.json (exposed for tests).
std::string report_to_json(const StabilityReport& report,
                           const ExperimentConfig& cfg,
                           const std::vector<std::string>& problems, bool ok);

// rates.csv content: header
// N,sup_utility_error,sup_l2_distance,argmax_d1,argmax_d2,U_N_at_argmax,K_estimate
// and one row per ladder level, numbers printed with %.17g.
std::string rates_csv(const StabilityReport& report);

// utility_surface_N<k>.csv content for one level: header d1,d2,U,U_N,abs_err.
std::string utility_surface_csv(const StabilityReport& report,
                                const DesignGrid& grid, std::size_t level_idx);

// Runtime invariant evaluation shared by run_experiment and tests.
std::vector<std::string> collect_problems(const StabilityReport& report,
                                          const ExperimentConfig& cfg);

}  // namespace oed
