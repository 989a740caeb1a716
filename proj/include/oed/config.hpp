#pragma once

#include <string>
#include <vector>

#include "oed/heat.hpp"
#include "oed/stability.hpp"

// Experiment configuration: a JSON schema with one preset per study and a
// desk/paper scale switch. Parsing is strict — unknown keys are errors — and
// every preset fills in all knobs so a minimal {"study": ...} file runs.

namespace oed {

enum class StudyKind { Example1Scalar, AnalyticPlx, AnalyticSparse, HeatPce };
enum class ScaleKind { Desk, Paper };

struct ExperimentConfig {
  StudyKind study = StudyKind::Example1Scalar;
  ScaleKind scale = ScaleKind::Desk;
  std::string output_dir = "out";
  int threads = 0;  // 0 = use all hardware threads

  std::vector<int> ladder;  // knot counts, grid levels, degrees, or exponents

  // Design grid (ignored by the scalar study, which has no design variable).
  int grid_nodes_per_axis = 0;
  Eigen::VectorXd design_lower, design_upper;

  double noise_variance = 1.0;  // isotropic noise covariance diagonal
  double scalar_a = 1.0;        // slope of the scalar linear model

  // Quadrature sizes. 1D studies use node counts; multivariate rules use
  // Smolyak total levels.
  int prior_nodes = 0;
  int prior_level = 0;
  int noise_nodes = 0;
  int noise_level = 0;
  int distance_nodes = 0;
  // Separate positive rule for the evidence mixture, as nodes per parameter
  // axis (0 = share the prior rule). Required when the prior rule carries
  // signed sparse-combination weights.
  int evidence_nodes = 0;
  // Chaos-projection rule (heat study): Gauss-Legendre nodes per axis of the
  // tensorized rule over the extended 4D domain. A positive tensor rule keeps
  // the discrete projection stable; signed sparse rules of affordable size
  // let the quadrature error of the higher-degree coefficients dominate.
  int projection_nodes = 0;
  std::string pce_truncation = "total";  // or "tensor"

  bool fidelity_enabled = false;
  int fidelity_prior_nodes = 0;
  int fidelity_prior_level = 0;
  int fidelity_noise_nodes = 0;
  int fidelity_noise_level = 0;

  bool evidence_checks = false;
  int evidence_ladder_value = -1;  // -1 = first ladder entry
  double rate_floor = 1e-7;
  double correction_q = 0.0;
  double bound_slack = 1e-8;

  HeatConfig heat;
};

// Canonical study names: example1_scalar, analytic_plx, analytic_sparse,
// heat_pce.
std::vector<std::string> preset_names();
StudyKind study_kind_from_name(const std::string& name);
std::string study_name(StudyKind kind);
ScaleKind scale_kind_from_name(const std::string& name);
std::string scale_name(ScaleKind kind);

// All knobs filled for one study at one scale.
ExperimentConfig preset_config(StudyKind study, ScaleKind scale);

// Strict JSON parsing: starts from the preset selected by "study"/"scale",
// applies overrides, rejects unknown keys, and validates the result.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Full canonical echo of a config (every knob explicit, keys sorted).
std::string config_to_json(const ExperimentConfig& cfg);

// Throws std::invalid_argument on inconsistent settings ("ladder not
// increasing", dimension mismatches, non-positive sizes).
void validate_config(const ExperimentConfig& cfg);

// Materializes models, rules, grids, and the surrogate ladder.
StudyPlan make_study_plan(const ExperimentConfig& cfg);

}  // namespace oed
