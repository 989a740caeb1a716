#include "oed/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "oed/model.hpp"
#include "oed/surrogate.hpp"

namespace oed {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument(msg);
}

const json& member(const json& obj, const std::string& key) {
  return obj.at(key);
}

double get_num(const json& v, const std::string& key) {
  if (!v.is_number()) bad("config key '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad("config key '" + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& v, const std::string& key) {
  if (!v.is_string()) bad("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad("config key '" + key + "' must be an array");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(get_int(e, key));
  return out;
}

std::vector<double> get_num_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_num(e, key));
  return out;
}

Eigen::VectorXd get_vec(const json& v, const std::string& key) {
  const std::vector<double> list = get_num_list(v, key);
  Eigen::VectorXd out(static_cast<Eigen::Index>(list.size()));
  for (std::size_t i = 0; i < list.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = list[i];
  return out;
}

void apply_design_grid(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object()) bad("config key 'design_grid' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "nodes_per_axis")
      cfg.grid_nodes_per_axis = get_int(value, key);
    else if (key == "lower")
      cfg.design_lower = get_vec(value, key);
    else if (key == "upper")
      cfg.design_upper = get_vec(value, key);
    else
      bad("unknown config key 'design_grid." + key + "'");
  }
}

void apply_fidelity(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object()) bad("config key 'quadrature.fidelity' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "enabled")
      cfg.fidelity_enabled = get_bool(value, key);
    else if (key == "prior_nodes")
      cfg.fidelity_prior_nodes = get_int(value, key);
    else if (key == "prior_level")
      cfg.fidelity_prior_level = get_int(value, key);
    else if (key == "noise_nodes")
      cfg.fidelity_noise_nodes = get_int(value, key);
    else if (key == "noise_level")
      cfg.fidelity_noise_level = get_int(value, key);
    else
      bad("unknown config key 'quadrature.fidelity." + key + "'");
  }
}

void apply_quadrature(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object()) bad("config key 'quadrature' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "prior_nodes")
      cfg.prior_nodes = get_int(value, key);
    else if (key == "prior_level")
      cfg.prior_level = get_int(value, key);
    else if (key == "noise_nodes")
      cfg.noise_nodes = get_int(value, key);
    else if (key == "noise_level")
      cfg.noise_level = get_int(value, key);
    else if (key == "distance_nodes")
      cfg.distance_nodes = get_int(value, key);
    else if (key == "evidence_nodes")
      cfg.evidence_nodes = get_int(value, key);
    else if (key == "projection_nodes")
      cfg.projection_nodes = get_int(value, key);
    else if (key == "fidelity")
      apply_fidelity(value, cfg);
    else
      bad("unknown config key 'quadrature." + key + "'");
  }
}

void apply_checks(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object()) bad("config key 'checks' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "evidence")
      cfg.evidence_checks = get_bool(value, key);
    else if (key == "evidence_ladder_value")
      cfg.evidence_ladder_value = get_int(value, key);
    else if (key == "rate_floor")
      cfg.rate_floor = get_num(value, key);
    else if (key == "correction_q")
      cfg.correction_q = get_num(value, key);
    else if (key == "bound_slack")
      cfg.bound_slack = get_num(value, key);
    else
      bad("unknown config key 'checks." + key + "'");
  }
}

void apply_heat(const json& obj, ExperimentConfig& cfg) {
  if (!obj.is_object()) bad("config key 'heat' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "spatial_n")
      cfg.heat.spatial_n = get_int(value, key);
    else if (key == "dt")
      cfg.heat.dt = get_num(value, key);
    else if (key == "bdf_order")
      cfg.heat.bdf_order = get_int(value, key);
    else if (key == "t_final")
      cfg.heat.t_final = get_num(value, key);
    else if (key == "obs_times")
      cfg.heat.obs_times = get_num_list(value, key);
    else if (key == "source_strength")
      cfg.heat.source_strength = get_num(value, key);
    else if (key == "source_width")
      cfg.heat.source_width = get_num(value, key);
    else if (key == "source_cutoff")
      cfg.heat.source_cutoff = get_num(value, key);
    else
      bad("unknown config key 'heat." + key + "'");
  }
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

ObservationFn as_fn(const ForwardModel& m) {
  return [m](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    return m(x, d);
  };
}

ObservationFn as_fn(const Surrogate& s) {
  return [s](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    return s(x, d);
  };
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"example1_scalar", "analytic_plx", "analytic_sparse", "heat_pce"};
}

StudyKind study_kind_from_name(const std::string& name) {
  if (name == "example1_scalar") return StudyKind::Example1Scalar;
  if (name == "analytic_plx") return StudyKind::AnalyticPlx;
  if (name == "analytic_sparse") return StudyKind::AnalyticSparse;
  if (name == "heat_pce") return StudyKind::HeatPce;
  bad("unknown study '" + name + "'");
}

std::string study_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::Example1Scalar: return "example1_scalar";
    case StudyKind::AnalyticPlx: return "analytic_plx";
    case StudyKind::AnalyticSparse: return "analytic_sparse";
    case StudyKind::HeatPce: return "heat_pce";
  }
  bad("invalid study kind");
}

ScaleKind scale_kind_from_name(const std::string& name) {
  if (name == "desk") return ScaleKind::Desk;
  if (name == "paper") return ScaleKind::Paper;
  bad("unknown scale '" + name + "' (expected 'desk' or 'paper')");
}

std::string scale_name(ScaleKind kind) {
  return kind == ScaleKind::Desk ? "desk" : "paper";
}

ExperimentConfig preset_config(StudyKind study, ScaleKind scale) {
  const bool paper = scale == ScaleKind::Paper;
  ExperimentConfig cfg;
  cfg.study = study;
  cfg.scale = scale;
  switch (study) {
    case StudyKind::Example1Scalar:
      cfg.ladder = paper ? std::vector<int>{1, 2, 3, 4, 5, 6}
                         : std::vector<int>{1, 2, 3, 4};
      cfg.noise_variance = 1.0;
      cfg.scalar_a = 1.0;
      cfg.prior_nodes = paper ? 128 : 64;
      cfg.noise_nodes = paper ? 128 : 64;
      cfg.distance_nodes = paper ? 256 : 128;
      cfg.fidelity_enabled = true;
      cfg.fidelity_prior_nodes = paper ? 192 : 96;
      cfg.fidelity_noise_nodes = paper ? 192 : 96;
      cfg.evidence_checks = true;
      break;
    case StudyKind::AnalyticPlx:
      cfg.ladder = {4, 8, 16, 32, 64, 128};
      cfg.grid_nodes_per_axis = paper ? 21 : 11;
      cfg.design_lower = vec2(0.0, 0.0);
      cfg.design_upper = vec2(1.0, 1.0);
      cfg.noise_variance = 1e-4;
      cfg.prior_nodes = paper ? 251 : 201;
      cfg.noise_level = paper ? 6 : 5;
      cfg.distance_nodes = 1001;
      // The fidelity pass keeps the prior rule (it defines the discrete prior
      // measure shared by the reference and every surrogate, so its bias
      // cancels in the error surface) and refines the data-space rule, the
      // genuinely approximating integral.
      cfg.fidelity_enabled = true;
      cfg.fidelity_prior_nodes = paper ? 251 : 201;
      cfg.fidelity_noise_level = paper ? 7 : 6;
      cfg.evidence_checks = true;
      cfg.evidence_ladder_value = 8;
      break;
    case StudyKind::AnalyticSparse:
      cfg.ladder = {2, 3, 4, 5, 6};
      cfg.grid_nodes_per_axis = paper ? 31 : 11;
      cfg.design_lower = vec2(0.2, 0.2);
      cfg.design_upper = vec2(1.0, 1.0);
      cfg.noise_variance = 1e-4;
      cfg.prior_nodes = paper ? 251 : 201;
      cfg.noise_level = paper ? 6 : 5;
      cfg.distance_nodes = 1001;
      cfg.correction_q = 6.0;
      break;
    case StudyKind::HeatPce:
      cfg.ladder = paper ? std::vector<int>{2, 6, 14}
                         : std::vector<int>{2, 4, 6};
      cfg.grid_nodes_per_axis = paper ? 21 : 11;
      cfg.design_lower = vec2(0.1, 0.1);
      cfg.design_upper = vec2(0.9, 0.9);
      cfg.noise_variance = 0.01;
      cfg.prior_level = paper ? 7 : 5;
      cfg.noise_level = paper ? 3 : 2;
      cfg.distance_nodes = paper ? 41 : 25;
      // The sparse prior rule carries signed weights, so the evidence
      // mixture needs its own positive tensor rule.
      cfg.evidence_nodes = paper ? 33 : 17;
      // Tensorized Gauss-Legendre projection: 9 nodes per axis already puts
      // the coefficient-quadrature error well below the degree-6 truncation
      // error (11 and 13 nodes move the measured distances by < 0.5%).
      cfg.projection_nodes = paper ? 17 : 9;
      if (paper) {
        cfg.heat.spatial_n = 81;
        cfg.heat.dt = 1.0 / 800.0;
      }
      break;
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.ladder.empty()) bad("ladder is empty");
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
    if (cfg.ladder[i] <= cfg.ladder[i - 1]) bad("ladder not increasing");
  if (cfg.threads < 0) bad("threads must be >= 0");
  if (!(cfg.noise_variance > 0.0)) bad("noise_variance must be positive");
  if (!(cfg.rate_floor >= 0.0)) bad("rate_floor must be >= 0");
  if (!(cfg.bound_slack >= 0.0)) bad("bound_slack must be >= 0");
  if (cfg.pce_truncation != "total" && cfg.pce_truncation != "tensor")
    bad("pce_truncation must be 'total' or 'tensor'");
  if (cfg.evidence_ladder_value != -1) {
    bool found = false;
    for (int v : cfg.ladder) found = found || v == cfg.evidence_ladder_value;
    if (!found) bad("evidence_ladder_value is not a ladder entry");
  }

  const bool has_design = cfg.study != StudyKind::Example1Scalar;
  if (has_design) {
    if (cfg.grid_nodes_per_axis < 1) bad("design grid needs nodes_per_axis >= 1");
    if (cfg.design_lower.size() != 2 || cfg.design_upper.size() != 2)
      bad("design box must be two-dimensional");
    for (Eigen::Index a = 0; a < 2; ++a)
      if (!(cfg.design_lower[a] < cfg.design_upper[a]))
        bad("design box is empty along an axis");
  } else {
    if (cfg.grid_nodes_per_axis != 0 || cfg.design_lower.size() != 0 ||
        cfg.design_upper.size() != 0)
      bad("the scalar study has no design grid");
    for (int k : cfg.ladder)
      if (k < 0) bad("scalar ladder exponents must be >= 0");
  }

  if (cfg.evidence_nodes < 0) bad("evidence_nodes must be >= 0");

  switch (cfg.study) {
    case StudyKind::Example1Scalar:
      if (cfg.prior_nodes < 1 || cfg.noise_nodes < 1 || cfg.distance_nodes < 1)
        bad("the scalar study needs positive quadrature node counts");
      if (cfg.fidelity_enabled &&
          (cfg.fidelity_prior_nodes < 1 || cfg.fidelity_noise_nodes < 1))
        bad("fidelity node counts must be positive");
      if (cfg.evidence_nodes != 0)
        bad("evidence_nodes is only available for box-prior studies");
      break;
    case StudyKind::AnalyticPlx:
    case StudyKind::AnalyticSparse:
      if (cfg.prior_nodes < 2) bad("prior_nodes must be >= 2");
      if (cfg.noise_level < 0) bad("noise_level must be >= 0");
      if (cfg.distance_nodes < 2) bad("distance_nodes must be >= 2");
      if (cfg.fidelity_enabled &&
          (cfg.fidelity_prior_nodes < 2 || cfg.fidelity_noise_level < 0))
        bad("fidelity quadrature settings are incomplete");
      for (int n : cfg.ladder)
        if (n < 1) bad("ladder entries must be positive");
      break;
    case StudyKind::HeatPce:
      if (cfg.prior_level < 0) bad("prior_level must be >= 0");
      if (cfg.noise_level < 0) bad("noise_level must be >= 0");
      if (cfg.distance_nodes < 2) bad("distance_nodes must be >= 2");
      if (cfg.projection_nodes < 1) bad("projection_nodes must be >= 1");
      for (int deg : cfg.ladder)
        if (deg < 0) bad("degrees must be >= 0");
      if (cfg.fidelity_enabled &&
          (cfg.fidelity_prior_level < 0 || cfg.fidelity_noise_level < 0))
        bad("fidelity quadrature settings are incomplete");
      cfg.heat.validate();
      break;
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config root must be a JSON object");
  if (!j.contains("study")) bad("config is missing required key 'study'");

  const StudyKind study = study_kind_from_name(get_str(member(j, "study"), "study"));
  ScaleKind scale = ScaleKind::Desk;
  if (j.contains("scale"))
    scale = scale_kind_from_name(get_str(member(j, "scale"), "scale"));

  ExperimentConfig cfg = preset_config(study, scale);

  for (const auto& [key, value] : j.items()) {
    if (key == "study" || key == "scale") continue;
    if (key == "output_dir")
      cfg.output_dir = get_str(value, key);
    else if (key == "threads")
      cfg.threads = get_int(value, key);
    else if (key == "ladder")
      cfg.ladder = get_int_list(value, key);
    else if (key == "noise_variance")
      cfg.noise_variance = get_num(value, key);
    else if (key == "scalar_a")
      cfg.scalar_a = get_num(value, key);
    else if (key == "pce_truncation")
      cfg.pce_truncation = get_str(value, key);
    else if (key == "design_grid")
      apply_design_grid(value, cfg);
    else if (key == "quadrature")
      apply_quadrature(value, cfg);
    else if (key == "checks")
      apply_checks(value, cfg);
    else if (key == "heat")
      apply_heat(value, cfg);
    else
      bad("unknown config key '" + key + "'");
  }

  validate_config(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["study"] = study_name(cfg.study);
  j["scale"] = scale_name(cfg.scale);
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["ladder"] = cfg.ladder;
  j["noise_variance"] = cfg.noise_variance;
  j["scalar_a"] = cfg.scalar_a;
  j["pce_truncation"] = cfg.pce_truncation;
  json grid;
  grid["nodes_per_axis"] = cfg.grid_nodes_per_axis;
  grid["lower"] = std::vector<double>(cfg.design_lower.data(),
                                      cfg.design_lower.data() + cfg.design_lower.size());
  grid["upper"] = std::vector<double>(cfg.design_upper.data(),
                                      cfg.design_upper.data() + cfg.design_upper.size());
  j["design_grid"] = grid;
  json quad;
  quad["prior_nodes"] = cfg.prior_nodes;
  quad["prior_level"] = cfg.prior_level;
  quad["noise_nodes"] = cfg.noise_nodes;
  quad["noise_level"] = cfg.noise_level;
  quad["distance_nodes"] = cfg.distance_nodes;
  quad["evidence_nodes"] = cfg.evidence_nodes;
  quad["projection_nodes"] = cfg.projection_nodes;
  json fid;
  fid["enabled"] = cfg.fidelity_enabled;
  fid["prior_nodes"] = cfg.fidelity_prior_nodes;
  fid["prior_level"] = cfg.fidelity_prior_level;
  fid["noise_nodes"] = cfg.fidelity_noise_nodes;
  fid["noise_level"] = cfg.fidelity_noise_level;
  quad["fidelity"] = fid;
  j["quadrature"] = quad;
  json checks;
  checks["evidence"] = cfg.evidence_checks;
  checks["evidence_ladder_value"] = cfg.evidence_ladder_value;
  checks["rate_floor"] = cfg.rate_floor;
  checks["correction_q"] = cfg.correction_q;
  checks["bound_slack"] = cfg.bound_slack;
  j["checks"] = checks;
  json heat;
  heat["spatial_n"] = cfg.heat.spatial_n;
  heat["dt"] = cfg.heat.dt;
  heat["bdf_order"] = cfg.heat.bdf_order;
  heat["t_final"] = cfg.heat.t_final;
  heat["obs_times"] = cfg.heat.obs_times;
  heat["source_strength"] = cfg.heat.source_strength;
  heat["source_width"] = cfg.heat.source_width;
  heat["source_cutoff"] = cfg.heat.source_cutoff;
  j["heat"] = heat;
  return j.dump(2);
}

StudyPlan make_study_plan(const ExperimentConfig& cfg) {
  validate_config(cfg);
  StudyPlan plan;
  plan.name = study_name(cfg.study);
  plan.threads = cfg.threads > 0
                     ? cfg.threads
                     : std::max(1u, std::thread::hardware_concurrency());
  plan.evidence_checks = cfg.evidence_checks;
  plan.evidence_ladder_value = cfg.evidence_ladder_value;
  plan.rate_floor = cfg.rate_floor;
  plan.correction_q = cfg.correction_q;
  plan.bound_slack = cfg.bound_slack;
  plan.fidelity_check = cfg.fidelity_enabled;

  switch (cfg.study) {
    case StudyKind::Example1Scalar: {
      plan.model = scalar_linear(cfg.scalar_a);
      plan.noise = isotropic_gaussian(1, cfg.noise_variance);
      plan.prior_rule = gauss_hermite(cfg.prior_nodes);
      plan.noise_rule = gauss_hermite(cfg.noise_nodes);
      plan.l2_rule = gauss_hermite(cfg.distance_nodes);
      if (cfg.fidelity_enabled) {
        plan.fidelity_prior_rule = gauss_hermite(cfg.fidelity_prior_nodes);
        plan.fidelity_noise_rule = gauss_hermite(cfg.fidelity_noise_nodes);
      }
      const double a = cfg.scalar_a;
      plan.build_level = [a](int k) {
        const double n = std::ldexp(1.0, k);
        const ForwardModel m = scalar_linear(a + 1.0 / n);
        SurrogateLevel lvl;
        lvl.fn = as_fn(m);
        lvl.tag = m.tag;
        lvl.size_n = n;
        return lvl;
      };
      break;
    }
    case StudyKind::AnalyticPlx: {
      plan.model = analytic_model();
      plan.noise = isotropic_gaussian(2, cfg.noise_variance);
      plan.grid = uniform_design_grid(cfg.design_lower, cfg.design_upper,
                                      cfg.grid_nodes_per_axis);
      plan.prior_rule = trapezoid(cfg.prior_nodes, 0.0, 1.0);
      plan.noise_rule = smolyak(2, cfg.noise_level, gauss_hermite_family());
      plan.l2_rule = trapezoid(cfg.distance_nodes, 0.0, 1.0);
      if (cfg.fidelity_enabled) {
        plan.fidelity_prior_rule = trapezoid(cfg.fidelity_prior_nodes, 0.0, 1.0);
        plan.fidelity_noise_rule =
            smolyak(2, cfg.fidelity_noise_level, gauss_hermite_family());
      }
      if (cfg.evidence_nodes > 0)
        plan.evidence_rule = trapezoid(cfg.evidence_nodes, 0.0, 1.0);
      const ForwardModel model = plan.model;
      plan.build_level = [model](int n) {
        const Surrogate s = build_pl_x(model, n);
        SurrogateLevel lvl;
        lvl.fn = as_fn(s);
        lvl.tag = s.tag;
        lvl.size_n = n;
        return lvl;
      };
      break;
    }
    case StudyKind::AnalyticSparse: {
      plan.model = analytic_model();
      plan.noise = isotropic_gaussian(2, cfg.noise_variance);
      plan.grid = uniform_design_grid(cfg.design_lower, cfg.design_upper,
                                      cfg.grid_nodes_per_axis);
      plan.prior_rule = trapezoid(cfg.prior_nodes, 0.0, 1.0);
      plan.noise_rule = smolyak(2, cfg.noise_level, gauss_hermite_family());
      plan.l2_rule = trapezoid(cfg.distance_nodes, 0.0, 1.0);
      if (cfg.fidelity_enabled) {
        plan.fidelity_prior_rule = trapezoid(cfg.fidelity_prior_nodes, 0.0, 1.0);
        plan.fidelity_noise_rule =
            smolyak(2, cfg.fidelity_noise_level, gauss_hermite_family());
      }
      if (cfg.evidence_nodes > 0)
        plan.evidence_rule = trapezoid(cfg.evidence_nodes, 0.0, 1.0);
      Eigen::VectorXd lo3(3), hi3(3);
      lo3 << 0.0, cfg.design_lower;
      hi3 << 1.0, cfg.design_upper;
      const ForwardModel model = plan.model;
      plan.build_level = [model, lo3, hi3](int level) {
        const Surrogate s = build_sparse_multilinear(model, level, lo3, hi3);
        SurrogateLevel lvl;
        lvl.fn = as_fn(s);
        lvl.tag = s.tag;
        lvl.size_n = static_cast<double>(s.level_param);
        return lvl;
      };
      break;
    }
    case StudyKind::HeatPce: {
      plan.model = make_heat_model(cfg.heat);
      const int p = plan.model.data_dim;
      plan.noise = isotropic_gaussian(p, cfg.noise_variance);
      plan.grid = uniform_design_grid(cfg.design_lower, cfg.design_upper,
                                      cfg.grid_nodes_per_axis);
      plan.prior_rule =
          smolyak(2, cfg.prior_level, clenshaw_curtis_family(0.0, 1.0));
      plan.noise_rule = smolyak(p, cfg.noise_level, gauss_hermite_family());
      plan.l2_rule = tensor(trapezoid(cfg.distance_nodes, 0.0, 1.0),
                            trapezoid(cfg.distance_nodes, 0.0, 1.0));
      if (cfg.fidelity_enabled) {
        plan.fidelity_prior_rule = smolyak(2, cfg.fidelity_prior_level,
                                           clenshaw_curtis_family(0.0, 1.0));
        plan.fidelity_noise_rule =
            smolyak(p, cfg.fidelity_noise_level, gauss_hermite_family());
      }
      // The sparse prior rule carries signed combination weights; the evidence
      // mixture is a density approximation and needs an all-positive rule.
      if (cfg.evidence_nodes > 0)
        plan.evidence_rule = tensor(trapezoid(cfg.evidence_nodes, 0.0, 1.0),
                                    trapezoid(cfg.evidence_nodes, 0.0, 1.0));
      // The chaos expansion lives on the extended domain: the full unit
      // square for the sensor coordinates as well, not just the design box,
      // so the evaluation region stays clear of the projection-box boundary.
      Eigen::VectorXd lo4 = Eigen::VectorXd::Zero(4);
      Eigen::VectorXd hi4 = Eigen::VectorXd::Ones(4);
      const QuadratureRule gl1 = gauss_legendre(cfg.projection_nodes, 0.0, 1.0);
      const QuadratureRule projection =
          tensor(tensor(gl1, gl1), tensor(gl1, gl1));
      const PceTruncation trunc = cfg.pce_truncation == "tensor"
                                      ? PceTruncation::TensorDegree
                                      : PceTruncation::TotalDegree;
      const ForwardModel model = plan.model;
      plan.build_level = [model, projection, lo4, hi4, trunc](int degree) {
        const Surrogate s =
            build_pce(model, degree, projection, lo4, hi4, trunc);
        SurrogateLevel lvl;
        lvl.fn = as_fn(s);
        lvl.tag = s.tag;
        lvl.size_n = static_cast<double>(degree);
        return lvl;
      };
      break;
    }
  }
  plan.ladder = cfg.ladder;
  return plan;
}

}  // namespace oed
