#include "oed/experiment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace oed {

namespace {

using nlohmann::json;

// Fixed-format printing for CSV artifacts: 17 significant digits round-trip
// doubles exactly, so reruns produce byte-identical files.
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Short form for file names (ladder sizes are small integers).
std::string fmt_size(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json rate_to_json(const RateFit& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"residual_rms", fit.residual_rms},
              {"points_used", fit.points_used},
              {"excluded_indices", fit.excluded_indices}};
}

// Pads dims 0/1 designs to two columns so every study shares one CSV schema.
void design_columns(const Eigen::VectorXd& d, double out[2]) {
  out[0] = d.size() > 0 ? d[0] : 0.0;
  out[1] = d.size() > 1 ? d[1] : 0.0;
}

}  // namespace

std::vector<std::string> collect_problems(const StabilityReport& report,
                                          const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  for (const LevelRecord& lvl : report.levels) {
    if (!lvl.failure.empty()) {
      problems.push_back("level N=" + fmt_size(lvl.size_n) +
                         " failed: " + lvl.failure);
      continue;
    }
    if (!lvl.bound_ok) {
      problems.push_back("perturbation bound violated at N=" +
                         fmt_size(lvl.size_n) +
                         " (worst gap = " + fmt17(lvl.worst_bound_gap) + ")");
    }
  }
  if (!report.maximizer_value_ok) {
    problems.push_back(
        "maximizer value gap exceeded twice the sup utility error");
  }
  if (cfg.evidence_checks && !report.evidence_checks_ok) {
    std::string msg = "evidence divergence check failed";
    if (!report.evidence_failure.empty())
      msg += ": " + report.evidence_failure;
    problems.push_back(msg);
  }
  if (report.fidelity_checked) {
    double min_err = std::numeric_limits<double>::infinity();
    for (const LevelRecord& lvl : report.levels)
      if (lvl.failure.empty())
        min_err = std::min(min_err, lvl.sup_utility_error);
    if (std::isfinite(min_err) && !(report.fidelity_shift < min_err)) {
      problems.push_back("reference fidelity shift " +
                         fmt17(report.fidelity_shift) +
                         " is not below the smallest level error " +
                         fmt17(min_err));
    }
  }
  if (cfg.ladder.size() >= 3 && !report.rates_defined) {
    problems.push_back("rate fit failed: " + report.rate_failure);
  }
  if (cfg.study == StudyKind::AnalyticPlx && report.rates_defined) {
    double gap = std::abs(report.utility_rate.slope - report.l2_rate.slope);
    if (gap > 0.5) {
      problems.push_back(
          "utility and distance convergence slopes differ by " + fmt17(gap) +
          " (limit 0.5)");
    }
  }
  return problems;
}

std::string report_to_json(const StabilityReport& report,
                           const ExperimentConfig& cfg,
                           const std::vector<std::string>& problems,
                           bool ok) {
  json doc;
  doc["study"] = study_name(cfg.study);
  doc["scale"] = scale_name(cfg.scale);
  doc["name"] = report.name;
  doc["ok"] = ok;
  doc["problems"] = problems;

  doc["u_true"] = vec_to_json(report.u_true);
  doc["argmax_true"] = vec_to_json(report.argmax_true);
  doc["argmax_true_flat"] = static_cast<long long>(report.argmax_true_flat);
  doc["u_at_true_argmax"] = report.u_at_true_argmax;
  doc["assumption_fourth_moment"] = report.assumption_fourth_moment;

  json levels = json::array();
  for (const LevelRecord& lvl : report.levels) {
    json l;
    l["ladder_value"] = lvl.ladder_value;
    l["size_n"] = lvl.size_n;
    l["sup_utility_error"] = lvl.sup_utility_error;
    l["sup_l2_distance"] = lvl.sup_l2_distance;
    l["argmax_design"] = vec_to_json(lvl.argmax_design);
    l["argmax_flat"] = static_cast<long long>(lvl.argmax_flat);
    l["u_n_at_argmax"] = lvl.u_n_at_argmax;
    l["k_estimate"] = lvl.k_estimate;
    l["max_expected_kl"] = lvl.max_expected_kl;
    l["worst_bound_gap"] = lvl.worst_bound_gap;
    l["bound_ok"] = lvl.bound_ok;
    l["value_gap_at_argmax"] = lvl.value_gap_at_argmax;
    l["failure"] = lvl.failure;
    l["u_surrogate"] = vec_to_json(lvl.u_surrogate);
    l["per_design_error"] = vec_to_json(lvl.per_design_error);
    levels.push_back(std::move(l));
  }
  doc["levels"] = std::move(levels);

  doc["rates_defined"] = report.rates_defined;
  doc["rate_failure"] = report.rate_failure;
  if (report.rates_defined) {
    doc["utility_rate"] = rate_to_json(report.utility_rate);
    doc["l2_rate"] = rate_to_json(report.l2_rate);
  } else {
    doc["utility_rate"] = nullptr;
    doc["l2_rate"] = nullptr;
  }
  doc["utility_rate_corrected"] = report.corrected_rate_defined
                                      ? rate_to_json(report.utility_rate_corrected)
                                      : json(nullptr);

  doc["argmax_stable_from"] = report.argmax_stable_from;
  doc["maximizer_value_ok"] = report.maximizer_value_ok;

  json checks = json::array();
  for (const EvidenceKlRecord& rec : report.evidence_checks) {
    checks.push_back(json{{"design", vec_to_json(rec.design)},
                          {"lhs", rec.lhs},
                          {"rhs", rec.rhs}});
  }
  doc["evidence_checks"] = std::move(checks);
  doc["evidence_checks_ok"] = report.evidence_checks_ok;
  doc["evidence_failure"] = report.evidence_failure;

  doc["fidelity_checked"] = report.fidelity_checked;
  doc["fidelity_shift"] = report.fidelity_shift;

  return doc.dump(2) + "\n";
}

std::string rates_csv(const StabilityReport& report) {
  std::string out =
      "N,sup_utility_error,sup_l2_distance,argmax_d1,argmax_d2,"
      "U_N_at_argmax,K_estimate\n";
  for (const LevelRecord& lvl : report.levels) {
    double d[2];
    design_columns(lvl.argmax_design, d);
    out += fmt17(lvl.size_n);
    out += ',';
    out += fmt17(lvl.sup_utility_error);
    out += ',';
    out += fmt17(lvl.sup_l2_distance);
    out += ',';
    out += fmt17(d[0]);
    out += ',';
    out += fmt17(d[1]);
    out += ',';
    out += fmt17(lvl.u_n_at_argmax);
    out += ',';
    out += fmt17(lvl.k_estimate);
    out += '\n';
  }
  return out;
}

std::string utility_surface_csv(const StabilityReport& report,
                                const DesignGrid& grid,
                                std::size_t level_idx) {
  if (level_idx >= report.levels.size())
    throw std::invalid_argument("utility_surface_csv: level index out of range");
  const LevelRecord& lvl = report.levels[level_idx];
  if (!lvl.failure.empty())
    throw std::invalid_argument(
        "utility_surface_csv: level has no surface (failed)");
  if (lvl.u_surrogate.size() != grid.size() ||
      report.u_true.size() != grid.size())
    throw std::invalid_argument("utility_surface_csv: grid size mismatch");

  std::string out = "d1,d2,U,U_N,abs_err\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    double d[2];
    Eigen::VectorXd pt = grid.point(i);
    design_columns(pt, d);
    out += fmt17(d[0]);
    out += ',';
    out += fmt17(d[1]);
    out += ',';
    out += fmt17(report.u_true[i]);
    out += ',';
    out += fmt17(lvl.u_surrogate[i]);
    out += ',';
    out += fmt17(lvl.per_design_error[i]);
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << body;
  if (!os.good())
    throw std::runtime_error("write failed: " + path.string());
}

json manifest_json(const ExperimentConfig& cfg, const StudyPlan& plan,
                   const RunResult& result) {
  json m;
  m["config"] = json::parse(config_to_json(cfg));
  m["status"] = result.ok ? "ok" : "FAILED";
  m["problems"] = result.problems;
  m["wall_clock_seconds"] = result.wall_seconds;
  m["files"] = result.files;

  json versions;
  versions["compiler"] = __VERSION__;
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  m["versions"] = std::move(versions);

  json counts;
  counts["design_points"] = static_cast<long long>(plan.grid.size());
  counts["prior_nodes"] = static_cast<long long>(plan.prior_rule.size());
  counts["noise_nodes"] = static_cast<long long>(plan.noise_rule.size());
  counts["distance_nodes"] = static_cast<long long>(plan.l2_rule.size());
  if (plan.fidelity_check) {
    counts["fidelity_prior_nodes"] =
        static_cast<long long>(plan.fidelity_prior_rule.size());
    counts["fidelity_noise_nodes"] =
        static_cast<long long>(plan.fidelity_noise_rule.size());
  }
  if (plan.evidence_rule.size() > 0)
    counts["evidence_nodes"] = static_cast<long long>(plan.evidence_rule.size());
  m["node_counts"] = std::move(counts);
  return m;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  StudyPlan plan = make_study_plan(cfg);

  RunResult result;
  result.out_dir = cfg.output_dir;

  auto t0 = std::chrono::steady_clock::now();
  result.report = run_study(plan);
  auto t1 = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  result.problems = collect_problems(result.report, cfg);
  result.ok = result.problems.empty();

  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  write_file(dir / "rates.csv", rates_csv(result.report));
  result.files.push_back("rates.csv");

  for (std::size_t i = 0; i < result.report.levels.size(); ++i) {
    const LevelRecord& lvl = result.report.levels[i];
    if (!lvl.failure.empty()) continue;
    std::string name =
        "utility_surface_N" + fmt_size(lvl.size_n) + ".csv";
    write_file(dir / name, utility_surface_csv(result.report, plan.grid, i));
    result.files.push_back(name);
  }

  write_file(dir / "report.json",
             report_to_json(result.report, cfg, result.problems, result.ok));
  result.files.push_back("report.json");

  json manifest = manifest_json(cfg, plan, result);
  result.files.push_back("MANIFEST.json");
  manifest["files"] = result.files;
  write_file(dir / "MANIFEST.json", manifest.dump(2) + "\n");

  return result;
}

}  // namespace oed
