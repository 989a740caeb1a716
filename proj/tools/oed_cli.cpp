// Command-line front end:
//   oed study run <config.json> [--out DIR] [--threads N]
//   oed study list-presets
//   oed quad check
//   oed eig eval [--config FILE | --study NAME [--scale S]] [--scalar-a A]
//                [--design d1,d2]
//   oed report slopes <rates.csv> [--floor F] [--correction-q Q]
//
// Exit codes: 0 success, 1 computation or invariant failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oed/config.hpp"
#include "oed/eig.hpp"
#include "oed/experiment.hpp"
#include "oed/quadrature.hpp"
#include "oed/stability.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// study run

int cmd_study_run(const std::string& config_path, const std::string& out_flag,
                  int threads_flag, bool threads_set) {
  oed::ExperimentConfig cfg = oed::parse_config_file(config_path);
  if (!out_flag.empty()) {
    cfg.output_dir = out_flag;
  } else if (const char* env = std::getenv("OED_OUTPUT_DIR")) {
    if (*env) cfg.output_dir = env;
  }
  if (threads_set) cfg.threads = threads_flag;

  oed::RunResult result = oed::run_experiment(cfg);

  std::cout << "study: " << oed::study_name(cfg.study) << " ("
            << oed::scale_name(cfg.scale) << ")\n";
  std::cout << "output: " << result.out_dir << "\n";
  std::cout << "levels: " << result.report.levels.size() << "\n";
  if (result.report.rates_defined) {
    std::printf("utility slope: %.6g\n", result.report.utility_rate.slope);
    std::printf("distance slope: %.6g\n", result.report.l2_rate.slope);
  }
  if (result.report.corrected_rate_defined) {
    std::printf("corrected utility slope: %.6g\n",
                result.report.utility_rate_corrected.slope);
  }
  std::printf("wall clock: %.3f s\n", result.wall_seconds);
  for (const std::string& p : result.problems)
    std::cout << "problem: " << p << "\n";
  std::cout << "status: " << (result.ok ? "ok" : "FAILED") << "\n";
  return result.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// quad check

struct QuadCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

double double_factorial(int k) {
  double v = 1.0;
  for (int i = k; i >= 2; i -= 2) v *= i;
  return v;
}

std::vector<QuadCheck> run_quad_checks() {
  std::vector<QuadCheck> checks;
  char buf[160];

  {  // Gauss-Hermite moment exactness up to degree 2n-1, n = 1..20.
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n) {
      oed::QuadratureRule r = oed::gauss_hermite(n);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double got = 0.0;
        double mass = 0.0;  // attainable precision scale for the signed sum
        for (Eigen::Index i = 0; i < r.size(); ++i) {
          double term = r.weights[i] * std::pow(r.nodes(i, 0), k);
          got += term;
          mass += std::abs(term);
        }
        double exact = (k % 2 == 0) ? double_factorial(k - 1) : 0.0;
        double scale = std::max(1.0, std::max(mass, std::abs(exact)));
        worst = std::max(worst, std::abs(got - exact) / scale);
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "normal moments 0..2n-1 for n<=20, worst rel err %.2e",
                  worst);
    checks.push_back({"gauss_hermite_exactness", worst < 1e-10, buf});
  }

  {  // Gauss-Legendre polynomial exactness on [0, 1].
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n) {
      oed::QuadratureRule r = oed::gauss_legendre(n, 0.0, 1.0);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double got = oed::integrate(
            r, [k](double x) { return std::pow(x, k); });
        double exact = 1.0 / (k + 1);
        worst = std::max(worst, std::abs(got - exact) / exact);
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "monomials 0..2n-1 on [0,1] for n<=20, worst rel err %.2e",
                  worst);
    checks.push_back({"gauss_legendre_exactness", worst < 1e-12, buf});
  }

  {  // Composite trapezoid converges at order 2 on a smooth integrand.
    std::vector<double> sizes, errs;
    const double pi = std::acos(-1.0);
    const double exact = 2.0 / pi;
    for (int n : {17, 33, 65, 129, 257}) {
      oed::QuadratureRule r = oed::trapezoid(n, 0.0, 1.0);
      double got =
          oed::integrate(r, [pi](double x) { return std::sin(pi * x); });
      sizes.push_back(static_cast<double>(n));
      errs.push_back(std::abs(got - exact));
    }
    oed::RateFit fit = oed::rate_fit(sizes, errs);
    std::snprintf(buf, sizeof(buf), "sin integrand error slope %.4f",
                  fit.slope);
    checks.push_back(
        {"trapezoid_order", std::abs(fit.slope + 2.0) < 0.05, buf});
  }

  {  // Clenshaw-Curtis levels are nested and integrate constants exactly.
    double worst_gap = 0.0;
    double worst_mass = 0.0;
    for (int level = 1; level <= 5; ++level) {
      oed::QuadratureRule lo = oed::clenshaw_curtis(level, -1.0, 1.0);
      oed::QuadratureRule hi = oed::clenshaw_curtis(level + 1, -1.0, 1.0);
      for (Eigen::Index i = 0; i < lo.size(); ++i) {
        double best = 1e300;
        for (Eigen::Index j = 0; j < hi.size(); ++j)
          best = std::min(best, std::abs(lo.nodes(i, 0) - hi.nodes(j, 0)));
        worst_gap = std::max(worst_gap, best);
      }
      worst_mass = std::max(worst_mass, std::abs(lo.weight_sum() - 2.0));
    }
    std::snprintf(buf, sizeof(buf),
                  "levels 1..6 nested within %.2e, mass err %.2e", worst_gap,
                  worst_mass);
    checks.push_back({"clenshaw_curtis_nesting",
                      worst_gap < 1e-13 && worst_mass < 1e-13, buf});
  }

  {  // Gaussian Smolyak rules keep unit mass and match low even moments.
    double worst = 0.0;
    for (int level = 1; level <= 4; ++level) {
      oed::QuadratureRule r =
          oed::smolyak(3, level, oed::gauss_hermite_family());
      worst = std::max(worst, std::abs(r.weight_sum() - 1.0));
      if (level >= 2) {
        for (int axis = 0; axis < 3; ++axis) {
          double m2 = 0.0;
          for (Eigen::Index i = 0; i < r.size(); ++i)
            m2 += r.weights[i] * r.nodes(i, axis) * r.nodes(i, axis);
          worst = std::max(worst, std::abs(m2 - 1.0));
        }
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "3d levels 1..4: mass and second moments within %.2e",
                  worst);
    checks.push_back({"smolyak_gaussian_moments", worst < 1e-12, buf});
  }

  {  // Box Smolyak rule: mass equals volume, affine integrands exact.
    oed::QuadratureRule r =
        oed::smolyak(2, 4, oed::clenshaw_curtis_family(0.0, 1.0));
    double mass_err = std::abs(r.weight_sum() - 1.0);
    double got = oed::integrate(r, [](const Eigen::VectorXd& x) {
      return 1.0 + 2.0 * x[0] - 0.5 * x[1];
    });
    double affine_err = std::abs(got - (1.0 + 1.0 - 0.25));
    std::snprintf(buf, sizeof(buf), "mass err %.2e, affine err %.2e", mass_err,
                  affine_err);
    checks.push_back(
        {"smolyak_box_mass", mass_err < 1e-12 && affine_err < 1e-12, buf});
  }

  {  // Affine remap preserves normalized mass on the target box.
    oed::QuadratureRule unit =
        oed::smolyak(2, 3, oed::gauss_legendre_family(0.0, 1.0));
    Eigen::VectorXd lo(2), hi(2);
    lo << 0.1, -2.0;
    hi << 0.9, 3.0;
    oed::QuadratureRule r = oed::affine_map_to_box(unit, lo, hi);
    double err = std::abs(r.weight_sum() - 0.8 * 5.0);
    std::snprintf(buf, sizeof(buf), "mapped mass err %.2e", err);
    checks.push_back({"affine_map_mass", err < 1e-12, buf});
  }

  return checks;
}

int cmd_quad_check() {
  std::vector<QuadCheck> checks = run_quad_checks();
  int failures = 0;
  for (const QuadCheck& c : checks) {
    std::printf("%s  %-28s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("%d/%zu checks passed\n",
              static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// eig eval

int cmd_eig_eval(const std::string& config_path, const std::string& study,
                 const std::string& scale, double scalar_a, bool scalar_a_set,
                 const std::vector<double>& design) {
  oed::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = oed::parse_config_file(config_path);
  } else {
    cfg = oed::preset_config(oed::study_kind_from_name(study),
                             oed::scale_kind_from_name(scale));
  }
  if (scalar_a_set) cfg.scalar_a = scalar_a;
  oed::validate_config(cfg);
  oed::StudyPlan plan = oed::make_study_plan(cfg);

  Eigen::VectorXd d(static_cast<Eigen::Index>(design.size()));
  for (std::size_t i = 0; i < design.size(); ++i)
    d[static_cast<Eigen::Index>(i)] = design[i];
  if (d.size() != plan.model.design_dim) {
    throw std::invalid_argument(
        "--design must have " + std::to_string(plan.model.design_dim) +
        " components for study " + oed::study_name(cfg.study) + ", got " +
        std::to_string(d.size()));
  }

  const oed::QuadratureRule* ev =
      plan.evidence_rule.size() > 0 ? &plan.evidence_rule : nullptr;
  oed::EigEstimate est = oed::expected_information_gain(
      plan.model, d, plan.prior_rule, plan.noise_rule, plan.noise, ev);

  json out;
  out["value"] = est.value;
  json darr = json::array();
  for (Eigen::Index i = 0; i < est.design.size(); ++i)
    darr.push_back(est.design[i]);
  out["design"] = std::move(darr);
  out["prior_nodes"] = static_cast<long long>(est.prior_nodes);
  out["noise_nodes"] = static_cast<long long>(est.noise_nodes);
  out["evidence_nodes"] = static_cast<long long>(est.evidence_nodes);
  out["tag"] = est.tag;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report slopes

int cmd_report_slopes(const std::string& csv_path, double floor,
                      double correction_q) {
  std::ifstream is(csv_path);
  if (!is) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty file");
  const std::string expected =
      "N,sup_utility_error,sup_l2_distance,argmax_d1,argmax_d2,"
      "U_N_at_argmax,K_estimate";
  if (line != expected)
    throw std::runtime_error("unexpected header in " + csv_path + ": " + line);

  std::vector<double> sizes, err_u, err_l2;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() < 3)
      throw std::runtime_error("short row in " + csv_path + ": " + line);
    sizes.push_back(cols[0]);
    err_u.push_back(cols[1]);
    err_l2.push_back(cols[2]);
  }

  oed::RateFit ufit = oed::rate_fit(sizes, err_u, floor, correction_q);
  oed::RateFit lfit = oed::rate_fit(sizes, err_l2, floor, 0.0);

  auto to_json = [](const oed::RateFit& f) {
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"residual_rms", f.residual_rms},
                {"points_used", f.points_used},
                {"excluded_indices", f.excluded_indices}};
  };
  json out;
  out["utility"] = to_json(ufit);
  out["l2"] = to_json(lfit);
  out["floor"] = floor;
  out["correction_q"] = correction_q;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Expected-information-gain studies for Gaussian observation models"};
  app.require_subcommand(1);

  // study
  CLI::App* study = app.add_subcommand("study", "run or list batch studies");
  study->require_subcommand(1);
  CLI::App* study_run =
      study->add_subcommand("run", "run a configured study and write artifacts");
  std::string run_config;
  std::string run_out;
  int run_threads = 0;
  study_run->add_option("config", run_config, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  study_run->add_option("--out", run_out,
                        "output directory (overrides config and "
                        "OED_OUTPUT_DIR)");
  CLI::Option* threads_opt = study_run->add_option(
      "--threads", run_threads, "worker threads (0 = hardware)");
  CLI::App* study_list =
      study->add_subcommand("list-presets", "print available preset names");

  // quad
  CLI::App* quad = app.add_subcommand("quad", "quadrature self-checks");
  quad->require_subcommand(1);
  CLI::App* quad_check =
      quad->add_subcommand("check", "run the exactness suite");

  // eig
  CLI::App* eig = app.add_subcommand("eig", "single utility evaluations");
  eig->require_subcommand(1);
  CLI::App* eig_eval = eig->add_subcommand(
      "eval", "evaluate the expected information gain at one design");
  std::string eval_config, eval_study = "example1_scalar", eval_scale = "desk";
  double eval_a = 1.0;
  std::vector<double> eval_design;
  eig_eval->add_option("--config", eval_config, "JSON config file")
      ->check(CLI::ExistingFile);
  eig_eval->add_option("--study", eval_study, "preset study name");
  eig_eval->add_option("--scale", eval_scale, "preset scale (desk|paper)");
  CLI::Option* a_opt = eig_eval->add_option(
      "--scalar-a", eval_a, "slope of the scalar linear model");
  eig_eval->add_option("--design", eval_design, "design point d1,d2")
      ->delimiter(',');

  // report
  CLI::App* report = app.add_subcommand("report", "post-process artifacts");
  report->require_subcommand(1);
  CLI::App* report_slopes = report->add_subcommand(
      "slopes", "fit convergence slopes from a rates.csv file");
  std::string slopes_csv;
  double slopes_floor = 0.0, slopes_q = 0.0;
  report_slopes->add_option("csv", slopes_csv, "rates.csv path")
      ->required()
      ->check(CLI::ExistingFile);
  report_slopes->add_option("--floor", slopes_floor,
                            "exclude errors at or below this floor");
  report_slopes->add_option("--correction-q", slopes_q,
                            "divide errors by (log N)^q before fitting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (study_run->parsed())
      return cmd_study_run(run_config, run_out, run_threads,
                           threads_opt->count() > 0);
    if (study_list->parsed()) {
      for (const std::string& name : oed::preset_names())
        std::cout << name << "\n";
      return 0;
    }
    if (quad_check->parsed()) return cmd_quad_check();
    if (eig_eval->parsed())
      return cmd_eig_eval(eval_config, eval_study, eval_scale, eval_a,
                          a_opt->count() > 0, eval_design);
    if (report_slopes->parsed())
      return cmd_report_slopes(slopes_csv, slopes_floor, slopes_q);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
