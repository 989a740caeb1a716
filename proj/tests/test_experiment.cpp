#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oed/config.hpp"
#include "oed/eig.hpp"
#include "oed/experiment.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(static_cast<bool>(is));
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("oed_exp_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

oed::ExperimentConfig scalar_config(const std::string& out_dir) {
  oed::ExperimentConfig cfg =
      oed::preset_config(oed::StudyKind::Example1Scalar, oed::ScaleKind::Desk);
  cfg.output_dir = out_dir;
  cfg.threads = 1;
  return cfg;
}

std::vector<std::string> split_lines(const std::string& body) {
  std::vector<std::string> lines;
  std::stringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("scalar study run writes complete, self-consistent artifacts") {
  std::filesystem::path dir = fresh_dir("scalar");
  oed::ExperimentConfig cfg = scalar_config(dir.string());
  oed::RunResult result = oed::run_experiment(cfg);

  CHECK(result.ok);
  CHECK(result.problems.empty());
  CHECK(result.report.levels.size() == 4);

  for (const std::string& name :
       {std::string("rates.csv"), std::string("report.json"),
        std::string("MANIFEST.json"), std::string("utility_surface_N2.csv"),
        std::string("utility_surface_N4.csv"),
        std::string("utility_surface_N8.csv"),
        std::string("utility_surface_N16.csv")}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / name), name);
  }

  // rates.csv: header plus one row per level, errors matching the exact
  // perturbed-slope formula.
  std::vector<std::string> lines = split_lines(slurp(dir / "rates.csv"));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "N,sup_utility_error,sup_l2_distance,argmax_d1,argmax_d2,"
        "U_N_at_argmax,K_estimate");
  for (int k = 1; k <= 4; ++k) {
    std::stringstream ss(lines[static_cast<std::size_t>(k)]);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    REQUIRE(cols.size() == 7);
    double n = std::ldexp(1.0, k);
    CHECK(cols[0] == n);
    double exact = oed::eig_error_example1(1.0, 1.0 + 1.0 / n);
    CHECK(std::abs(cols[1] - exact) < 2e-6);
    CHECK(cols[3] == 0.0);  // design-free study pads the design columns
    CHECK(cols[4] == 0.0);
    CHECK(cols[6] > 0.0);
  }

  // report.json reflects the run.
  json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["study"] == "example1_scalar");
  CHECK(rep["ok"] == true);
  CHECK(rep["levels"].size() == 4);
  CHECK(rep["rates_defined"] == true);
  CHECK(rep["evidence_checks_ok"] == true);
  CHECK(rep["evidence_checks"].size() == 1);  // single grid point
  CHECK(std::abs(rep["u_at_true_argmax"].get<double>() -
                 0.5 * std::log(2.0)) < 1e-6);
  CHECK(rep["fidelity_checked"] == true);

  // Surface files carry one row (single design point) with consistent error.
  std::vector<std::string> surf =
      split_lines(slurp(dir / "utility_surface_N2.csv"));
  REQUIRE(surf.size() == 2);
  CHECK(surf[0] == "d1,d2,U,U_N,abs_err");
  {
    std::stringstream ss(surf[1]);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    REQUIRE(cols.size() == 5);
    CHECK(cols[0] == 0.0);
    CHECK(cols[1] == 0.0);
    CHECK(std::abs(std::abs(cols[2] - cols[3]) - cols[4]) < 1e-15);
  }

  // MANIFEST: canonical config echo, status, node counts.
  json man = json::parse(slurp(dir / "MANIFEST.json"));
  CHECK(man["status"] == "ok");
  CHECK(man["config"]["study"] == "example1_scalar");
  CHECK(man["node_counts"]["design_points"] == 1);
  CHECK(man["node_counts"]["prior_nodes"] == 64);
  CHECK(man["wall_clock_seconds"].get<double>() > 0.0);
  CHECK(man["files"].size() == result.files.size());

  std::filesystem::remove_all(dir);
}

TEST_CASE("rerun produces byte-identical data artifacts") {
  std::filesystem::path dir1 = fresh_dir("rerun1");
  std::filesystem::path dir2 = fresh_dir("rerun2");

  oed::ExperimentConfig cfg1 = scalar_config(dir1.string());
  oed::ExperimentConfig cfg2 = scalar_config(dir2.string());
  cfg2.threads = 2;  // thread count must not influence any data artifact

  oed::run_experiment(cfg1);
  oed::run_experiment(cfg2);

  CHECK(slurp(dir1 / "rates.csv") == slurp(dir2 / "rates.csv"));
  CHECK(slurp(dir1 / "utility_surface_N16.csv") ==
        slurp(dir2 / "utility_surface_N16.csv"));

  // report.json differs only in nothing: it contains no timing, so it must
  // also be byte-identical across thread counts.
  CHECK(slurp(dir1 / "report.json") == slurp(dir2 / "report.json"));

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("invariant failures mark the manifest FAILED and keep artifacts") {
  std::filesystem::path dir = fresh_dir("failmark");
  oed::ExperimentConfig cfg = scalar_config(dir.string());

  // Force a failure through the public surface: a one-node fidelity prior
  // collapses the evidence onto the likelihood, so the recomputed reference
  // utility is 0 and the fidelity shift far exceeds the smallest level error.
  cfg.fidelity_prior_nodes = 1;
  cfg.fidelity_noise_nodes = 1;

  oed::RunResult result = oed::run_experiment(cfg);
  CHECK_FALSE(result.ok);
  REQUIRE_FALSE(result.problems.empty());
  bool mentions_fidelity = false;
  for (const std::string& p : result.problems)
    if (p.find("fidelity") != std::string::npos) mentions_fidelity = true;
  CHECK(mentions_fidelity);

  json man = json::parse(slurp(dir / "MANIFEST.json"));
  CHECK(man["status"] == "FAILED");
  CHECK(man["problems"].size() == result.problems.size());
  CHECK(std::filesystem::exists(dir / "rates.csv"));
  CHECK(std::filesystem::exists(dir / "report.json"));

  json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["ok"] == false);

  std::filesystem::remove_all(dir);
}

TEST_CASE("collect_problems flags bound violations and rate failures") {
  oed::ExperimentConfig cfg = scalar_config("unused");
  oed::StabilityReport rep;
  rep.rates_defined = true;
  rep.maximizer_value_ok = true;
  rep.evidence_checks_ok = true;

  oed::LevelRecord good;
  good.size_n = 2;
  good.bound_ok = true;
  oed::LevelRecord bad;
  bad.size_n = 4;
  bad.bound_ok = false;
  bad.worst_bound_gap = 0.25;
  oed::LevelRecord broken;
  broken.size_n = 8;
  broken.failure = "synthetic";
  rep.levels = {good, bad, broken};

  std::vector<std::string> problems = oed::collect_problems(rep, cfg);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].find("N=4") != std::string::npos);
  CHECK(problems[0].find("bound") != std::string::npos);
  CHECK(problems[1].find("N=8") != std::string::npos);
  CHECK(problems[1].find("synthetic") != std::string::npos);

  // Undefined rates with a >=3 ladder are a problem; with a short ladder
  // they are only flagged.
  rep.levels = {good};
  rep.rates_defined = false;
  rep.rate_failure = "too few points";
  cfg.ladder = {1, 2, 3, 4};
  problems = oed::collect_problems(rep, cfg);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("too few points") != std::string::npos);
  cfg.ladder = {1, 2};
  CHECK(oed::collect_problems(rep, cfg).empty());
}

TEST_CASE("csv serializers reject inconsistent inputs") {
  oed::StabilityReport rep;
  oed::LevelRecord lvl;
  lvl.size_n = 4;
  lvl.failure = "dead";
  rep.levels = {lvl};
  oed::DesignGrid grid;  // zero-dim grid, one point

  CHECK_THROWS_AS(oed::utility_surface_csv(rep, grid, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(oed::utility_surface_csv(rep, grid, 5),
                  std::invalid_argument);
}
