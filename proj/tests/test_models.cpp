#include "oed/heat.hpp"
#include "oed/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace oed;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST_CASE("analytic_model: pinned values") {
  const ForwardModel m = analytic_model();
  CHECK(m.param_dim == 1);
  CHECK(m.design_dim == 2);
  CHECK(m.data_dim == 2);
  const Eigen::VectorXd g1 = m(vec1(1.0), vec2(0.2, 0.2));
  CHECK(g1[0] == doctest::Approx(1.04).epsilon(1e-14));
  CHECK(g1[1] == doctest::Approx(1.04).epsilon(1e-14));
  const Eigen::VectorXd g2 = m(vec1(0.5), vec2(0.0, 1.0));
  CHECK(g2[0] == doctest::Approx(0.4093653765389909).epsilon(1e-14));
  CHECK(g2[1] == doctest::Approx(0.3496644820586108).epsilon(1e-14));
}

TEST_CASE("analytic_model: components increase in x") {
  const ForwardModel m = analytic_model();
  for (double d1 : {0.0, 0.3, 0.7, 1.0}) {
    for (double d2 : {0.1, 0.5, 0.9}) {
      double prev0 = -1.0, prev1 = -1.0;
      for (double x = 0.0; x <= 1.0; x += 0.125) {
        const Eigen::VectorXd g = m(vec1(x), vec2(d1, d2));
        CHECK(g[0] >= prev0);
        CHECK(g[1] >= prev1);
        prev0 = g[0];
        prev1 = g[1];
      }
    }
  }
}

TEST_CASE("scalar_linear: design is ignored") {
  const ForwardModel m = scalar_linear(2.5);
  CHECK(m(vec1(0.4), Eigen::VectorXd())[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m(vec1(0.4), vec2(7.0, -3.0))[0] ==
        m(vec1(0.4), Eigen::VectorXd())[0]);
  const ForwardModel z = scalar_linear(0.0);
  CHECK(z(vec1(123.0), Eigen::VectorXd())[0] == 0.0);
}

TEST_CASE("ForwardModel: dimension checks") {
  const ForwardModel m = analytic_model();
  CHECK_THROWS(m(vec2(0.1, 0.2), vec2(0.5, 0.5)));
  CHECK_THROWS(m(vec1(0.1), vec1(0.5)));
}

TEST_CASE("prior specs validate") {
  CHECK_THROWS(uniform_box_prior(vec2(0.0, 1.0), vec2(1.0, 0.5)));
  CHECK(uniform_box_prior(vec2(0.0, 0.2), vec2(1.0, 1.0)).dim() == 2);
  CHECK_THROWS(gaussian_prior(vec1(0.0), Eigen::MatrixXd::Zero(1, 1)));
  CHECK(gaussian_prior(vec1(0.0), Eigen::MatrixXd::Identity(1, 1)).dim() == 1);
}

TEST_CASE("heat: config validation") {
  HeatConfig cfg;
  cfg.spatial_n = 2;
  CHECK_THROWS(cfg.validate());
  cfg = HeatConfig{};
  cfg.dt = 0.3;  // t_final = 0.4 is not a multiple
  CHECK_THROWS(cfg.validate());
  cfg = HeatConfig{};
  cfg.obs_times = {0.5};  // beyond t_final
  CHECK_THROWS(cfg.validate());
  cfg = HeatConfig{};
  cfg.bdf_order = 5;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(HeatConfig{}.validate());
}

TEST_CASE("heat: negligible source keeps the field at zero") {
  HeatConfig cfg;
  cfg.spatial_n = 11;
  const HeatSolution sol = heat_solve(vec2(100.0, 100.0), cfg);
  CHECK(sol.source_mass() == doctest::Approx(0.0).epsilon(1e-300));
  for (double q : sol.total_heat()) CHECK(std::abs(q) < 1e-14);
  CHECK(sol.observe(vec2(0.5, 0.5)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("heat: total heat tracks source injection, then is conserved") {
  HeatConfig cfg;
  cfg.spatial_n = 21;
  const HeatSolution sol = heat_solve(vec2(0.4, 0.6), cfg);
  const std::vector<double>& q = sol.total_heat();
  const int n_steps = int(q.size()) - 1;
  const int cutoff_step = int(std::round(cfg.source_cutoff / cfg.dt));

  // during heating (after the BDF ramp): dQ/dt == injected mass within 1%
  for (int m = cfg.bdf_order + 1; m < cutoff_step - 1; ++m) {
    const double rate = (q[std::size_t(m) + 1] - q[std::size_t(m)]) / cfg.dt;
    CHECK(rate == doctest::Approx(sol.source_mass()).epsilon(0.01));
  }
  // total injected mass: Q(tau) ~ mass * tau within 1%
  CHECK(q[std::size_t(cutoff_step)] ==
        doctest::Approx(sol.source_mass() * cfg.source_cutoff).epsilon(0.01));
  // after cutoff (BDF history cleared): per-step relative drift <= 1e-8
  for (int m = cutoff_step + cfg.bdf_order; m < n_steps; ++m) {
    const double drift = std::abs(q[std::size_t(m) + 1] - q[std::size_t(m)]);
    CHECK(drift <= 1e-8 * std::max(1.0, std::abs(q[std::size_t(m)])));
  }
}

TEST_CASE("heat: spatial self-convergence at the center sensor") {
  HeatConfig coarse;
  coarse.spatial_n = 21;
  HeatConfig fine;
  fine.spatial_n = 41;
  const double vc = heat_solve(vec2(0.3, 0.3), coarse).value_at(4, vec2(0.5, 0.5));
  const double vf = heat_solve(vec2(0.3, 0.3), fine).value_at(4, vec2(0.5, 0.5));
  CHECK(std::abs(vc - vf) <= 0.02 * std::abs(vf));
  CHECK(vf > 0.0);
}

TEST_CASE("heat: source/sensor exchange symmetry") {
  HeatConfig cfg;  // default 41-node grid
  const Eigen::VectorXd a = heat_observe(vec2(0.3, 0.5), vec2(0.5, 0.3), cfg);
  const Eigen::VectorXd b = heat_observe(vec2(0.5, 0.3), vec2(0.3, 0.5), cfg);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(a.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("heat: early readings rise monotonically at the source") {
  HeatConfig cfg;
  cfg.spatial_n = 21;
  const Eigen::VectorXd g = heat_observe(vec2(0.45, 0.55), vec2(0.45, 0.55), cfg);
  CHECK(g[0] > 0.0);
  CHECK(g[0] < g[1]);
  CHECK(g[1] < g[2]);
}

TEST_CASE("heat: cached model reproduces the direct solve bitwise") {
  HeatConfig cfg;
  cfg.spatial_n = 15;
  const ForwardModel m = make_heat_model(cfg);
  CHECK(m.data_dim == 5);
  const Eigen::VectorXd x = vec2(0.35, 0.62);
  const Eigen::VectorXd d = vec2(0.7, 0.44);
  const Eigen::VectorXd direct = heat_observe(x, d, cfg);
  const Eigen::VectorXd first = m(x, d);
  const Eigen::VectorXd second = m(x, d);  // served from the cache
  CHECK((first.array() == direct.array()).all());
  CHECK((first.array() == second.array()).all());
}

TEST_CASE("heat: sensor outside the square is rejected") {
  HeatConfig cfg;
  cfg.spatial_n = 11;
  const HeatSolution sol = heat_solve(vec2(0.5, 0.5), cfg);
  CHECK_THROWS(sol.value_at(0, vec2(1.2, 0.5)));
  CHECK_THROWS(sol.value_at(99, vec2(0.5, 0.5)));
}
