#include "oed/heat.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace oed {

namespace {

constexpr double kTimeTol = 1e-12;

// 5-point Laplacian with mirrored ghost nodes (zero Neumann walls).
// Index layout: id = ix * n + iy, z = (ix h, iy h).
Eigen::SparseMatrix<double> neumann_laplacian(int n) {
  const double h = 1.0 / (n - 1);
  const double ih2 = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(n) * n * 5);
  const auto id = [n](int ix, int iy) { return ix * n + iy; };
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      trip.emplace_back(id(ix, iy), id(ix, iy), -4.0 * ih2);
      // mirrored neighbor: the ghost at -1 reflects to +1 (and likewise at n)
      const int xm = (ix > 0) ? ix - 1 : ix + 1;
      const int xp = (ix < n - 1) ? ix + 1 : ix - 1;
      const int ym = (iy > 0) ? iy - 1 : iy + 1;
      const int yp = (iy < n - 1) ? iy + 1 : iy - 1;
      trip.emplace_back(id(ix, iy), id(xm, iy), ih2);
      trip.emplace_back(id(ix, iy), id(xp, iy), ih2);
      trip.emplace_back(id(ix, iy), id(ix, ym), ih2);
      trip.emplace_back(id(ix, iy), id(ix, yp), ih2);
    }
  }
  Eigen::SparseMatrix<double> a(n * n, n * n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

// Trapezoid quadrature masses on the grid: h^2 times 1/4, 1/2 or 1.
Eigen::VectorXd trapezoid_masses(int n) {
  const double h = 1.0 / (n - 1);
  Eigen::VectorXd w(n * n);
  for (int ix = 0; ix < n; ++ix) {
    const double wx = (ix == 0 || ix == n - 1) ? 0.5 : 1.0;
    for (int iy = 0; iy < n; ++iy) {
      const double wy = (iy == 0 || iy == n - 1) ? 0.5 : 1.0;
      w[ix * n + iy] = h * h * wx * wy;
    }
  }
  return w;
}

struct BdfScheme {
  double beta;
  std::vector<double> history;  // coefficients of v^n, v^{n-1}, ...
};

const BdfScheme& bdf_scheme(int order) {
  static const std::vector<BdfScheme> schemes = {
      {1.0, {1.0}},
      {2.0 / 3.0, {4.0 / 3.0, -1.0 / 3.0}},
      {6.0 / 11.0, {18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0}},
      {12.0 / 25.0, {48.0 / 25.0, -36.0 / 25.0, 16.0 / 25.0, -3.0 / 25.0}},
  };
  if (order < 1 || order > 4)
    throw std::invalid_argument("heat: bdf_order must be in 1..4");
  return schemes[std::size_t(order) - 1];
}

}  // namespace

void HeatConfig::validate() const {
  if (spatial_n < 3) throw std::invalid_argument("heat: spatial_n must be >= 3");
  if (!(dt > 0.0)) throw std::invalid_argument("heat: dt must be positive");
  if (!(t_final > 0.0)) throw std::invalid_argument("heat: t_final must be positive");
  bdf_scheme(bdf_order);
  const double steps = t_final / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw std::invalid_argument("heat: t_final must be a multiple of dt");
  if (obs_times.empty()) throw std::invalid_argument("heat: no observation times");
  for (double t : obs_times)
    if (t < -kTimeTol || t > t_final + kTimeTol)
      throw std::invalid_argument("heat: observation time outside [0, t_final]");
  if (!(source_width > 0.0))
    throw std::invalid_argument("heat: source_width must be positive");
  if (!(source_strength >= 0.0))
    throw std::invalid_argument("heat: source_strength must be nonnegative");
}

HeatSolution::HeatSolution(int n, std::vector<double> obs_times,
                           std::vector<Eigen::VectorXd> snapshots,
                           std::vector<double> total_heat, double source_mass,
                           double dt)
    : n_(n),
      obs_times_(std::move(obs_times)),
      snapshots_(std::move(snapshots)),
      total_heat_(std::move(total_heat)),
      source_mass_(source_mass),
      dt_(dt) {}

double HeatSolution::value_at(int k, const Eigen::VectorXd& z) const {
  if (k < 0 || std::size_t(k) >= snapshots_.size())
    throw std::out_of_range("HeatSolution: snapshot index");
  if (z.size() != 2 || z[0] < -1e-12 || z[0] > 1.0 + 1e-12 || z[1] < -1e-12 ||
      z[1] > 1.0 + 1e-12)
    throw std::invalid_argument("HeatSolution: sensor outside the unit square");
  const double h = 1.0 / (n_ - 1);
  const auto cell = [&](double c) {
    int i = int(std::floor(c / h));
    i = std::min(std::max(i, 0), n_ - 2);
    return i;
  };
  const int ix = cell(z[0]), iy = cell(z[1]);
  const double sx = std::min(std::max(z[0] / h - ix, 0.0), 1.0);
  const double sy = std::min(std::max(z[1] / h - iy, 0.0), 1.0);
  const Eigen::VectorXd& v = snapshots_[std::size_t(k)];
  const auto id = [this](int a, int b) { return a * n_ + b; };
  return (1 - sx) * (1 - sy) * v[id(ix, iy)] + sx * (1 - sy) * v[id(ix + 1, iy)] +
         (1 - sx) * sy * v[id(ix, iy + 1)] + sx * sy * v[id(ix + 1, iy + 1)];
}

Eigen::VectorXd HeatSolution::observe(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out(Eigen::Index(obs_times_.size()));
  for (std::size_t k = 0; k < obs_times_.size(); ++k)
    out[Eigen::Index(k)] = value_at(int(k), z);
  return out;
}

HeatSolution heat_solve(const Eigen::VectorXd& source_center,
                        const HeatConfig& cfg) {
  cfg.validate();
  if (source_center.size() != 2)
    throw std::invalid_argument("heat_solve: source center must be 2D");

  const int n = cfg.spatial_n;
  const int nn = n * n;
  const double h = 1.0 / (n - 1);
  const int n_steps = int(std::round(cfg.t_final / cfg.dt));

  // Stationary source field, truncated at the walls (no renormalization).
  const double w2 = cfg.source_width * cfg.source_width;
  const double amp = cfg.source_strength / (2.0 * M_PI * w2);
  Eigen::VectorXd source(nn);
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const double dx = ix * h - source_center[0];
      const double dy = iy * h - source_center[1];
      source[ix * n + iy] = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * w2));
    }
  }

  const Eigen::SparseMatrix<double> lap = neumann_laplacian(n);
  const Eigen::VectorXd masses = trapezoid_masses(n);
  const double source_mass = masses.dot(source);

  // One factorization per BDF order used (startup ramp plus steady order).
  Eigen::SparseMatrix<double> eye(nn, nn);
  eye.setIdentity();
  std::vector<std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>>>
      solvers(std::size_t(cfg.bdf_order));
  for (int order = 1; order <= cfg.bdf_order; ++order) {
    const Eigen::SparseMatrix<double> m =
        eye - (bdf_scheme(order).beta * cfg.dt) * lap;
    auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu->compute(m);
    if (lu->info() != Eigen::Success)
      throw std::runtime_error("heat_solve: factorization failed");
    solvers[std::size_t(order) - 1] = std::move(lu);
  }

  std::vector<Eigen::VectorXd> history;  // v^m, v^{m-1}, ... newest first
  history.push_back(Eigen::VectorXd::Zero(nn));
  std::vector<double> total_heat;
  total_heat.reserve(std::size_t(n_steps) + 1);
  total_heat.push_back(0.0);

  std::vector<Eigen::VectorXd> snaps(cfg.obs_times.size());
  for (std::size_t k = 0; k < cfg.obs_times.size(); ++k)
    if (cfg.obs_times[k] <= kTimeTol) snaps[k] = Eigen::VectorXd::Zero(nn);

  // The source switches off at the cutoff; multistep histories must not span
  // that discontinuity, so the BDF ramp restarts there (ramp_base tracks the
  // start of the current smooth segment).
  int ramp_base = 0;
  bool was_active = true;
  for (int m = 0; m < n_steps; ++m) {
    const double t_new = (m + 1) * cfg.dt;
    const bool active = t_new < cfg.source_cutoff - kTimeTol;
    if (active != was_active) {
      ramp_base = m;
      history.resize(1);
      was_active = active;
    }
    const int order = std::min(cfg.bdf_order, m - ramp_base + 1);
    const BdfScheme& sch = bdf_scheme(order);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn);
    for (std::size_t j = 0; j < sch.history.size(); ++j)
      rhs += sch.history[j] * history[j];
    if (active) rhs += (sch.beta * cfg.dt) * source;
    Eigen::VectorXd v_new = solvers[std::size_t(order) - 1]->solve(rhs);

    const double t_old = m * cfg.dt;
    for (std::size_t k = 0; k < cfg.obs_times.size(); ++k) {
      const double t_obs = cfg.obs_times[k];
      if (t_obs > t_old + kTimeTol && t_obs <= t_new + kTimeTol) {
        const double theta = std::min(std::max((t_obs - t_old) / cfg.dt, 0.0), 1.0);
        snaps[k] = (1.0 - theta) * history[0] + theta * v_new;
      }
    }

    history.insert(history.begin(), std::move(v_new));
    if (int(history.size()) > cfg.bdf_order) history.pop_back();
    total_heat.push_back(masses.dot(history[0]));
  }

  for (std::size_t k = 0; k < snaps.size(); ++k)
    if (snaps[k].size() == 0)
      throw std::logic_error("heat_solve: missed an observation time");

  return HeatSolution(n, cfg.obs_times, std::move(snaps), std::move(total_heat),
                      source_mass, cfg.dt);
}

Eigen::VectorXd heat_observe(const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                             const HeatConfig& cfg) {
  return heat_solve(x, cfg).observe(d);
}

ForwardModel make_heat_model(const HeatConfig& cfg) {
  cfg.validate();
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<std::uint64_t, std::uint64_t>,
             std::shared_ptr<const HeatSolution>>
        solutions;
  };
  auto cache = std::make_shared<Cache>();

  ForwardModel m;
  m.kind = ModelKind::HeatSensor;
  m.param_dim = 2;
  m.design_dim = 2;
  m.data_dim = int(cfg.obs_times.size());
  m.tag = "heat_sensor(n=" + std::to_string(cfg.spatial_n) + ")";
  m.eval = [cfg, cache](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    std::pair<std::uint64_t, std::uint64_t> key;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&key.first, &x[0], sizeof(double));
    std::memcpy(&key.second, &x[1], sizeof(double));

    std::shared_ptr<const HeatSolution> sol;
    {
      std::lock_guard<std::mutex> lock(cache->mutex);
      auto it = cache->solutions.find(key);
      if (it != cache->solutions.end()) sol = it->second;
    }
    if (!sol) {
      sol = std::make_shared<const HeatSolution>(heat_solve(x, cfg));
      std::lock_guard<std::mutex> lock(cache->mutex);
      cache->solutions.emplace(key, sol);
    }
    return sol->observe(d);
  };
  return m;
}

}  // namespace oed
