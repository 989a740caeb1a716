#pragma once

#include <Eigen/Dense>

#include <vector>

#include "oed/model.hpp"

namespace oed {

// v_t = lap(v) + S on the unit square with zero-Neumann walls and v(0) = 0.
// S(z, t; x) = strength / (2 pi width^2) * exp(-|z - x|^2 / (2 width^2))
// for 0 <= t < cutoff, truncated at the walls without renormalization.
struct HeatConfig {
  int spatial_n = 41;  // grid nodes per axis, spacing 1/(spatial_n - 1)
  double dt = 1.0 / 400.0;
  int bdf_order = 4;  // startup ramps 1 -> bdf_order
  double t_final = 0.4;
  std::vector<double> obs_times = {0.08, 0.16, 0.24, 0.32, 0.40};
  double source_strength = 2.0;
  double source_width = 0.05;
  double source_cutoff = 0.3;

  void validate() const;
};

// Snapshot fields at the observation times plus per-step diagnostics.
class HeatSolution {
 public:
  HeatSolution(int n, std::vector<double> obs_times,
               std::vector<Eigen::VectorXd> snapshots,
               std::vector<double> total_heat, double source_mass, double dt);

  // Bilinear interpolation of snapshot `k` at z in [0,1]^2.
  double value_at(int k, const Eigen::VectorXd& z) const;
  // Sensor readings [v(z, t_1), ..., v(z, t_m)].
  Eigen::VectorXd observe(const Eigen::VectorXd& z) const;

  int grid_n() const { return n_; }
  const std::vector<double>& obs_times() const { return obs_times_; }
  // Trapezoid-weighted total heat per time step, entry 0 at t = 0.
  const std::vector<double>& total_heat() const { return total_heat_; }
  // Trapezoid-weighted mass of the active source field.
  double source_mass() const { return source_mass_; }
  double dt() const { return dt_; }

 private:
  int n_;
  std::vector<double> obs_times_;
  std::vector<Eigen::VectorXd> snapshots_;
  std::vector<double> total_heat_;
  double source_mass_;
  double dt_;
};

HeatSolution heat_solve(const Eigen::VectorXd& source_center,
                        const HeatConfig& cfg);

// Uncached single observation: solve for source x, read sensors at d.
Eigen::VectorXd heat_observe(const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                             const HeatConfig& cfg);

// Forward model with a shared thread-safe solve cache keyed on the source
// position bits. Concurrent duplicate solves are allowed; results of a solve
// are a pure function of (x, cfg), so every insert carries the same value.
ForwardModel make_heat_model(const HeatConfig& cfg);

}  // namespace oed
