#pragma once

#include <Eigen/Dense>

#include <string>

#include "oed/divergence.hpp"

namespace oed {

enum class ModelKind { Analytic2, HeatSensor, ScalarLinear, Custom };

// Deterministic observation operator G(x; d). `eval` must be pure: equal
// inputs give bitwise-equal outputs regardless of call order or thread.
struct ForwardModel {
  ModelKind kind = ModelKind::Custom;
  int param_dim = 0;
  int design_dim = 0;  // 0 means the design argument is ignored
  int data_dim = 0;
  std::string tag;
  ObservationFn eval;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& d) const;
};

// G(x, d) = [x^3 d1^2 + x e^{-|0.2 - d1|}, x^3 d2^2 + x e^{-|0.2 - d2|}]
// for scalar x and a two-component design.
ForwardModel analytic_model();

// G(x; d) = a x, a scalar map that ignores the design.
ForwardModel scalar_linear(double a);

struct PriorSpec {
  enum class Kind { UniformBox, Gaussian } kind = Kind::UniformBox;
  Eigen::VectorXd lower, upper;  // UniformBox
  Eigen::VectorXd mean;          // Gaussian
  Eigen::MatrixXd cov;

  int dim() const;
};

PriorSpec uniform_box_prior(const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);
PriorSpec gaussian_prior(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

}  // namespace oed
