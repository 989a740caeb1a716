#include "oed/model.hpp"

#include <cmath>
#include <stdexcept>

namespace oed {

Eigen::VectorXd ForwardModel::operator()(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& d) const {
  if (x.size() != param_dim)
    throw std::invalid_argument("ForwardModel: parameter dimension mismatch");
  if (design_dim > 0 && d.size() != design_dim)
    throw std::invalid_argument("ForwardModel: design dimension mismatch");
  return eval(x, d);
}

ForwardModel analytic_model() {
  ForwardModel m;
  m.kind = ModelKind::Analytic2;
  m.param_dim = 1;
  m.design_dim = 2;
  m.data_dim = 2;
  m.tag = "analytic2";
  m.eval = [](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    const double u = x[0];
    const double u3 = u * u * u;
    Eigen::VectorXd g(2);
    g[0] = u3 * d[0] * d[0] + u * std::exp(-std::abs(0.2 - d[0]));
    g[1] = u3 * d[1] * d[1] + u * std::exp(-std::abs(0.2 - d[1]));
    return g;
  };
  return m;
}

ForwardModel scalar_linear(double a) {
  ForwardModel m;
  m.kind = ModelKind::ScalarLinear;
  m.param_dim = 1;
  m.design_dim = 0;
  m.data_dim = 1;
  m.tag = "scalar_linear(a=" + std::to_string(a) + ")";
  m.eval = [a](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, a * x[0]);
  };
  return m;
}

int PriorSpec::dim() const {
  return int(kind == Kind::UniformBox ? lower.size() : mean.size());
}

PriorSpec uniform_box_prior(const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw std::invalid_argument("uniform_box_prior: bad box");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("uniform_box_prior: empty box axis");
  PriorSpec p;
  p.kind = PriorSpec::Kind::UniformBox;
  p.lower = lower;
  p.upper = upper;
  return p;
}

PriorSpec gaussian_prior(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  GaussianDist check(mean, cov);  // validates shape and positive definiteness
  PriorSpec p;
  p.kind = PriorSpec::Kind::Gaussian;
  p.mean = mean;
  p.cov = cov;
  return p;
}

}  // namespace oed
