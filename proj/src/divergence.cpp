#include "oed/divergence.hpp"

#include <cmath>
#include <stdexcept>

namespace oed {

double expected_likelihood_kl(const ObservationFn& g, const ObservationFn& g_n,
                              const Eigen::VectorXd& d,
                              const QuadratureRule& prior_rule,
                              const GaussianDist& noise) {
  const Eigen::VectorXd w = probability_weights(prior_rule);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    const Eigen::VectorXd x = prior_rule.nodes.row(k).transpose();
    const double v = weighted_norm_sq(g(x, d) - g_n(x, d), noise);
    if (!std::isfinite(v))
      throw std::runtime_error("expected_likelihood_kl: non-finite value at node " +
                               std::to_string(k));
    acc += w[k] * v;
  }
  return 0.5 * acc;
}

double hellinger_sq_numeric_1d(const std::function<double(double)>& logp,
                               const std::function<double(double)>& logq,
                               const QuadratureRule& rule) {
  if (rule.dim != 1 || rule.weight_kind != WeightKind::LebesgueOnBox)
    throw std::invalid_argument("hellinger_sq_numeric_1d: need a 1D Lebesgue rule");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    const double x = rule.nodes(k, 0);
    const double lp = logp(x);
    const double lq = logq(x);
    // -inf marks zero density and is fine; NaN or +inf is a broken density.
    if (std::isnan(lp) || std::isnan(lq) || (std::isinf(lp) && lp > 0) ||
        (std::isinf(lq) && lq > 0))
      throw std::runtime_error("hellinger_sq_numeric_1d: invalid log-density");
    const double diff = std::exp(0.5 * lp) - std::exp(0.5 * lq);
    acc += rule.weights[k] * diff * diff;
  }
  if (!std::isfinite(acc))
    throw std::runtime_error("hellinger_sq_numeric_1d: non-finite accumulation");
  return 0.5 * acc;
}

}  // namespace oed
