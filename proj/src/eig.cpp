#include "oed/eig.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "oed/eig_kernel.hpp"

namespace oed {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& g,
                      const GaussianDist& noise) {
  if (y.size() != g.size() || y.size() != noise.dim())
    throw std::invalid_argument("log_likelihood dimension mismatch");
  const double quad = noise.whiten(y - g).squaredNorm();
  return -0.5 * quad - 0.5 * noise.logdet() -
         0.5 * static_cast<double>(noise.dim()) * kLog2Pi;
}

double log_evidence(const Eigen::VectorXd& y, const Eigen::VectorXd& d,
                    const ObservationFn& g, const QuadratureRule& prior_rule,
                    const GaussianDist& noise) {
  if (y.size() != noise.dim())
    throw std::invalid_argument("log_evidence dimension mismatch");
  const Eigen::VectorXd w = probability_weights(prior_rule);
  const detail::SignedLogWeights lw = detail::signed_log_weights(w);
  Eigen::VectorXd terms(prior_rule.size());
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    const Eigen::VectorXd x = prior_rule.nodes.row(k);
    terms[k] = lw.log_abs[k] + log_likelihood(y, g(x, d), noise);
  }
  return detail::signed_log_sum_exp(terms, lw.sign, "evidence");
}

EigEstimate expected_information_gain(const ObservationFn& g,
                                      const std::string& tag,
                                      const Eigen::VectorXd& d,
                                      const QuadratureRule& prior_rule,
                                      const QuadratureRule& noise_rule,
                                      const GaussianDist& noise,
                                      const QuadratureRule* evidence_rule) {
  const int p = noise.dim();
  if (noise_rule.weight_kind != WeightKind::StandardGaussian)
    throw std::invalid_argument("noise rule must be a standard-Gaussian rule");
  if (noise_rule.dim != p)
    throw std::invalid_argument(
        "noise rule dimension does not match the noise dimension");
  const QuadratureRule& ev_rule =
      evidence_rule != nullptr ? *evidence_rule : prior_rule;
  if (ev_rule.dim != prior_rule.dim)
    throw std::invalid_argument(
        "evidence rule dimension does not match the prior rule");

  const Eigen::VectorXd w_prior = probability_weights(prior_rule);
  const Eigen::VectorXd w_noise = probability_weights(noise_rule);
  const Eigen::VectorXd w_ev = probability_weights(ev_rule);

  // Whitened observations at the outer prior nodes and at the evidence
  // mixture nodes (the same matrix when the rules alias).
  const Eigen::MatrixXd w_outer =
      detail::whitened_observations(g, prior_rule, d, noise);
  const bool aliased = evidence_rule == nullptr;

  const double log_norm =
      -0.5 * noise.logdet() - 0.5 * static_cast<double>(p) * kLog2Pi;
  const detail::MixtureKernel kernel = detail::make_mixture_kernel(
      aliased ? w_outer : detail::whitened_observations(g, ev_rule, d, noise),
      w_ev, log_norm);

  double value = 0.0;
  Eigen::VectorXd sq(kernel.rows.rows());
  Eigen::VectorXd terms(kernel.rows.rows());
  Eigen::RowVectorXd z(p);
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    for (Eigen::Index m = 0; m < noise_rule.size(); ++m) {
      const auto eps = noise_rule.nodes.row(m);
      z = w_outer.row(k) + eps;
      const double loglik = -0.5 * eps.squaredNorm() + log_norm;
      double logev;
      try {
        logev = kernel.log_evidence_at(z, sq, terms);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(
            std::string(e.what()) + " (prior node " + std::to_string(k) +
            ", noise node " + std::to_string(m) + ")");
      }
      value += w_prior[k] * w_noise[m] * (loglik - logev);
    }
  }
  if (!std::isfinite(value))
    throw std::runtime_error("expected information gain is not finite");

  EigEstimate est;
  est.value = value;
  est.design = d;
  est.prior_nodes = prior_rule.size();
  est.noise_nodes = noise_rule.size();
  est.evidence_nodes = ev_rule.size();
  est.tag = tag;
  return est;
}

EigEstimate expected_information_gain(const ForwardModel& model,
                                      const Eigen::VectorXd& d,
                                      const QuadratureRule& prior_rule,
                                      const QuadratureRule& noise_rule,
                                      const GaussianDist& noise,
                                      const QuadratureRule* evidence_rule) {
  return expected_information_gain(
      [&model](const Eigen::VectorXd& x, const Eigen::VectorXd& dd) {
        return model(x, dd);
      },
      model.tag, d, prior_rule, noise_rule, noise, evidence_rule);
}

EigEstimate expected_information_gain(const Surrogate& surrogate,
                                      const Eigen::VectorXd& d,
                                      const QuadratureRule& prior_rule,
                                      const QuadratureRule& noise_rule,
                                      const GaussianDist& noise,
                                      const QuadratureRule* evidence_rule) {
  return expected_information_gain(
      [&surrogate](const Eigen::VectorXd& x, const Eigen::VectorXd& dd) {
        return surrogate(x, dd);
      },
      surrogate.tag, d, prior_rule, noise_rule, noise, evidence_rule);
}

double eig_linear_gaussian_closed(const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& prior_cov,
                                  const GaussianDist& noise) {
  if (G.rows() != noise.dim())
    throw std::invalid_argument("linear map rows must match noise dimension");
  if (G.cols() != prior_cov.rows() || prior_cov.rows() != prior_cov.cols())
    throw std::invalid_argument("prior covariance shape mismatch");
  // SPD enforcement and the factor C0 = L0 L0^T come from GaussianDist.
  const GaussianDist prior(Eigen::VectorXd::Zero(prior_cov.rows()), prior_cov);
  const Eigen::MatrixXd scaled = G * prior.chol_lower();
  const Eigen::MatrixXd whitened =
      noise.chol_lower().triangularView<Eigen::Lower>().solve(scaled);
  const Eigen::MatrixXd inner =
      Eigen::MatrixXd::Identity(G.rows(), G.rows()) +
      whitened * whitened.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(inner);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("information matrix factorization failed");
  return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

double eig_error_example1(double a, double a_n) {
  return 0.5 * std::abs(std::log((a_n * a_n + 1.0) / (a * a + 1.0)));
}

}  // namespace oed
