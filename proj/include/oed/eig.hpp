#pragma once

#include <Eigen/Dense>
#include <string>

#include "oed/divergence.hpp"
#include "oed/gaussian.hpp"
#include "oed/model.hpp"
#include "oed/quadrature.hpp"
#include "oed/surrogate.hpp"

namespace oed {

// One expected-information-gain evaluation together with the quadrature
// metadata that makes it reproducible: identical inputs give a bit-identical
// value.
struct EigEstimate {
  double value = 0.0;           // nats
  Eigen::VectorXd design;
  Eigen::Index prior_nodes = 0;
  Eigen::Index noise_nodes = 0;
  Eigen::Index evidence_nodes = 0;
  std::string tag;              // model or surrogate identifier
};

// log N(y; g, Gamma), with all normalization constants retained.
double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& g,
                      const GaussianDist& noise);

// log of the prior-weighted likelihood mixture sum_k w_k N(y; g(x_k, d), Gamma)
// where w_k are the probability-normalized weights of prior_rule (Lebesgue
// box rules are normalized by the box volume). Evaluated by signed
// log-sum-exp with a max shift; sparse-combination rules may carry negative
// weights, so a nonpositive mixture or an all-underflow sum is an error.
double log_evidence(const Eigen::VectorXd& y, const Eigen::VectorXd& d,
                    const ObservationFn& g, const QuadratureRule& prior_rule,
                    const GaussianDist& noise);

// Expected information gain U(d): the prior-and-data expectation of
// log(likelihood / evidence), computed by the change of variables
// y = g(x; d) + Gamma^{1/2} eps that places the data integral on
// standard-Gaussian nodes. noise_rule must be a StandardGaussian rule of the
// noise dimension; evidence_rule defaults to aliasing prior_rule so forward
// evaluations are shared between the outer expectation and the evidence
// mixture.
EigEstimate expected_information_gain(
    const ObservationFn& g, const std::string& tag, const Eigen::VectorXd& d,
    const QuadratureRule& prior_rule, const QuadratureRule& noise_rule,
    const GaussianDist& noise, const QuadratureRule* evidence_rule = nullptr);

EigEstimate expected_information_gain(
    const ForwardModel& model, const Eigen::VectorXd& d,
    const QuadratureRule& prior_rule, const QuadratureRule& noise_rule,
    const GaussianDist& noise, const QuadratureRule* evidence_rule = nullptr);

EigEstimate expected_information_gain(
    const Surrogate& surrogate, const Eigen::VectorXd& d,
    const QuadratureRule& prior_rule, const QuadratureRule& noise_rule,
    const GaussianDist& noise, const QuadratureRule* evidence_rule = nullptr);

// Closed-form expected information gain of the linear-Gaussian model
// y = G x + xi with x ~ N(0, prior_cov) and xi ~ noise:
// (1/2) log det(I + Gamma^{-1/2} G C0 G^T Gamma^{-T/2}).
double eig_linear_gaussian_closed(const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& prior_cov,
                                  const GaussianDist& noise);

// Exact utility error |U_N - U| of the scalar linear model G(x) = a x with
// standard normal prior and unit noise, approximated at slope a_n:
// (1/2) |log((a_n^2 + 1) / (a^2 + 1))|.
double eig_error_example1(double a, double a_n);

}  // namespace oed
