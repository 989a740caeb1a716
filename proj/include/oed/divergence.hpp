#pragma once

#include <Eigen/Dense>

#include <functional>

#include "oed/gaussian.hpp"
#include "oed/quadrature.hpp"

namespace oed {

// Observation map (x, d) -> data vector; forward models and surrogates both
// expose this shape.
using ObservationFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// E^{mu0} KL(N(g(X,d), C) || N(g_n(X,d), C)) = E^{mu0} |g - g_n|^2_C / 2.
// prior_rule is read as the prior measure: LebesgueOnBox weights are
// normalized by their total mass (uniform prior on the box).
double expected_likelihood_kl(const ObservationFn& g, const ObservationFn& g_n,
                              const Eigen::VectorXd& d,
                              const QuadratureRule& prior_rule,
                              const GaussianDist& noise);

// Squared Hellinger distance between 1D densities given by log-density
// callables, via a LebesgueOnBox rule covering both supports:
// (1/2) integral (sqrt p - sqrt q)^2. Log-densities may be -inf (zero
// density); NaN or +inf raises.
double hellinger_sq_numeric_1d(const std::function<double(double)>& logp,
                               const std::function<double(double)>& logq,
                               const QuadratureRule& rule);

}  // namespace oed
