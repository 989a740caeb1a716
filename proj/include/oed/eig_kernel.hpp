#pragma once

#include <Eigen/Dense>
#include <functional>

#include "oed/divergence.hpp"
#include "oed/gaussian.hpp"
#include "oed/quadrature.hpp"

// Shared low-level pieces of the information-gain quadrature: whitened
// observation tables and the signed log-sum-exp evidence mixture. These are
// implementation details shared by the gain estimator and the study drivers
// so that both run the identical inner arithmetic.

namespace oed::detail {

struct SignedLogWeights {
  Eigen::VectorXd log_abs;
  Eigen::VectorXd sign;
};

SignedLogWeights signed_log_weights(const Eigen::VectorXd& w);

// log sum_i sign_i exp(terms_i) with a max shift. Throws if every term has
// underflowed to -inf or if the signed sum is not positive.
double signed_log_sum_exp(const Eigen::VectorXd& terms,
                          const Eigen::VectorXd& signs, const char* what);

// Rows of Gamma^{-1/2} g(x_k, d) over the rule's nodes; throws on dimension
// mismatch or non-finite observation values.
Eigen::MatrixXd whitened_observations(const ObservationFn& g,
                                      const QuadratureRule& rule,
                                      const Eigen::VectorXd& d,
                                      const GaussianDist& noise);

// A Gaussian mixture with identity covariance in whitened coordinates:
// log sum_j w_j N(z; row_j, I). log_norm carries the likelihood
// normalization (-1/2 logdet Gamma - p/2 log 2pi).
struct MixtureKernel {
  Eigen::MatrixXd rows;
  SignedLogWeights lw;
  double log_norm = 0.0;

  // Scratch vectors are resized as needed; callers running in parallel must
  // use per-thread scratch.
  double log_evidence_at(const Eigen::RowVectorXd& z, Eigen::VectorXd& sq,
                         Eigen::VectorXd& terms) const;
};

MixtureKernel make_mixture_kernel(Eigen::MatrixXd whitened_rows,
                                  const Eigen::VectorXd& prob_weights,
                                  double log_norm);

// Runs fn(i) for i in [0, n). With threads <= 1 the loop is serial; with
// more threads the index range is split into contiguous blocks. fn must
// write only to slots owned by index i so results do not depend on the
// thread count. The first exception thrown by any fn is rethrown.
void parallel_for(Eigen::Index n, int threads,
                  const std::function<void(Eigen::Index)>& fn);

}  // namespace oed::detail
