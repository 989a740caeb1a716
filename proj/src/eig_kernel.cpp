#include "oed/eig_kernel.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace oed::detail {

SignedLogWeights signed_log_weights(const Eigen::VectorXd& w) {
  SignedLogWeights out;
  out.log_abs.resize(w.size());
  out.sign.resize(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) {
      out.log_abs[i] = -std::numeric_limits<double>::infinity();
      out.sign[i] = 0.0;
    } else {
      out.log_abs[i] = std::log(std::abs(w[i]));
      out.sign[i] = w[i] > 0.0 ? 1.0 : -1.0;
    }
  }
  return out;
}

double signed_log_sum_exp(const Eigen::VectorXd& terms,
                          const Eigen::VectorXd& signs, const char* what) {
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < terms.size(); ++i)
    if (signs[i] != 0.0) shift = std::max(shift, terms[i]);
  if (!std::isfinite(shift))
    throw std::runtime_error(std::string(what) +
                             ": every mixture term underflowed");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < terms.size(); ++i)
    if (signs[i] != 0.0) acc += signs[i] * std::exp(terms[i] - shift);
  if (!(acc > 0.0))
    throw std::runtime_error(std::string(what) +
                             ": mixture sum is not positive");
  return shift + std::log(acc);
}

Eigen::MatrixXd whitened_observations(const ObservationFn& g,
                                      const QuadratureRule& rule,
                                      const Eigen::VectorXd& d,
                                      const GaussianDist& noise) {
  Eigen::MatrixXd w(rule.size(), noise.dim());
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    const Eigen::VectorXd x = rule.nodes.row(k);
    const Eigen::VectorXd value = g(x, d);
    if (value.size() != noise.dim())
      throw std::invalid_argument(
          "observation dimension does not match the noise dimension");
    if (!value.allFinite())
      throw std::runtime_error("non-finite observation value at a prior node");
    w.row(k) = noise.whiten(value);
  }
  return w;
}

double MixtureKernel::log_evidence_at(const Eigen::RowVectorXd& z,
                                      Eigen::VectorXd& sq,
                                      Eigen::VectorXd& terms) const {
  sq = ((-rows).rowwise() + z).rowwise().squaredNorm();
  terms = lw.log_abs.array() - 0.5 * sq.array() + log_norm;
  return signed_log_sum_exp(terms, lw.sign, "evidence");
}

MixtureKernel make_mixture_kernel(Eigen::MatrixXd whitened_rows,
                                  const Eigen::VectorXd& prob_weights,
                                  double log_norm) {
  if (whitened_rows.rows() != prob_weights.size())
    throw std::invalid_argument(
        "mixture weights do not match the observation rows");
  MixtureKernel kernel;
  kernel.rows = std::move(whitened_rows);
  kernel.lw = signed_log_weights(prob_weights);
  kernel.log_norm = log_norm;
  return kernel;
}

void parallel_for(Eigen::Index n, int threads,
                  const std::function<void(Eigen::Index)>& fn) {
  if (n <= 0) return;
  const int used = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (used == 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(used));
  for (int t = 0; t < used; ++t) {
    const Eigen::Index lo = n * t / used;
    const Eigen::Index hi = n * (t + 1) / used;
    pool.emplace_back([lo, hi, t, &fn, &errors]() {
      try {
        for (Eigen::Index i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace oed::detail
