#include "oed/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace oed {

GaussianDist::GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const Eigen::Index p = mean_.size();
  if (cov_.rows() != p || cov_.cols() != p)
    throw std::invalid_argument("GaussianDist: covariance shape mismatch");
  if (p == 0) throw std::invalid_argument("GaussianDist: empty dimension");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("GaussianDist: covariance not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("GaussianDist: covariance not positive definite");
  chol_ = llt.matrixL();
  logdet_ = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) logdet_ += 2.0 * std::log(chol_(i, i));
}

Eigen::VectorXd GaussianDist::whiten(const Eigen::VectorXd& v) const {
  return chol_.triangularView<Eigen::Lower>().solve(v);
}

Eigen::VectorXd GaussianDist::unwhiten(const Eigen::VectorXd& e) const {
  return chol_.triangularView<Eigen::Lower>() * e;
}

double GaussianDist::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = whiten(x - mean_);
  return -0.5 * z.squaredNorm() - 0.5 * logdet_ -
         0.5 * dim() * std::log(2.0 * M_PI);
}

GaussianDist isotropic_gaussian(int dim, double variance) {
  return GaussianDist(Eigen::VectorXd::Zero(dim),
                      variance * Eigen::MatrixXd::Identity(dim, dim));
}

double kl_gaussian(const GaussianDist& p1, const GaussianDist& p2) {
  if (p1.dim() != p2.dim())
    throw std::invalid_argument("kl_gaussian: dimension mismatch");
  const int p = p1.dim();
  // tr(C2^{-1} C1) = |L2^{-1} L1|_F^2
  const Eigen::MatrixXd A =
      p2.chol_lower().triangularView<Eigen::Lower>().solve(p1.chol_lower());
  const double trace_term = A.squaredNorm();
  const double maha = weighted_norm_sq(p2.mean() - p1.mean(), p2);
  return 0.5 * (trace_term - p + maha + p2.logdet() - p1.logdet());
}

double weighted_norm_sq(const Eigen::VectorXd& v, const GaussianDist& noise) {
  if (v.size() != noise.dim())
    throw std::invalid_argument("weighted_norm_sq: dimension mismatch");
  return noise.whiten(v).squaredNorm();
}

}  // namespace oed
