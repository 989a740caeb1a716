#pragma once

#include <Eigen/Dense>

namespace oed {

// Nondegenerate Gaussian N(mean, cov). The covariance is factored once
// (cov = L L^T, L lower triangular); every downstream quantity uses
// triangular solves against L, never an explicit inverse.
class GaussianDist {
 public:
  GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  int dim() const { return int(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_; }
  double logdet() const { return logdet_; }

  // L^{-1} v: maps an offset into whitened coordinates.
  Eigen::VectorXd whiten(const Eigen::VectorXd& v) const;
  // L e: maps a standard normal draw onto this covariance.
  Eigen::VectorXd unwhiten(const Eigen::VectorXd& e) const;

  double log_density(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double logdet_;
};

GaussianDist isotropic_gaussian(int dim, double variance);

// KL(p1 || p2) between nondegenerate Gaussians of equal dimension:
// (tr(C2^{-1} C1) - p + |m2 - m1|^2_{C2} + log det C2 - log det C1) / 2.
double kl_gaussian(const GaussianDist& p1, const GaussianDist& p2);

// |v|^2 weighted by the inverse covariance of `noise`: |L^{-1} v|^2.
double weighted_norm_sq(const Eigen::VectorXd& v, const GaussianDist& noise);

}  // namespace oed
