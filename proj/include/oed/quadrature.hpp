#pragma once

#include <Eigen/Dense>

#include <functional>

namespace oed {

// How a rule's weights are meant to be read:
//   LebesgueOnBox    sum(weights) == volume of [box_lower, box_upper]
//   StandardGaussian sum(weights) == 1, expectation under N(0, I_dim)
enum class WeightKind { LebesgueOnBox, StandardGaussian };

// Deterministic quadrature rule. One node per row of `nodes`, one weight per
// node. Node order is fixed by construction, so reductions over a rule are
// reproducible. Weights may be negative (Smolyak combination rules).
struct QuadratureRule {
  int dim = 0;
  Eigen::MatrixXd nodes;    // size() x dim
  Eigen::VectorXd weights;  // size()
  WeightKind weight_kind = WeightKind::LebesgueOnBox;
  Eigen::VectorXd box_lower;  // LebesgueOnBox only
  Eigen::VectorXd box_upper;

  Eigen::Index size() const { return weights.size(); }
  double weight_sum() const { return weights.sum(); }
  double box_volume() const;
};

// Composite trapezoid with n_nodes >= 2 equispaced nodes on [a, b].
QuadratureRule trapezoid(int n_nodes, double a, double b);

// Gauss-Hermite in the probabilist normalization: exact for E[X^k], X ~ N(0,1),
// k <= 2n-1. Nodes are symmetrized about 0 so odd monomials cancel pairwise.
QuadratureRule gauss_hermite(int n_nodes);

// Gauss-Legendre on [a, b], exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre(int n_nodes, double a, double b);

// Nested Clenshaw-Curtis on [a, b]: 1 node (midpoint) at level 0, 2^level + 1
// Chebyshev extrema at level >= 1. Consecutive levels share nodes bitwise.
QuadratureRule clenshaw_curtis(int level, double a, double b);

// Maps a 1D level to a 1D rule together with its growth convention.
using RuleFamily = std::function<QuadratureRule(int level)>;

RuleFamily clenshaw_curtis_family(double a, double b);   // m(0)=1, m(l)=2^l+1
RuleFamily gauss_hermite_family();                       // m(l) = 2l+1
RuleFamily gauss_legendre_family(double a, double b);    // m(0)=1, m(l)=2^l+1

// Smolyak combination rule of total level `level` over `dim` axes drawn from
// one family. Duplicate nodes (per-coordinate distance <= 1e-14) are merged
// with summed weights; node order is lexicographic in the coordinates.
QuadratureRule smolyak(int dim, int level, const RuleFamily& family);

// Product rule on concatenated coordinates. Both operands must carry the same
// weight kind. Ordering: index = ia * b.size() + ib.
QuadratureRule tensor(const QuadratureRule& a, const QuadratureRule& b);

// Affine image of a LebesgueOnBox rule onto [lower, upper]: nodes are mapped
// coordinate-wise, weights are scaled by the volume ratio. Lets a rule built
// per axis on one interval serve a box with differing per-axis extents.
QuadratureRule affine_map_to_box(const QuadratureRule& rule,
                                 const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper);

// Sum over nodes in storage order. Throws if f returns a non-finite value.
double integrate(const QuadratureRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f);
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

// Weights rescaled to unit total mass: reads the rule as a probability
// measure (uniform on the box for LebesgueOnBox rules). Idempotent.
Eigen::VectorXd probability_weights(const QuadratureRule& rule);

}  // namespace oed
