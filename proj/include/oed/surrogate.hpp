#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "oed/model.hpp"
#include "oed/quadrature.hpp"

namespace oed {

enum class SurrogateKind { PiecewiseLinearX, SparseMultilinear, Pce };

// Piecewise-linear-in-x payload. Knot values depend on the design, so they
// are computed on first use per design and memoized; the cache is guarded by
// a mutex and duplicate concurrent computes are allowed (results are
// value-equal, last write wins).
struct PlxData {
  int n_intervals = 0;
  ForwardModel model;

  // Returns the data_dim x (n_intervals + 1) matrix of model values at the
  // equidistant knots for this design. The reference stays valid for the
  // lifetime of this object (std::map nodes are stable under insertion).
  const Eigen::MatrixXd& knot_values(const Eigen::VectorXd& d) const;

 private:
  mutable std::mutex mu_;
  mutable std::map<std::vector<std::uint64_t>, Eigen::MatrixXd> cache_;
};

// One node of a hierarchical sparse-grid interpolant. Per axis k the 1D
// level is level[k] and index[k] identifies the node within the full
// equidistant grid of that level (coordinate index/2^level in unit space;
// the level-0 grid is the single midpoint 1/2). surplus is the hierarchical
// correction carried by this node's basis function.
struct SparseGridNode {
  Eigen::VectorXi level;
  Eigen::VectorXi index;
  Eigen::VectorXd unit;     // node coordinates in [0,1]^dim
  Eigen::VectorXd surplus;  // data_dim
};

struct SparseMultilinearData {
  int level = 0;  // max 1-norm of the per-axis level multi-index
  Eigen::VectorXd lower, upper;
  std::vector<SparseGridNode> nodes;
};

enum class PceTruncation { TotalDegree, TensorDegree };

struct PceData {
  int degree = 0;
  PceTruncation truncation = PceTruncation::TotalDegree;
  Eigen::VectorXd lower, upper;               // projection box
  std::vector<Eigen::VectorXi> multi_index;   // one entry per basis term
  Eigen::MatrixXd coeffs;                     // data_dim x n_terms
};

// An approximation of a ForwardModel at fidelity level_param (knot-interval
// count, grid node count, or polynomial total degree depending on kind).
// Evaluation is deterministic and throws outside the construction domain.
struct Surrogate {
  SurrogateKind kind = SurrogateKind::PiecewiseLinearX;
  int level_param = 0;
  int param_dim = 0;
  int design_dim = 0;
  int data_dim = 0;
  std::string tag;
  ObservationFn eval;

  std::shared_ptr<const PlxData> plx;
  std::shared_ptr<const SparseMultilinearData> sparse;
  std::shared_ptr<const PceData> pce;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& d) const;
};

// Piecewise-linear interpolation of the model in its scalar parameter over
// [0,1] with n_intervals equal intervals (n_intervals + 1 knots). The design
// argument passes through to the model.
Surrogate build_pl_x(const ForwardModel& model, int n_intervals);

// Sparse-grid piecewise-multilinear interpolant of the model over the box
// [lower, upper] in the joint (parameter, design) variables, built from
// hierarchical surpluses on nested equidistant grids with doubling growth
// (1, 3, 5, 9, ... nodes per axis). level bounds the 1-norm of the per-axis
// level multi-index. level_param reports the grid node count.
Surrogate build_sparse_multilinear(const ForwardModel& model, int level,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper);

// Polynomial chaos expansion of the model over the box [lower, upper] in the
// joint (parameter, design) variables: tensorized shifted Legendre
// polynomials, orthonormal under the uniform probability measure on the box,
// with coefficients computed by discrete projection under projection_rule
// (a Lebesgue rule over the same box). With use_generic_denominator the
// coefficient denominators integrate the squared basis numerically instead
// of assuming orthonormality; both paths agree for exact rules.
Surrogate build_pce(const ForwardModel& model, int degree,
                    const QuadratureRule& projection_rule,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                    PceTruncation truncation = PceTruncation::TotalDegree,
                    bool use_generic_denominator = false);

// Value at t in [0,1] of the degree-k shifted Legendre polynomial normalized
// to unit L2 norm under the uniform probability measure on [0,1].
double shifted_legendre(int k, double t);

// Multi-index sets for PCE truncation, enumerated in a fixed lexicographic
// order (deterministic across runs).
std::vector<Eigen::VectorXi> total_degree_set(int input_dim, int degree);
std::vector<Eigen::VectorXi> tensor_degree_set(int input_dim, int degree);

// Lossless text serialization (JSON). Piecewise-linear surrogates rebind to
// the model passed at load time (the payload is the model itself); the other
// kinds are self-contained. Loading a piecewise-linear surrogate without a
// model, or with a model whose tag differs from the saved one, is an error.
std::string save_surrogate(const Surrogate& s);
Surrogate load_surrogate(const std::string& text,
                         const ForwardModel* rebind_model = nullptr);

}  // namespace oed
