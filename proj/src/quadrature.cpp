#include "oed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oed {

namespace {

// Nodes and weights of a Gaussian rule from the symmetric tridiagonal Jacobi
// matrix (Golub-Welsch). mu0 is the total mass of the weight function.
// Eigenvector-based weights lose all relative accuracy once they underflow
// toward ~1e-50 (large Gauss-Hermite rules), so nodes come from the
// eigensolver and weights from the orthonormal-recurrence identity
// w_i = mu0 / sum_k p_k(x_i)^2, after a Newton polish of each node.
void golub_welsch(const Eigen::VectorXd& subdiag, double mu0,
                  Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const Eigen::Index n = subdiag.size() + 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(Eigen::VectorXd::Zero(n), subdiag,
                            Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("quadrature: tridiagonal eigensolve failed");
  nodes = es.eigenvalues();  // ascending

  // Orthonormal polynomials via p_{k+1} = (x p_k - b_k p_{k-1}) / b_{k+1}
  // with b_k = subdiag[k-1]; returns p_n, p_n' and sum_{k<n} p_k(x)^2.
  const auto recurrence = [&](double x, double& pn, double& dpn) {
    double p_prev = 0.0, p = 1.0, dp_prev = 0.0, dp = 0.0, sumsq = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double bk = (k > 0) ? subdiag[k - 1] : 0.0;
      const double bk1 = (k + 1 < n) ? subdiag[k] : subdiag[n - 2];
      const double p_next = (x * p - bk * p_prev) / bk1;
      const double dp_next = (p + x * dp - bk * dp_prev) / bk1;
      if (k + 1 < n) sumsq += p_next * p_next;
      p_prev = p;
      p = p_next;
      dp_prev = dp;
      dp = dp_next;
    }
    pn = p;
    dpn = dp;
    return sumsq;
  };

  weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = nodes[i], pn = 0.0, dpn = 0.0;
    for (int it = 0; it < 3; ++it) {
      recurrence(x, pn, dpn);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    nodes[i] = x;
    const double sumsq = recurrence(x, pn, dpn);
    weights[i] = mu0 / sumsq;
  }
}

// Enforce exact reflection symmetry about 0 on an ascending node set. Odd
// monomials then cancel pairwise in exact pair sums.
void symmetrize(Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const Eigen::Index n = nodes.size();
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index j = n - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    nodes[i] = -x;
    nodes[j] = x;
    const double w = 0.5 * (weights[i] + weights[j]);
    weights[i] = w;
    weights[j] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule make_1d(Eigen::VectorXd nodes, Eigen::VectorXd weights,
                       WeightKind kind, double a, double b) {
  QuadratureRule r;
  r.dim = 1;
  r.nodes = nodes;
  r.weights = std::move(weights);
  r.weight_kind = kind;
  if (kind == WeightKind::LebesgueOnBox) {
    r.box_lower = Eigen::VectorXd::Constant(1, a);
    r.box_upper = Eigen::VectorXd::Constant(1, b);
  }
  return r;
}

unsigned long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Sort nodes lexicographically and merge runs whose coordinates agree within
// tol. Weights of merged nodes are summed in sorted order.
void merge_nodes(std::vector<Eigen::VectorXd>& nodes, std::vector<double>& weights,
                 double tol) {
  const std::size_t n = nodes.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Eigen::VectorXd& x = nodes[a];
    const Eigen::VectorXd& y = nodes[b];
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (x[k] < y[k]) return true;
      if (x[k] > y[k]) return false;
    }
    return false;
  });
  std::vector<Eigen::VectorXd> out_nodes;
  std::vector<double> out_weights;
  out_nodes.reserve(n);
  out_weights.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::VectorXd& x = nodes[idx[t]];
    const double w = weights[idx[t]];
    if (!out_nodes.empty() &&
        (x - out_nodes.back()).cwiseAbs().maxCoeff() <= tol) {
      out_weights.back() += w;
    } else {
      out_nodes.push_back(x);
      out_weights.push_back(w);
    }
  }
  nodes = std::move(out_nodes);
  weights = std::move(out_weights);
}

}  // namespace

double QuadratureRule::box_volume() const {
  if (weight_kind != WeightKind::LebesgueOnBox)
    throw std::logic_error("box_volume: rule is not LebesgueOnBox");
  return (box_upper - box_lower).prod();
}

QuadratureRule trapezoid(int n_nodes, double a, double b) {
  if (n_nodes < 2) throw std::invalid_argument("trapezoid: need n_nodes >= 2");
  if (!(a < b)) throw std::invalid_argument("trapezoid: need a < b");
  const double h = (b - a) / (n_nodes - 1);
  Eigen::VectorXd nodes(n_nodes), weights(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    nodes[i] = a + h * i;
    weights[i] = h;
  }
  nodes[n_nodes - 1] = b;  // avoid accumulated rounding at the right endpoint
  weights[0] *= 0.5;
  weights[n_nodes - 1] *= 0.5;
  return make_1d(nodes, weights, WeightKind::LebesgueOnBox, a, b);
}

QuadratureRule gauss_hermite(int n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("gauss_hermite: need n_nodes >= 1");
  Eigen::VectorXd nodes, weights;
  if (n_nodes == 1) {
    nodes = Eigen::VectorXd::Zero(1);
    weights = Eigen::VectorXd::Ones(1);
  } else {
    Eigen::VectorXd sub(n_nodes - 1);
    for (int k = 1; k < n_nodes; ++k) sub[k - 1] = std::sqrt(double(k));
    golub_welsch(sub, 1.0, nodes, weights);
    symmetrize(nodes, weights);
  }
  QuadratureRule r = make_1d(nodes, weights, WeightKind::StandardGaussian, 0, 0);
  return r;
}

QuadratureRule gauss_legendre(int n_nodes, double a, double b) {
  if (n_nodes < 1) throw std::invalid_argument("gauss_legendre: need n_nodes >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");
  Eigen::VectorXd nodes, weights;
  if (n_nodes == 1) {
    nodes = Eigen::VectorXd::Zero(1);
    weights = Eigen::VectorXd::Constant(1, 2.0);
  } else {
    Eigen::VectorXd sub(n_nodes - 1);
    for (int k = 1; k < n_nodes; ++k)
      sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(sub, 2.0, nodes, weights);
    symmetrize(nodes, weights);
  }
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  for (Eigen::Index i = 0; i < nodes.size(); ++i) nodes[i] = c + s * nodes[i];
  weights *= s;
  return make_1d(nodes, weights, WeightKind::LebesgueOnBox, a, b);
}

QuadratureRule clenshaw_curtis(int level, double a, double b) {
  if (level < 0) throw std::invalid_argument("clenshaw_curtis: need level >= 0");
  if (level > 24) throw std::invalid_argument("clenshaw_curtis: level too large");
  if (!(a < b)) throw std::invalid_argument("clenshaw_curtis: need a < b");
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  if (level == 0) {
    Eigen::VectorXd nodes = Eigen::VectorXd::Constant(1, c);
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(1, b - a);
    return make_1d(nodes, weights, WeightKind::LebesgueOnBox, a, b);
  }
  const int N = 1 << level;  // N + 1 nodes, N even
  const int n = N + 1;
  Eigen::VectorXd t(n), w(n);
  const double theta0 = M_PI / N;  // exact: pi scaled by a power of two
  // Build the lower half and mirror it so the node set is exactly symmetric.
  // theta_j = j*pi/N computed as j*(pi/N) keeps nested levels bitwise equal.
  for (int j = N / 2; j < n; ++j) t[j] = -std::cos(j * theta0);
  t[N / 2] = 0.0;
  for (int j = 0; j < N / 2; ++j) t[j] = -t[N - j];
  for (int j = N / 2; j < n; ++j) {
    double acc = 1.0;
    for (int k = 1; k <= N / 2; ++k) {
      const double bk = (k == N / 2) ? 1.0 : 2.0;
      acc -= bk * std::cos(2.0 * k * (j * theta0)) / (4.0 * k * k - 1.0);
    }
    const double cj = (j == 0 || j == N) ? 1.0 : 2.0;
    w[j] = cj / N * acc;
  }
  for (int j = 0; j < N / 2; ++j) w[j] = w[N - j];
  Eigen::VectorXd nodes(n);
  for (int j = 0; j < n; ++j) nodes[j] = c + s * t[j];
  w *= s;
  return make_1d(nodes, w, WeightKind::LebesgueOnBox, a, b);
}

RuleFamily clenshaw_curtis_family(double a, double b) {
  return [a, b](int level) { return clenshaw_curtis(level, a, b); };
}

RuleFamily gauss_hermite_family() {
  return [](int level) {
    if (level < 0) throw std::invalid_argument("gauss_hermite_family: level < 0");
    return gauss_hermite(2 * level + 1);
  };
}

RuleFamily gauss_legendre_family(double a, double b) {
  return [a, b](int level) {
    if (level < 0) throw std::invalid_argument("gauss_legendre_family: level < 0");
    return gauss_legendre(level == 0 ? 1 : (1 << level) + 1, a, b);
  };
}

QuadratureRule tensor(const QuadratureRule& a, const QuadratureRule& b) {
  if (a.weight_kind != b.weight_kind)
    throw std::invalid_argument("tensor: operands must share a weight kind");
  QuadratureRule r;
  r.dim = a.dim + b.dim;
  r.weight_kind = a.weight_kind;
  r.nodes.resize(a.size() * b.size(), r.dim);
  r.weights.resize(a.size() * b.size());
  for (Eigen::Index ia = 0; ia < a.size(); ++ia) {
    for (Eigen::Index ib = 0; ib < b.size(); ++ib) {
      const Eigen::Index k = ia * b.size() + ib;
      r.nodes.block(k, 0, 1, a.dim) = a.nodes.row(ia);
      r.nodes.block(k, a.dim, 1, b.dim) = b.nodes.row(ib);
      r.weights[k] = a.weights[ia] * b.weights[ib];
    }
  }
  if (r.weight_kind == WeightKind::LebesgueOnBox) {
    r.box_lower.resize(r.dim);
    r.box_upper.resize(r.dim);
    r.box_lower << a.box_lower, b.box_lower;
    r.box_upper << a.box_upper, b.box_upper;
  }
  return r;
}

QuadratureRule affine_map_to_box(const QuadratureRule& rule,
                                 const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper) {
  if (rule.weight_kind != WeightKind::LebesgueOnBox)
    throw std::invalid_argument("affine_map_to_box: rule must be Lebesgue");
  if (lower.size() != rule.dim || upper.size() != rule.dim)
    throw std::invalid_argument("affine_map_to_box: box dimension mismatch");
  for (Eigen::Index j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j]))
      throw std::invalid_argument("affine_map_to_box: empty box");

  QuadratureRule r = rule;
  double scale = 1.0;
  for (Eigen::Index j = 0; j < rule.dim; ++j) {
    const double src_lo = rule.box_lower[j];
    const double src_len = rule.box_upper[j] - rule.box_lower[j];
    const double dst_len = upper[j] - lower[j];
    scale *= dst_len / src_len;
    for (Eigen::Index k = 0; k < r.size(); ++k)
      r.nodes(k, j) =
          lower[j] + (rule.nodes(k, j) - src_lo) * (dst_len / src_len);
  }
  r.weights *= scale;
  r.box_lower = lower;
  r.box_upper = upper;
  return r;
}

QuadratureRule smolyak(int dim, int level, const RuleFamily& family) {
  if (dim < 1) throw std::invalid_argument("smolyak: need dim >= 1");
  if (level < 0) throw std::invalid_argument("smolyak: need level >= 0");

  std::vector<QuadratureRule> rules_1d(level + 1);
  for (int l = 0; l <= level; ++l) {
    rules_1d[l] = family(l);
    if (rules_1d[l].dim != 1)
      throw std::invalid_argument("smolyak: family must produce 1D rules");
    if (rules_1d[l].weight_kind != rules_1d[0].weight_kind)
      throw std::invalid_argument("smolyak: family changed weight kind across levels");
  }

  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;

  // Combination formula over 0-based multi-levels l with
  // max(0, level-dim+1) <= |l| <= level and coefficient
  // (-1)^(level-|l|) * C(dim-1, level-|l|).
  std::vector<int> ml(dim, 0);
  const std::function<void(int, int)> recurse = [&](int axis, int remaining) {
    if (axis == dim - 1) {
      for (int l = 0; l <= remaining; ++l) {
        ml[axis] = l;
        const int total = level - (remaining - l);
        const int deficit = level - total;
        if (deficit > dim - 1) continue;
        const double coef =
            ((deficit % 2 == 0) ? 1.0 : -1.0) * double(binom(dim - 1, deficit));
        QuadratureRule term = rules_1d[ml[0]];
        for (int k = 1; k < dim; ++k) term = tensor(term, rules_1d[ml[k]]);
        for (Eigen::Index i = 0; i < term.size(); ++i) {
          nodes.push_back(term.nodes.row(i).transpose());
          weights.push_back(coef * term.weights[i]);
        }
      }
      return;
    }
    for (int l = 0; l <= remaining; ++l) {
      ml[axis] = l;
      recurse(axis + 1, remaining - l);
    }
  };
  recurse(0, level);

  merge_nodes(nodes, weights, 1e-14);

  QuadratureRule r;
  r.dim = dim;
  r.weight_kind = rules_1d[0].weight_kind;
  r.nodes.resize(Eigen::Index(nodes.size()), dim);
  r.weights.resize(Eigen::Index(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    r.nodes.row(Eigen::Index(i)) = nodes[i].transpose();
    r.weights[Eigen::Index(i)] = weights[i];
  }
  if (r.weight_kind == WeightKind::LebesgueOnBox) {
    r.box_lower = Eigen::VectorXd::Constant(dim, rules_1d[0].box_lower[0]);
    r.box_upper = Eigen::VectorXd::Constant(dim, rules_1d[0].box_upper[0]);
  }
  return r;
}

double integrate(const QuadratureRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes.row(i).transpose());
    if (!std::isfinite(v))
      throw std::runtime_error("integrate: non-finite integrand at node " +
                               std::to_string(i));
    acc += rule.weights[i] * v;
  }
  return acc;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  if (rule.dim != 1)
    throw std::invalid_argument("integrate: scalar integrand needs a 1D rule");
  return integrate(rule, [&](const Eigen::VectorXd& x) { return f(x[0]); });
}

Eigen::VectorXd probability_weights(const QuadratureRule& rule) {
  const double total = rule.weight_sum();
  if (!(total > 0.0))
    throw std::invalid_argument("probability_weights: nonpositive total mass");
  return rule.weights / total;
}

}  // namespace oed
