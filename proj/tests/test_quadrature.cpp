#include "oed/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace oed;

namespace {

// x^k by repeated multiplication: exact sign symmetry under x -> -x.
double monomial(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// E[X^k] for X ~ N(0,1): (k-1)!! for even k, 0 for odd k.
double gaussian_moment(int k) {
  if (k % 2 == 1) return 0.0;
  long double acc = 1.0L;
  for (int j = k - 1; j >= 1; j -= 2) acc *= j;
  return double(acc);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("trapezoid: endpoints, weights, exactness on linears") {
  const QuadratureRule r = trapezoid(11, 0.0, 1.0);
  CHECK(r.size() == 11);
  CHECK(r.nodes(0, 0) == 0.0);
  CHECK(r.nodes(10, 0) == 1.0);
  CHECK(r.weights[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(r.weight_sum() == doctest::Approx(1.0).epsilon(1e-14));
  // integral of x over [0,1] = 1/2, trapezoid is exact on linear integrands
  const double v = integrate(r, [](double x) { return x; });
  CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
  const QuadratureRule r2 = trapezoid(101, -2.0, 3.0);
  CHECK(r2.weight_sum() == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("trapezoid: h^2 self-convergence on sin(pi x)") {
  // integral of sin(pi x) over [0,1] = 2/pi
  const double exact = 2.0 / M_PI;
  std::vector<double> logn, loge;
  for (int n : {17, 33, 65, 129, 257}) {
    const double v = integrate(trapezoid(n, 0.0, 1.0),
                               [](double x) { return std::sin(M_PI * x); });
    logn.push_back(std::log(double(n - 1)));
    loge.push_back(std::log(std::abs(v - exact)));
  }
  const double slope = ls_slope(logn, loge);
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.025));
}

TEST_CASE("gauss_hermite: weight normalization and moment exactness") {
  for (int n : {1, 2, 3, 5, 8, 13, 20, 64}) {
    const QuadratureRule r = gauss_hermite(n);
    CHECK(std::abs(r.weight_sum() - 1.0) < 1e-13);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      if (k % 2 == 0) {
        const double v = integrate(r, [k](double x) { return monomial(x, k); });
        const double m = gaussian_moment(k);
        CHECK(std::abs(v - m) <= 1e-10 * std::max(1.0, std::abs(m)));
      } else {
        // Nodes are symmetrized, so symmetric pair sums cancel exactly.
        double acc = 0.0;
        const Eigen::Index sz = r.size();
        for (Eigen::Index i = 0; i < sz / 2; ++i)
          acc += r.weights[i] * monomial(r.nodes(i, 0), k) +
                 r.weights[sz - 1 - i] * monomial(r.nodes(sz - 1 - i, 0), k);
        CHECK(std::abs(acc) <= 1e-12);
      }
    }
  }
}

TEST_CASE("gauss_hermite: node symmetry is exact") {
  const QuadratureRule r = gauss_hermite(21);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    CHECK(r.nodes(i, 0) == -r.nodes(r.size() - 1 - i, 0));
  CHECK(r.nodes(10, 0) == 0.0);
}

TEST_CASE("gauss_legendre: polynomial exactness to degree 2n-1") {
  // integral of x^5 over [0,1] = 1/6 with a 3-node rule
  const double v = integrate(gauss_legendre(3, 0.0, 1.0),
                             [](double x) { return monomial(x, 5); });
  CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  // integral of (x^3 - 2x) over [-2,3] = (3^4-(-2)^4)/4 - (3^2-(-2)^2)
  const double exact = (81.0 - 16.0) / 4.0 - (9.0 - 4.0);
  const double w = integrate(gauss_legendre(2, -2.0, 3.0),
                             [](double x) { return x * x * x - 2.0 * x; });
  CHECK(w == doctest::Approx(exact).epsilon(1e-13));
  CHECK(gauss_legendre(7, -2.0, 3.0).weight_sum() ==
        doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("clenshaw_curtis: sizes, known level-2 weights, weight sums") {
  CHECK(clenshaw_curtis(0, 0.0, 1.0).size() == 1);
  CHECK(clenshaw_curtis(1, 0.0, 1.0).size() == 3);
  CHECK(clenshaw_curtis(5, 0.0, 1.0).size() == 33);

  // 5-node rule on [-1,1]: weights (1/15, 8/15, 4/5, 8/15, 1/15)
  const QuadratureRule r = clenshaw_curtis(2, -1.0, 1.0);
  CHECK(r.weights[0] == doctest::Approx(1.0 / 15.0).epsilon(1e-13));
  CHECK(r.weights[1] == doctest::Approx(8.0 / 15.0).epsilon(1e-13));
  CHECK(r.weights[2] == doctest::Approx(4.0 / 5.0).epsilon(1e-13));
  CHECK(r.nodes(2, 0) == 0.0);

  for (int level : {0, 1, 2, 3, 4, 6}) {
    const QuadratureRule q = clenshaw_curtis(level, 0.25, 2.0);
    CHECK(q.weight_sum() == doctest::Approx(1.75).epsilon(1e-13));
  }
}

TEST_CASE("clenshaw_curtis: nested levels share nodes bitwise") {
  for (int level = 1; level <= 5; ++level) {
    const QuadratureRule coarse = clenshaw_curtis(level, 0.2, 1.0);
    const QuadratureRule fine = clenshaw_curtis(level + 1, 0.2, 1.0);
    for (Eigen::Index j = 0; j < coarse.size(); ++j)
      CHECK(coarse.nodes(j, 0) == fine.nodes(2 * j, 0));
  }
}

TEST_CASE("clenshaw_curtis: converges on smooth integrand") {
  // integral of e^x over [0,1] = e - 1
  const double exact = std::exp(1.0) - 1.0;
  const double e3 = std::abs(
      integrate(clenshaw_curtis(3, 0.0, 1.0), [](double x) { return std::exp(x); }) -
      exact);
  const double e5 = std::abs(
      integrate(clenshaw_curtis(5, 0.0, 1.0), [](double x) { return std::exp(x); }) -
      exact);
  CHECK(e3 < 1e-8);
  CHECK(e5 < 1e-13);
}

TEST_CASE("tensor: ordering, weights, boxes") {
  const QuadratureRule a = trapezoid(3, 0.0, 1.0);
  const QuadratureRule b = trapezoid(4, 2.0, 5.0);
  const QuadratureRule t = tensor(a, b);
  CHECK(t.dim == 2);
  CHECK(t.size() == 12);
  CHECK(t.weight_sum() == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(t.box_volume() == doctest::Approx(3.0).epsilon(1e-14));
  // index = ia * b.size() + ib
  CHECK(t.nodes(5, 0) == a.nodes(1, 0));
  CHECK(t.nodes(5, 1) == b.nodes(1, 0));
  CHECK(tensor(gauss_hermite(3), gauss_hermite(5)).weight_sum() ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS(tensor(a, gauss_hermite(3)));
}

TEST_CASE("smolyak: CC node counts match union-of-grids enumeration") {
  const RuleFamily cc = clenshaw_curtis_family(0.0, 1.0);
  CHECK(smolyak(2, 0, cc).size() == 1);
  CHECK(smolyak(2, 1, cc).size() == 5);
  CHECK(smolyak(2, 2, cc).size() == 13);
  CHECK(smolyak(2, 3, cc).size() == 29);
  CHECK(smolyak(3, 2, cc).size() == 25);
  CHECK(smolyak(3, 3, cc).size() == 69);
  // strictly sparser than the full tensor grid of the same level
  CHECK(smolyak(2, 2, cc).size() < 25);
  CHECK(smolyak(3, 3, cc).size() < 9 * 9 * 9);
}

TEST_CASE("smolyak: weight sums equal box volume / unit mass") {
  const RuleFamily cc = clenshaw_curtis_family(0.2, 1.0);
  for (int level : {0, 1, 2, 3, 4}) {
    const QuadratureRule r = smolyak(2, level, cc);
    CHECK(r.weight_sum() == doctest::Approx(0.64).epsilon(1e-12));
  }
  const RuleFamily gh = gauss_hermite_family();
  for (int level : {0, 1, 2, 3}) {
    const QuadratureRule r = smolyak(2, level, gh);
    CHECK(r.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // negative combination weights do appear at level >= 2
  CHECK(smolyak(2, 2, cc).weights.minCoeff() < 0.0);
}

TEST_CASE("smolyak: GH family node count and polynomial exactness") {
  const RuleFamily gh = gauss_hermite_family();
  const QuadratureRule r = smolyak(2, 2, gh);
  CHECK(r.size() == 17);  // two axes of {0,+-sqrt(3),+-gh5} unioned at origin
  // exact for total degree <= 2*level+1 = 5
  const double m22 = integrate(
      r, [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[1] * x[1]; });
  CHECK(m22 == doctest::Approx(1.0).epsilon(1e-12));
  const double m40 = integrate(
      r, [](const Eigen::VectorXd& x) { return monomial(x[0], 4); });
  CHECK(m40 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("smolyak: CC family converges on smooth 2D integrand") {
  // integral of e^(x+y) over [0,1]^2 = (e-1)^2
  const double exact = (std::exp(1.0) - 1.0) * (std::exp(1.0) - 1.0);
  const RuleFamily cc = clenshaw_curtis_family(0.0, 1.0);
  double prev = 1e100;
  for (int level : {1, 2, 3, 4, 5}) {
    const double err = std::abs(
        integrate(smolyak(2, level, cc),
                  [](const Eigen::VectorXd& x) { return std::exp(x[0] + x[1]); }) -
        exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("smolyak: repeated construction is bitwise identical") {
  const RuleFamily cc = clenshaw_curtis_family(0.0, 1.0);
  const QuadratureRule r1 = smolyak(3, 4, cc);
  const QuadratureRule r2 = smolyak(3, 4, cc);
  REQUIRE(r1.size() == r2.size());
  CHECK((r1.nodes.array() == r2.nodes.array()).all());
  CHECK((r1.weights.array() == r2.weights.array()).all());
}

TEST_CASE("integrate: error paths") {
  const QuadratureRule r = trapezoid(5, 0.0, 1.0);
  CHECK_THROWS(integrate(r, [](double x) { return 1.0 / (x - x); }));
  const QuadratureRule t = tensor(r, r);
  CHECK_THROWS(integrate(t, [](double) { return 1.0; }));  // 1D f on 2D rule
  CHECK_THROWS(trapezoid(1, 0.0, 1.0));
  CHECK_THROWS(clenshaw_curtis(-1, 0.0, 1.0));
  CHECK_THROWS(gauss_hermite(0));
}

TEST_CASE("affine_map_to_box: rescales nodes and weights exactly") {
  const RuleFamily gl = gauss_legendre_family(0.0, 1.0);
  const QuadratureRule unit = smolyak(3, 3, gl);
  Eigen::VectorXd lo(3), hi(3);
  lo << 0.0, 0.1, -2.0;
  hi << 1.0, 0.9, 3.0;
  const QuadratureRule mapped = affine_map_to_box(unit, lo, hi);
  REQUIRE(mapped.size() == unit.size());
  CHECK(std::abs(mapped.weight_sum() - mapped.box_volume()) < 1e-12);
  // Affine integrands are mapped exactly from the unit-box values.
  const double got = integrate(mapped, [](const Eigen::VectorXd& x) {
    return 2.0 + x[0] - 3.0 * x[1] + 0.5 * x[2];
  });
  const double vol = 1.0 * 0.8 * 5.0;
  const double exact = vol * (2.0 + 0.5 - 3.0 * 0.5 + 0.5 * 0.5);
  CHECK(std::abs(got - exact) < 1e-12);
  // Nodes stay inside the target box.
  for (Eigen::Index k = 0; k < mapped.size(); ++k)
    for (int j = 0; j < 3; ++j) {
      CHECK(mapped.nodes(k, j) >= lo[j] - 1e-14);
      CHECK(mapped.nodes(k, j) <= hi[j] + 1e-14);
    }
  CHECK_THROWS_AS(affine_map_to_box(unit, lo, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(affine_map_to_box(gauss_hermite(5), Eigen::VectorXd::Zero(1),
                                    Eigen::VectorXd::Ones(1)),
                  std::invalid_argument);
  Eigen::VectorXd bad = hi;
  bad[1] = 0.1;  // equals lo[1]: empty extent
  CHECK_THROWS_AS(affine_map_to_box(unit, lo, bad), std::invalid_argument);
}
