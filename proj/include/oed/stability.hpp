#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "oed/eig.hpp"
#include "oed/model.hpp"

// Study drivers: sweep a surrogate ladder over a design grid, measure how far
// the surrogate utility surface sits from the reference surface, check the
// perturbation bound at every (level, design) pair, and fit convergence
// rates. Everything here is deterministic for a fixed configuration; thread
// counts only partition work and never change results.

namespace oed {

// Tensor grid of design points. Points are flattened lexicographically with
// axis 0 as the most significant digit, so flat index
// i0 * (n1 * n2 * ...) + i1 * (n2 * ...) + ... maps to (a0[i0], a1[i1], ...).
// A grid with no axes has a single zero-dimensional point (for models that
// ignore the design).
struct DesignGrid {
  std::vector<Eigen::VectorXd> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  Eigen::Index size() const;
  Eigen::VectorXd point(Eigen::Index flat) const;
};

// Equispaced nodes-per-axis grid on [lower, upper]; nodes_per_axis >= 2
// includes both endpoints, 1 places the midpoint.
DesignGrid uniform_design_grid(const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper,
                               int nodes_per_axis);

// First index attaining the maximum, where values within a relative
// tolerance (1e-11) of the maximum count as tied. Because the grid
// flattening is lexicographic, ties resolve to the lexicographically
// smallest point; the tolerance keeps maximizers on symmetric utility
// surfaces from flipping between equal-by-symmetry twins on summation-order
// noise. Throws on empty or non-finite values.
Eigen::Index argmax_index(const Eigen::VectorXd& values);
Eigen::VectorXd argmax_on_grid(const Eigen::VectorXd& values,
                               const DesignGrid& grid);

// Expected information gain at every grid point (parallelized over designs;
// identical results for any thread count). evidence_rule, when non-null,
// supplies the nodes of the evidence mixture; by default the prior rule is
// shared.
Eigen::VectorXd utility_on_grid(const ObservationFn& g, const std::string& tag,
                                const DesignGrid& grid,
                                const QuadratureRule& prior_rule,
                                const QuadratureRule& noise_rule,
                                const GaussianDist& noise, int threads = 1,
                                const QuadratureRule* evidence_rule = nullptr);

struct SupUtilityResult {
  double sup_error = 0.0;
  Eigen::VectorXd per_design;
};

// Pointwise |u_reference - u_surrogate| and its maximum.
SupUtilityResult sup_utility_error(const Eigen::VectorXd& u_reference,
                                   const Eigen::VectorXd& u_surrogate);

// max over the grid of sqrt(E^{mu0} |g - g_n|^2_Gamma), the
// noise-weighted L2(mu0) distance between observation maps.
double sup_l2_distance(const ObservationFn& g, const ObservationFn& g_n,
                       const DesignGrid& grid,
                       const QuadratureRule& prior_rule,
                       const GaussianDist& noise);

// Perturbation bound at one design:
//   lhs = |U(d) - U_n(d)|
//   rhs = sqrt(K) * sqrt(ekl) + 2 * ekl
// where ekl is the prior-expected likelihood KL divergence and K is the
// second moment of the log likelihood ratio under both joint laws,
//   K = integral of log^2(lik/evidence) [true joint + surrogate joint].
// Both integrals reuse the change of variables y = G(x) + L eps onto the
// standard-Gaussian noise rule. If u_true_cached is non-null the reference
// utility is taken from it instead of being recomputed.
struct PropositionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double k_estimate = 0.0;
  double expected_kl = 0.0;
  double u_true = 0.0;
  double u_surrogate = 0.0;
};

PropositionCheck proposition_bound_check(
    const ObservationFn& g, const ObservationFn& g_n, const Eigen::VectorXd& d,
    const QuadratureRule& prior_rule, const QuadratureRule& noise_rule,
    const GaussianDist& noise, const double* u_true_cached = nullptr);

// Data-space divergence between the two evidence densities at one design:
//   lhs = KL(evidence_n || evidence)  (quadrature around the surrogate
//         evidence mixture, y = G_n(x) + L eps)
//   rhs = prior-expected likelihood KL divergence.
// The information-theoretic guarantee is lhs <= rhs.
struct EvidenceKlCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

EvidenceKlCheck evidence_kl_check(const ObservationFn& g,
                                  const ObservationFn& g_n,
                                  const Eigen::VectorXd& d,
                                  const QuadratureRule& prior_rule,
                                  const QuadratureRule& noise_rule,
                                  const GaussianDist& noise);

// Least-squares fit of log(err) (optionally log(err / (log N)^q)) against
// log(N). Entries with err <= floor or non-finite err are excluded; fewer
// than 3 surviving points throws std::invalid_argument.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
  std::vector<int> excluded_indices;
};

RateFit rate_fit(const std::vector<double>& sizes,
                 const std::vector<double>& errors, double floor = 0.0,
                 double correction_q = 0.0);

// One surrogate ladder entry after measurement.
struct LevelRecord {
  int ladder_value = 0;     // configured ladder entry (intervals/level/degree)
  double size_n = 0.0;      // reported abscissa N (node count where relevant)
  double sup_utility_error = 0.0;
  double sup_l2_distance = 0.0;
  Eigen::VectorXd argmax_design;
  Eigen::Index argmax_flat = -1;
  double u_n_at_argmax = 0.0;
  double k_estimate = 0.0;        // max over the grid
  double max_expected_kl = 0.0;   // max over the grid
  double worst_bound_gap = 0.0;   // max over the grid of lhs - rhs
  bool bound_ok = false;          // worst_bound_gap <= slack
  double value_gap_at_argmax = 0.0;  // |U_n(d*_n) - U(d*)|
  std::string failure;            // non-empty if this level failed
  Eigen::VectorXd u_surrogate;    // per design
  Eigen::VectorXd per_design_error;
};

struct EvidenceKlRecord {
  Eigen::VectorXd design;
  double lhs = 0.0;
  double rhs = 0.0;
};

// One rung of the surrogate ladder: the observation map to compare against
// the reference model and the size N reported as the convergence abscissa
// (knot count, grid-node count, or polynomial degree).
struct SurrogateLevel {
  ObservationFn fn;
  std::string tag;
  double size_n = 0.0;
};

struct StudyPlan {
  std::string name;
  ForwardModel model;
  // Builds the ladder entry for a configured ladder value.
  std::function<SurrogateLevel(int)> build_level;
  std::vector<int> ladder;  // strictly increasing
  DesignGrid grid;
  QuadratureRule prior_rule;  // parameter-space rule for the gain estimator
  QuadratureRule noise_rule;  // standard-Gaussian rule, dim = noise dim
  QuadratureRule l2_rule;     // parameter-space rule for the L2 distance
  // Optional separate rule for the evidence mixture (empty = share the prior
  // rule). Needed when the prior rule is a sparse-combination rule: signed
  // weights are fine for the outer expectation but the evidence mixture is a
  // density approximation and must be built from a positive rule.
  QuadratureRule evidence_rule;
  GaussianDist noise = isotropic_gaussian(1, 1.0);
  // Evidence divergence checks run at up to 5 designs on one ladder entry
  // (evidence_ladder_value, or the first entry when -1).
  bool evidence_checks = false;
  int evidence_ladder_value = -1;
  // Optional independent-fidelity recomputation of the reference surface,
  // reported as max |U_hi - U| (should sit below the smallest level error).
  bool fidelity_check = false;
  QuadratureRule fidelity_prior_rule;
  QuadratureRule fidelity_noise_rule;
  double rate_floor = 1e-7;
  double correction_q = 0.0;  // fit a second, corrected utility rate if != 0
  double bound_slack = 1e-8;
  int threads = 1;
};

struct StabilityReport {
  std::string name;
  std::vector<LevelRecord> levels;
  Eigen::VectorXd u_true;          // reference utility per design
  Eigen::VectorXd argmax_true;     // reference maximizer d*
  Eigen::Index argmax_true_flat = -1;
  double u_at_true_argmax = 0.0;
  double assumption_fourth_moment = 0.0;  // sup_d E^{mu0} |G|^4_Gamma
  RateFit utility_rate;            // slope of sup error vs N
  RateFit l2_rate;                 // slope of sup L2 distance vs N
  RateFit utility_rate_corrected;  // only when correction_q != 0
  bool rates_defined = false;
  bool corrected_rate_defined = false;
  std::string rate_failure;        // why rates are undefined, if they are
  // Smallest ladder N from which d*_n == d* holds through the last level;
  // -1 when the maximizer never stabilizes onto the reference argmax.
  double argmax_stable_from = -1.0;
  // For every stabilized level, |U_n(d*_n) - U(d*)| <= 2 * sup error held.
  bool maximizer_value_ok = true;
  std::vector<EvidenceKlRecord> evidence_checks;
  bool evidence_checks_ok = true;
  std::string evidence_failure;
  double fidelity_shift = 0.0;     // max |U_hi - U| when fidelity_check ran
  bool fidelity_checked = false;
};

StabilityReport run_study(const StudyPlan& plan);

}  // namespace oed
