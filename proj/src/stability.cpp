#include "oed/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oed/eig_kernel.hpp"

namespace oed {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double likelihood_log_norm(const GaussianDist& noise) {
  return -0.5 * noise.logdet() -
         0.5 * static_cast<double>(noise.dim()) * kLog2Pi;
}

// Reference quantities at one design, computed once and reused across the
// surrogate ladder: the outer whitened observations, the evidence mixture
// kernel, the reference utility, the true-joint half of the log-ratio second
// moment, and the fourth moment of the noise-weighted observation norm.
struct ReferenceDesignData {
  Eigen::MatrixXd w_outer;       // prior-rule whitened observations
  detail::MixtureKernel kernel;  // evidence mixture (shares w_outer unless a
                                 // separate evidence rule is configured)
  double u = 0.0;
  double k_true = 0.0;
  double fourth_moment = 0.0;
};

// evidence_rule/w_evidence are null when the evidence mixture shares the
// prior rule.
ReferenceDesignData reference_design_pass(const ObservationFn& g,
                                          const Eigen::VectorXd& d,
                                          const QuadratureRule& prior_rule,
                                          const Eigen::VectorXd& w_prior,
                                          const QuadratureRule& noise_rule,
                                          const Eigen::VectorXd& w_noise,
                                          const GaussianDist& noise,
                                          const QuadratureRule* evidence_rule,
                                          const Eigen::VectorXd* w_evidence) {
  ReferenceDesignData ref;
  ref.w_outer = detail::whitened_observations(g, prior_rule, d, noise);
  const double log_norm = likelihood_log_norm(noise);
  if (evidence_rule != nullptr) {
    ref.kernel = detail::make_mixture_kernel(
        detail::whitened_observations(g, *evidence_rule, d, noise),
        *w_evidence, log_norm);
  } else {
    ref.kernel = detail::make_mixture_kernel(ref.w_outer, w_prior, log_norm);
  }

  Eigen::VectorXd sq(ref.kernel.rows.rows()), terms(ref.kernel.rows.rows());
  Eigen::RowVectorXd z(noise.dim());
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    ref.fourth_moment += w_prior[k] * ref.w_outer.row(k).squaredNorm() *
                         ref.w_outer.row(k).squaredNorm();
    for (Eigen::Index m = 0; m < noise_rule.size(); ++m) {
      const auto eps = noise_rule.nodes.row(m);
      z = ref.w_outer.row(k) + eps;
      const double loglik = -0.5 * eps.squaredNorm() + ref.kernel.log_norm;
      const double ratio = loglik - ref.kernel.log_evidence_at(z, sq, terms);
      const double wt = w_prior[k] * w_noise[m];
      ref.u += wt * ratio;
      ref.k_true += wt * ratio * ratio;
    }
  }
  if (!std::isfinite(ref.u) || !std::isfinite(ref.k_true))
    throw std::runtime_error("reference utility pass produced non-finite values");
  return ref;
}

// Surrogate-side quantities at one design for one ladder entry: the
// surrogate utility, the surrogate-joint half of the log-ratio second
// moment, and the expected likelihood KL divergence.
struct LevelDesignData {
  double u_surr = 0.0;
  double k_surr = 0.0;
  double expected_kl = 0.0;
};

LevelDesignData level_design_pass(const ObservationFn& g_n,
                                  const Eigen::VectorXd& d,
                                  const ReferenceDesignData& ref,
                                  const QuadratureRule& prior_rule,
                                  const Eigen::VectorXd& w_prior,
                                  const QuadratureRule& noise_rule,
                                  const Eigen::VectorXd& w_noise,
                                  const GaussianDist& noise,
                                  const QuadratureRule* evidence_rule,
                                  const Eigen::VectorXd* w_evidence) {
  LevelDesignData out;
  const Eigen::MatrixXd w_n_outer =
      detail::whitened_observations(g_n, prior_rule, d, noise);
  const detail::MixtureKernel surr =
      evidence_rule != nullptr
          ? detail::make_mixture_kernel(
                detail::whitened_observations(g_n, *evidence_rule, d, noise),
                *w_evidence, ref.kernel.log_norm)
          : detail::make_mixture_kernel(w_n_outer, w_prior,
                                        ref.kernel.log_norm);

  double ekl = 0.0;
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k)
    ekl += 0.5 * w_prior[k] *
           (w_n_outer.row(k) - ref.w_outer.row(k)).squaredNorm();
  // Signed rules can render a tiny true distance as a tiny negative number.
  out.expected_kl = std::max(ekl, 0.0);

  Eigen::VectorXd sq(surr.rows.rows()), terms(surr.rows.rows());
  Eigen::RowVectorXd z(noise.dim());
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    for (Eigen::Index m = 0; m < noise_rule.size(); ++m) {
      const auto eps = noise_rule.nodes.row(m);
      z = w_n_outer.row(k) + eps;
      const double wt = w_prior[k] * w_noise[m];
      // Surrogate utility: surrogate likelihood against surrogate evidence.
      const double loglik_surr = -0.5 * eps.squaredNorm() + surr.log_norm;
      out.u_surr += wt * (loglik_surr - surr.log_evidence_at(z, sq, terms));
      // Log ratio of the reference model evaluated at the surrogate draw.
      const double loglik_true =
          -0.5 * (z - ref.w_outer.row(k)).squaredNorm() + ref.kernel.log_norm;
      const double ratio =
          loglik_true - ref.kernel.log_evidence_at(z, sq, terms);
      out.k_surr += wt * ratio * ratio;
    }
  }
  if (!std::isfinite(out.u_surr) || !std::isfinite(out.k_surr))
    throw std::runtime_error("surrogate utility pass produced non-finite values");
  return out;
}

PropositionCheck assemble_check(const ReferenceDesignData& ref,
                                const LevelDesignData& lvl,
                                const double* u_true_cached) {
  PropositionCheck out;
  out.u_true = u_true_cached != nullptr ? *u_true_cached : ref.u;
  out.u_surrogate = lvl.u_surr;
  out.expected_kl = lvl.expected_kl;
  out.k_estimate = ref.k_true + lvl.k_surr;
  out.lhs = std::abs(out.u_true - out.u_surrogate);
  out.rhs = std::sqrt(out.k_estimate) * std::sqrt(lvl.expected_kl) +
            2.0 * lvl.expected_kl;
  return out;
}

void validate_eig_rules(const QuadratureRule& prior_rule,
                        const QuadratureRule& noise_rule,
                        const GaussianDist& noise, int param_dim) {
  if (param_dim > 0 && prior_rule.dim != param_dim)
    throw std::invalid_argument(
        "prior rule dimension does not match the parameter dimension");
  if (noise_rule.weight_kind != WeightKind::StandardGaussian)
    throw std::invalid_argument("noise rule must be a standard-Gaussian rule");
  if (noise_rule.dim != noise.dim())
    throw std::invalid_argument(
        "noise rule dimension does not match the noise dimension");
}

}  // namespace

Eigen::Index DesignGrid::size() const {
  Eigen::Index n = 1;
  for (const auto& axis : axes) {
    if (axis.size() == 0)
      throw std::invalid_argument("design grid axis has no nodes");
    n *= axis.size();
  }
  return n;
}

Eigen::VectorXd DesignGrid::point(Eigen::Index flat) const {
  if (flat < 0 || flat >= size())
    throw std::out_of_range("design grid index out of range");
  Eigen::VectorXd p(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    const Eigen::Index n = axes[static_cast<std::size_t>(a)].size();
    p[a] = axes[static_cast<std::size_t>(a)][flat % n];
    flat /= n;
  }
  return p;
}

DesignGrid uniform_design_grid(const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper,
                               int nodes_per_axis) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("design box bounds have different dimensions");
  if (nodes_per_axis < 1)
    throw std::invalid_argument("design grid needs at least one node per axis");
  DesignGrid grid;
  for (Eigen::Index a = 0; a < lower.size(); ++a) {
    if (!(lower[a] < upper[a]))
      throw std::invalid_argument("design box is empty along an axis");
    Eigen::VectorXd axis(nodes_per_axis);
    if (nodes_per_axis == 1) {
      axis[0] = 0.5 * (lower[a] + upper[a]);
    } else {
      for (int i = 0; i < nodes_per_axis; ++i)
        axis[i] = lower[a] + (upper[a] - lower[a]) * i / (nodes_per_axis - 1);
    }
    grid.axes.push_back(axis);
  }
  return grid;
}

Eigen::Index argmax_index(const Eigen::VectorXd& values) {
  if (values.size() == 0)
    throw std::invalid_argument("argmax of an empty value list");
  if (!values.allFinite())
    throw std::invalid_argument("argmax over non-finite values");
  // Values within a relative tolerance of the maximum count as tied and the
  // smallest index wins. Utility surfaces with exact design symmetries (e.g.
  // swapping the two sensors) produce pairs equal up to summation-order
  // noise; without the tolerance the reported maximizer would flip between
  // symmetric twins on last-bit differences.
  const double max_v = values.maxCoeff();
  const double tol = 1e-11 * std::max(1.0, std::abs(max_v));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] >= max_v - tol) return i;
  return values.size() - 1;  // unreachable: the max itself qualifies
}

Eigen::VectorXd argmax_on_grid(const Eigen::VectorXd& values,
                               const DesignGrid& grid) {
  if (values.size() != grid.size())
    throw std::invalid_argument("value list does not match the grid size");
  return grid.point(argmax_index(values));
}

Eigen::VectorXd utility_on_grid(const ObservationFn& g, const std::string& tag,
                                const DesignGrid& grid,
                                const QuadratureRule& prior_rule,
                                const QuadratureRule& noise_rule,
                                const GaussianDist& noise, int threads,
                                const QuadratureRule* evidence_rule) {
  Eigen::VectorXd u(grid.size());
  detail::parallel_for(grid.size(), threads, [&](Eigen::Index i) {
    u[i] = expected_information_gain(g, tag, grid.point(i), prior_rule,
                                     noise_rule, noise, evidence_rule)
               .value;
  });
  return u;
}

SupUtilityResult sup_utility_error(const Eigen::VectorXd& u_reference,
                                   const Eigen::VectorXd& u_surrogate) {
  if (u_reference.size() != u_surrogate.size())
    throw std::invalid_argument("utility surfaces have different sizes");
  if (u_reference.size() == 0)
    throw std::invalid_argument("utility surfaces are empty");
  SupUtilityResult out;
  out.per_design = (u_reference - u_surrogate).cwiseAbs();
  out.sup_error = out.per_design.maxCoeff();
  return out;
}

double sup_l2_distance(const ObservationFn& g, const ObservationFn& g_n,
                       const DesignGrid& grid,
                       const QuadratureRule& prior_rule,
                       const GaussianDist& noise) {
  const Eigen::VectorXd w = probability_weights(prior_rule);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd d = grid.point(i);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
      const Eigen::VectorXd x = prior_rule.nodes.row(k);
      const Eigen::VectorXd delta = g(x, d) - g_n(x, d);
      if (delta.size() != noise.dim())
        throw std::invalid_argument(
            "observation dimension does not match the noise dimension");
      acc += w[k] * noise.whiten(delta).squaredNorm();
    }
    // Signed rules can render a tiny true distance as a tiny negative number.
    worst = std::max(worst, acc);
  }
  return std::sqrt(std::max(worst, 0.0));
}

PropositionCheck proposition_bound_check(
    const ObservationFn& g, const ObservationFn& g_n, const Eigen::VectorXd& d,
    const QuadratureRule& prior_rule, const QuadratureRule& noise_rule,
    const GaussianDist& noise, const double* u_true_cached) {
  validate_eig_rules(prior_rule, noise_rule, noise, 0);
  const Eigen::VectorXd w_prior = probability_weights(prior_rule);
  const Eigen::VectorXd w_noise = probability_weights(noise_rule);
  const ReferenceDesignData ref = reference_design_pass(
      g, d, prior_rule, w_prior, noise_rule, w_noise, noise, nullptr, nullptr);
  const LevelDesignData lvl =
      level_design_pass(g_n, d, ref, prior_rule, w_prior, noise_rule, w_noise,
                        noise, nullptr, nullptr);
  return assemble_check(ref, lvl, u_true_cached);
}

EvidenceKlCheck evidence_kl_check(const ObservationFn& g,
                                  const ObservationFn& g_n,
                                  const Eigen::VectorXd& d,
                                  const QuadratureRule& prior_rule,
                                  const QuadratureRule& noise_rule,
                                  const GaussianDist& noise) {
  validate_eig_rules(prior_rule, noise_rule, noise, 0);
  const Eigen::VectorXd w_prior = probability_weights(prior_rule);
  const Eigen::VectorXd w_noise = probability_weights(noise_rule);
  const double log_norm = likelihood_log_norm(noise);

  const detail::MixtureKernel truth = detail::make_mixture_kernel(
      detail::whitened_observations(g, prior_rule, d, noise), w_prior,
      log_norm);
  const detail::MixtureKernel surr = detail::make_mixture_kernel(
      detail::whitened_observations(g_n, prior_rule, d, noise), w_prior,
      log_norm);

  EvidenceKlCheck out;
  double ekl = 0.0;
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k)
    ekl += 0.5 * w_prior[k] *
           (surr.rows.row(k) - truth.rows.row(k)).squaredNorm();
  out.rhs = std::max(ekl, 0.0);

  Eigen::VectorXd sq(truth.rows.rows()), terms(truth.rows.rows());
  Eigen::RowVectorXd z(noise.dim());
  double lhs = 0.0;
  for (Eigen::Index k = 0; k < prior_rule.size(); ++k) {
    for (Eigen::Index m = 0; m < noise_rule.size(); ++m) {
      z = surr.rows.row(k) + noise_rule.nodes.row(m);
      lhs += w_prior[k] * w_noise[m] *
             (surr.log_evidence_at(z, sq, terms) -
              truth.log_evidence_at(z, sq, terms));
    }
  }
  if (!std::isfinite(lhs))
    throw std::runtime_error("evidence divergence is not finite");
  out.lhs = lhs;
  return out;
}

RateFit rate_fit(const std::vector<double>& sizes,
                 const std::vector<double>& errors, double floor,
                 double correction_q) {
  if (sizes.size() != errors.size())
    throw std::invalid_argument("rate fit inputs have different lengths");
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const bool usable = std::isfinite(errors[i]) && errors[i] > floor &&
                        sizes[i] > 0.0 &&
                        (correction_q == 0.0 || sizes[i] > 1.0);
    if (!usable) {
      fit.excluded_indices.push_back(static_cast<int>(i));
      continue;
    }
    xs.push_back(std::log(sizes[i]));
    double y = std::log(errors[i]);
    if (correction_q != 0.0) y -= correction_q * std::log(std::log(sizes[i]));
    ys.push_back(y);
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3)
    throw std::invalid_argument(
        "rate fit needs at least 3 points above the floor");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[static_cast<std::size_t>(i)];
    sy += ys[static_cast<std::size_t>(i)];
    sxx += xs[static_cast<std::size_t>(i)] * xs[static_cast<std::size_t>(i)];
    sxy += xs[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)];
  }
  const double det = n * sxx - sx * sx;
  if (!(std::abs(det) > 0.0))
    throw std::invalid_argument("rate fit abscissae are degenerate");
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[static_cast<std::size_t>(i)] -
                     (fit.intercept + fit.slope * xs[static_cast<std::size_t>(i)]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  fit.points_used = n;
  return fit;
}

StabilityReport run_study(const StudyPlan& plan) {
  if (plan.ladder.empty())
    throw std::invalid_argument("study ladder is empty");
  for (std::size_t i = 1; i < plan.ladder.size(); ++i)
    if (plan.ladder[i] <= plan.ladder[i - 1])
      throw std::invalid_argument("study ladder is not strictly increasing");
  if (!plan.build_level)
    throw std::invalid_argument("study has no surrogate builder");
  if (plan.grid.dim() != plan.model.design_dim)
    throw std::invalid_argument(
        "design grid dimension does not match the model");
  validate_eig_rules(plan.prior_rule, plan.noise_rule, plan.noise,
                     plan.model.param_dim);
  if (plan.l2_rule.dim != plan.prior_rule.dim)
    throw std::invalid_argument(
        "distance rule dimension does not match the prior rule");
  if (plan.fidelity_check)
    validate_eig_rules(plan.fidelity_prior_rule, plan.fidelity_noise_rule,
                       plan.noise, plan.model.param_dim);
  const bool own_evidence = plan.evidence_rule.size() > 0;
  if (own_evidence) {
    if (plan.evidence_rule.dim != plan.prior_rule.dim)
      throw std::invalid_argument(
          "evidence rule dimension does not match the prior rule");
    if (plan.evidence_rule.weights.minCoeff() <= 0.0)
      throw std::invalid_argument(
          "evidence rule weights must be positive: the evidence mixture "
          "approximates a density");
  }

  const Eigen::Index nd = plan.grid.size();
  const Eigen::VectorXd w_prior = probability_weights(plan.prior_rule);
  const Eigen::VectorXd w_noise = probability_weights(plan.noise_rule);
  const Eigen::VectorXd w_evidence =
      own_evidence ? probability_weights(plan.evidence_rule)
                   : Eigen::VectorXd();
  const QuadratureRule* ev_rule = own_evidence ? &plan.evidence_rule : nullptr;
  const Eigen::VectorXd* ev_w = own_evidence ? &w_evidence : nullptr;
  const ObservationFn model_fn = [&plan](const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& d) {
    return plan.model(x, d);
  };

  StabilityReport report;
  report.name = plan.name;

  // Reference pass: one whitened kernel, utility value, and log-ratio second
  // moment per design, reused across every ladder entry.
  std::vector<ReferenceDesignData> ref(static_cast<std::size_t>(nd));
  detail::parallel_for(nd, plan.threads, [&](Eigen::Index i) {
    ref[static_cast<std::size_t>(i)] = reference_design_pass(
        model_fn, plan.grid.point(i), plan.prior_rule, w_prior,
        plan.noise_rule, w_noise, plan.noise, ev_rule, ev_w);
  });
  report.u_true.resize(nd);
  report.assumption_fourth_moment = 0.0;
  for (Eigen::Index i = 0; i < nd; ++i) {
    report.u_true[i] = ref[static_cast<std::size_t>(i)].u;
    report.assumption_fourth_moment =
        std::max(report.assumption_fourth_moment,
                 ref[static_cast<std::size_t>(i)].fourth_moment);
  }
  report.argmax_true_flat = argmax_index(report.u_true);
  report.argmax_true = plan.grid.point(report.argmax_true_flat);
  report.u_at_true_argmax = report.u_true[report.argmax_true_flat];

  if (plan.fidelity_check) {
    const Eigen::VectorXd u_hi = utility_on_grid(
        model_fn, plan.model.tag, plan.grid, plan.fidelity_prior_rule,
        plan.fidelity_noise_rule, plan.noise, plan.threads, ev_rule);
    report.fidelity_shift = (u_hi - report.u_true).cwiseAbs().maxCoeff();
    report.fidelity_checked = true;
  }

  for (const int ladder_value : plan.ladder) {
    LevelRecord rec;
    rec.ladder_value = ladder_value;
    rec.size_n = kNan;
    rec.sup_utility_error = kNan;
    rec.sup_l2_distance = kNan;
    rec.u_n_at_argmax = kNan;
    rec.k_estimate = kNan;
    rec.max_expected_kl = kNan;
    rec.worst_bound_gap = kNan;
    rec.value_gap_at_argmax = kNan;
    try {
      const SurrogateLevel level = plan.build_level(ladder_value);
      if (!level.fn) throw std::runtime_error("surrogate level has no map");
      rec.size_n = level.size_n;

      std::vector<LevelDesignData> lvl(static_cast<std::size_t>(nd));
      detail::parallel_for(nd, plan.threads, [&](Eigen::Index i) {
        lvl[static_cast<std::size_t>(i)] = level_design_pass(
            level.fn, plan.grid.point(i), ref[static_cast<std::size_t>(i)],
            plan.prior_rule, w_prior, plan.noise_rule, w_noise, plan.noise,
            ev_rule, ev_w);
      });

      rec.u_surrogate.resize(nd);
      rec.per_design_error.resize(nd);
      rec.k_estimate = 0.0;
      rec.max_expected_kl = 0.0;
      rec.worst_bound_gap = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < nd; ++i) {
        const auto& li = lvl[static_cast<std::size_t>(i)];
        const PropositionCheck check =
            assemble_check(ref[static_cast<std::size_t>(i)], li, nullptr);
        rec.u_surrogate[i] = li.u_surr;
        rec.per_design_error[i] = check.lhs;
        rec.k_estimate = std::max(rec.k_estimate, check.k_estimate);
        rec.max_expected_kl = std::max(rec.max_expected_kl, check.expected_kl);
        rec.worst_bound_gap =
            std::max(rec.worst_bound_gap, check.lhs - check.rhs);
      }
      rec.sup_utility_error = rec.per_design_error.maxCoeff();
      rec.bound_ok = rec.worst_bound_gap <= plan.bound_slack;
      rec.sup_l2_distance = sup_l2_distance(model_fn, level.fn, plan.grid,
                                            plan.l2_rule, plan.noise);
      rec.argmax_flat = argmax_index(rec.u_surrogate);
      rec.argmax_design = plan.grid.point(rec.argmax_flat);
      rec.u_n_at_argmax = rec.u_surrogate[rec.argmax_flat];
      rec.value_gap_at_argmax =
          std::abs(rec.u_n_at_argmax - report.u_at_true_argmax);
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
    report.levels.push_back(std::move(rec));
  }

  // Rate fits over the reported sizes; failed levels carry NaN errors and are
  // excluded by the fit (alongside anything at or below the floor).
  std::vector<double> sizes, u_errs, l2_errs;
  for (const auto& rec : report.levels) {
    sizes.push_back(rec.size_n);
    u_errs.push_back(rec.sup_utility_error);
    l2_errs.push_back(rec.sup_l2_distance);
  }
  try {
    report.utility_rate = rate_fit(sizes, u_errs, plan.rate_floor);
    report.l2_rate = rate_fit(sizes, l2_errs, plan.rate_floor);
    report.rates_defined = true;
  } catch (const std::invalid_argument& e) {
    report.rate_failure = e.what();
    report.rates_defined = false;
  }
  if (plan.correction_q != 0.0) {
    try {
      report.utility_rate_corrected =
          rate_fit(sizes, u_errs, plan.rate_floor, plan.correction_q);
      report.corrected_rate_defined = true;
    } catch (const std::invalid_argument& e) {
      if (report.rate_failure.empty()) report.rate_failure = e.what();
      report.corrected_rate_defined = false;
    }
  }

  // Maximizer stabilization: the smallest ladder size from which every later
  // level (none failed) reproduces the reference argmax.
  report.argmax_stable_from = -1.0;
  for (std::size_t s = 0; s < report.levels.size(); ++s) {
    bool all_match = true;
    for (std::size_t i = s; i < report.levels.size(); ++i) {
      const auto& rec = report.levels[i];
      if (!rec.failure.empty() || rec.argmax_flat != report.argmax_true_flat) {
        all_match = false;
        break;
      }
    }
    if (all_match) {
      report.argmax_stable_from = report.levels[s].size_n;
      break;
    }
  }

  // Sandwich bound on the maximizer value: U(d*) >= U(d*_n) >= U_n(d*_n) - E
  // >= U_n(d*) - E >= U(d*) - 2E, so the gap can never exceed twice the sup
  // error (up to quadrature slack).
  report.maximizer_value_ok = true;
  for (const auto& rec : report.levels) {
    if (!rec.failure.empty()) continue;
    if (rec.value_gap_at_argmax >
        2.0 * rec.sup_utility_error + plan.bound_slack)
      report.maximizer_value_ok = false;
  }

  if (plan.evidence_checks) {
    try {
      const int ev_value = plan.evidence_ladder_value >= 0
                               ? plan.evidence_ladder_value
                               : plan.ladder.front();
      const SurrogateLevel level = plan.build_level(ev_value);
      if (!level.fn) throw std::runtime_error("surrogate level has no map");
      std::vector<Eigen::Index> picks;
      const Eigen::Index want = std::min<Eigen::Index>(5, nd);
      for (Eigen::Index j = 0; j < want; ++j) {
        const Eigen::Index i = want == 1 ? 0 : j * (nd - 1) / (want - 1);
        if (picks.empty() || picks.back() != i) picks.push_back(i);
      }
      for (const Eigen::Index i : picks) {
        EvidenceKlRecord row;
        row.design = plan.grid.point(i);
        const EvidenceKlCheck check =
            evidence_kl_check(model_fn, level.fn, row.design, plan.prior_rule,
                              plan.noise_rule, plan.noise);
        row.lhs = check.lhs;
        row.rhs = check.rhs;
        if (row.lhs > row.rhs + plan.bound_slack)
          report.evidence_checks_ok = false;
        report.evidence_checks.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      report.evidence_failure = e.what();
      report.evidence_checks_ok = false;
    }
  }

  return report;
}

}  // namespace oed
