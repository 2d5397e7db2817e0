#pragma once

#include "road/core.hpp"
#include "road/estimators.hpp"
#include "road/solver.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace road {

/// One checked inequality: a computed left side, the analytic bound it must
/// stay under, and the comparison outcome (with a 1e-12 slack for rounding).
struct BoundCheck {
  double lhs;
  double bound;
  bool holds;
};

inline BoundCheck make_bound_check(double lhs, double bound) {
  return {lhs, bound, lhs <= bound + 1e-12};
}

/// Tail comparison under relative scaling of the argument:
///   |phi_bar(a (1 + eps)) - phi_bar(a)| <= 2 |eps|    for a > 0, |eps| < 1.
inline BoundCheck check_tail_scale_bound(double a, double eps) {
  if (!(a > 0)) throw Error("check_tail_scale_bound: a must be positive");
  if (!(std::abs(eps) < 1)) throw Error("check_tail_scale_bound: |eps| must be below 1");
  return make_bound_check(std::abs(phi_bar(a * (1 + eps)) - phi_bar(a)), 2 * std::abs(eps));
}

/// Tail comparison under an additive shift inside an inverse square root:
///   |phi_bar((a + eps)^{-1/2}) - phi_bar(a^{-1/2})| <= |eps|
/// for a > 0 and a + eps > 0.
inline BoundCheck check_tail_shift_bound(double a, double eps) {
  if (!(a > 0)) throw Error("check_tail_shift_bound: a must be positive");
  if (!(a + eps > 0)) throw Error("check_tail_shift_bound: a + eps must be positive");
  return make_bound_check(
      std::abs(phi_bar(1 / std::sqrt(a + eps)) - phi_bar(1 / std::sqrt(a))), std::abs(eps));
}

/// Scales w onto the hyperplane {v : v . mu = 1}. The inner product must be
/// safely positive (above 1e-8), otherwise no positive rescaling exists.
template <typename DerivedW, typename DerivedM>
VectorX<typename DerivedW::Scalar> rescale_to_hyperplane(const Eigen::MatrixBase<DerivedW>& w_in,
                                                         const Eigen::MatrixBase<DerivedM>& mu_in) {
  using Scalar = typename DerivedW::Scalar;
  if (w_in.size() != mu_in.size())
    throw DimensionError("rescale_to_hyperplane: w and mu disagree on the dimension");
  const VectorX<Scalar> w = w_in;
  const VectorX<Scalar> mu = mu_in;
  const Scalar d = w.dot(mu);
  if (!(d > Scalar(1e-8)))
    throw Error("rescale_to_hyperplane: w . mu is not safely positive");
  return w / d;
}

/// Comparison of the quadratic forms of two budget-feasible directions:
///   |w' sigma w - v' sigma v| <= 2 c |w - v|_1 max_abs(sigma).
/// Both inputs must satisfy the l1 budget within 1e-9.
inline BoundCheck quadratic_gap_bound(const VectorXd& w, const VectorXd& v,
                                      const MatrixXd& sigma, double c) {
  if (w.size() != v.size() || sigma.rows() != w.size() || sigma.cols() != w.size())
    throw DimensionError("quadratic_gap_bound: dimensions disagree");
  if (l1_norm(w) > c + 1e-9 || l1_norm(v) > c + 1e-9)
    throw Error("quadratic_gap_bound: inputs must satisfy the l1 budget");
  const double gap = std::abs(w.dot(sigma * w) - v.dot(sigma * v));
  return make_bound_check(gap, 2 * c * l1_norm((w - v).eval()) * max_abs(sigma));
}

/// Output of carry_to_perturbed_set: the rebalanced direction that stays
/// feasible for the original budget set, the carried direction feasible for
/// the perturbed one, and the quadratic-form gaps each move costs.
struct TransformReport {
  VectorXd w;             ///< input, feasible for {v . mu_d = 1, |v|_1 <= c}
  double delta;           ///< linf(mu_hat_d - mu_d)
  double shrink;          ///< contraction factor in (0, 1]
  VectorXd w_rebalanced;  ///< off-peak coordinates scaled by shrink, peak re-solved
  VectorXd w_carried;     ///< w_rebalanced rescaled onto the perturbed hyperplane
  bool rebalanced_feasible;  ///< |w_rebalanced|_1 <= c
  bool carried_feasible;     ///< |w_carried|_1 <= c
  BoundCheck rebalance_gap;  ///< quadratic gap of w vs w_rebalanced, budget bound
  BoundCheck carry_gap;      ///< quadratic gap of w_rebalanced vs w_carried, scaling bound
};

/// Carries a direction feasible for the budget set of mu_d onto the budget
/// set of a perturbed mu_hat_d without giving up feasibility.
///
/// Writing delta = linf(mu_hat_d - mu_d) and j for the peak coordinate of
/// mu_d (largest magnitude, lowest index on ties), the contraction
///   shrink = 1 - c^2 delta / (c - 1 / |mu_d[j]|)
/// scales every coordinate except j, and coordinate j is re-solved so the
/// rebalanced direction still has inner product one with mu_d. That frees
/// exactly enough budget that rescaling onto the perturbed hyperplane lands
/// inside the perturbed budget set. Raises when w is not feasible within
/// 1e-10, when c leaves no slack over 1/linf(mu_d), when the perturbation
/// is too large for a positive contraction, or when the rebalanced
/// direction loses a positive inner product with mu_hat_d.
///
/// sigma enters only through the reported quadratic gaps; it is not part of
/// the construction itself.
inline TransformReport carry_to_perturbed_set(const VectorXd& w, const VectorXd& mu_d,
                                              const VectorXd& mu_hat_d, double c,
                                              const MatrixXd& sigma) {
  const Eigen::Index p = w.size();
  if (mu_d.size() != p || mu_hat_d.size() != p || sigma.rows() != p || sigma.cols() != p)
    throw DimensionError("carry_to_perturbed_set: dimensions disagree");
  if (!(c > 0)) throw Error("carry_to_perturbed_set: budget c must be positive");
  if (std::abs(w.dot(mu_d) - 1) > 1e-10 || l1_norm(w) > c + 1e-10)
    throw Error("carry_to_perturbed_set: w is not feasible for the original set within 1e-10");

  const Eigen::Index j = argmax_abs(mu_d);
  const double peak = mu_d[j];
  const double margin = c - 1 / std::abs(peak);
  if (!(margin > 0))
    throw InfeasibleError("carry_to_perturbed_set: c leaves no slack over 1/linf(mu_d)");

  TransformReport rep;
  rep.w = w;
  rep.delta = linf_norm((mu_hat_d - mu_d).eval());
  rep.shrink = 1 - c * c * rep.delta / margin;
  if (!(rep.shrink > 0))
    throw Error("carry_to_perturbed_set: perturbation too large, contraction is not positive");

  rep.w_rebalanced = rep.shrink * w;
  rep.w_rebalanced[j] = (1 - rep.shrink * (1 - w[j] * peak)) / peak;
  rep.rebalanced_feasible = l1_norm(rep.w_rebalanced) <= c + 1e-9;

  const double denom = rep.w_rebalanced.dot(mu_hat_d);
  if (!(denom > 0))
    throw Error("carry_to_perturbed_set: rebalanced direction lost alignment with mu_hat_d");
  rep.w_carried = rep.w_rebalanced / denom;
  rep.carried_feasible = l1_norm(rep.w_carried) <= c + 1e-9;

  const double q_w = w.dot(sigma * w);
  const double q_rebalanced = rep.w_rebalanced.dot(sigma * rep.w_rebalanced);
  rep.rebalance_gap =
      make_bound_check(std::abs(q_w - q_rebalanced),
                       2 * c * l1_norm((w - rep.w_rebalanced).eval()) * max_abs(sigma));
  const double q_carried = rep.w_carried.dot(sigma * rep.w_carried);
  const double cd = c * rep.delta;
  rep.carry_gap =
      make_bound_check(std::abs(q_rebalanced - q_carried), (2 * cd + cd * cd) * q_carried);
  return rep;
}

/// One link of the plug-in error chain: a computed quantity against the
/// bound the estimation noise allows it.
struct ChainTerm {
  std::string name;
  double lhs;
  double bound;
  bool holds;
};

struct ChainReport {
  VectorXd w_plugin;   ///< solved under (sigma_hat, mu_d_hat)
  VectorXd w_mixed;    ///< solved under (sigma, mu_d_hat)
  VectorXd w_oracle;   ///< solved under (sigma, mu_d)
  double noise;        ///< largest of the three estimation error norms
  double w_hat_rate;   ///< error rate of the plug-in rule under the truth
  double oracle_rate;  ///< error rate of the oracle rule
  std::array<ChainTerm, 4> terms;

  bool all_hold() const {
    for (const auto& t : terms)
      if (!t.holds) return false;
    return true;
  }
};

namespace detail {

inline RoadSolution solve_auto(const MatrixXd& sigma, const VectorXd& mu_d, double c,
                               const char* what) {
  if (!(linf_norm(mu_d) > 0) ||
      min_l1_on_hyperplane(mu_d) > c * (1 + 1e-12))
    throw InfeasibleError(std::string("error_chain_audit: infeasible subproblem: ") + what);
  RoadProblem prob(sigma, mu_d, c);
  return prob.dim() <= 12 ? solve_exact(prob) : solve_projected_gradient(prob, 1e-11, 200000);
}

}  // namespace detail

/// Audits the decomposition of the plug-in rule's excess error over the
/// oracle rule into one mean-shift link, two quadratic-form links and the
/// end-to-end regret, each against its noise bound. `noise` is
///   max(max_abs(sigma_hat - sigma), linf(mu1_hat - mu1), linf(mu2_hat - mu2)),
/// the regret envelope is c^2 noise (1 + c^2 max_abs(sigma)). Raises
/// InfeasibleError naming the subproblem when a budget set is empty.
inline ChainReport error_chain_audit(const GaussianPair& truth, const SampleEstimates& est,
                                     double c) {
  if (est.mu1_hat.size() != truth.dim() || est.sigma_hat.rows() != truth.dim())
    throw DimensionError("error_chain_audit: estimates do not match the model dimension");

  ChainReport rep;
  rep.w_plugin = detail::solve_auto(est.sigma_hat, est.mu_d_hat, c, "(sigma_hat, mu_d_hat)").w;
  rep.w_mixed = detail::solve_auto(truth.sigma, est.mu_d_hat, c, "(sigma, mu_d_hat)").w;
  rep.w_oracle = detail::solve_auto(truth.sigma, truth.mu_d(), c, "(sigma, mu_d)").w;

  const double sigma_err = max_abs((est.sigma_hat - truth.sigma).eval());
  const double mu1_err = linf_norm((est.mu1_hat - truth.mu1).eval());
  const double mu2_err = linf_norm((est.mu2_hat - truth.mu2).eval());
  rep.noise = std::max({sigma_err, mu1_err, mu2_err});

  const double quad_plugin_true = rep.w_plugin.dot(truth.sigma * rep.w_plugin);
  const double quad_plugin_est = rep.w_plugin.dot(est.sigma_hat * rep.w_plugin);
  const double quad_mixed = rep.w_mixed.dot(truth.sigma * rep.w_mixed);

  rep.terms[0] = {"mean_shift", std::abs(rep.w_plugin.dot((est.mu1_hat - truth.mu1).eval())),
                  c * mu1_err, false};
  rep.terms[1] = {"quad_plugin", std::abs(quad_plugin_true - quad_plugin_est),
                  c * c * sigma_err, false};
  rep.terms[2] = {"quad_cross", std::abs(quad_plugin_est - quad_mixed), c * c * sigma_err,
                  false};

  rep.w_hat_rate = conditional_error_rates(rep.w_plugin, est.mu_a_hat, truth).average;
  rep.oracle_rate = road::oracle_rate(rep.w_oracle, truth);
  rep.terms[3] = {"regret", std::abs(rep.w_hat_rate - rep.oracle_rate),
                  c * c * rep.noise * (1 + c * c * max_abs(truth.sigma)), false};

  for (auto& t : rep.terms) t.holds = t.lhs <= t.bound + 1e-12;
  return rep;
}

}  // namespace road
