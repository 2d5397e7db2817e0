#pragma once

#include "road/core.hpp"
#include "road/rng.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace road {

/// Two-dimensional family with covariance [[1, 1], [1, sigma]] and mean
/// half-difference (1, 0), probed with budget c = 1 + eps. For sigma > 1
/// and 0 < eps < 1/sigma the budget binds and every optimizer below is
/// available in closed form, which makes the family a sharp probe for
/// perturbation arguments: a first-order mean perturbation (a, b) moves the
/// two sides of the audited comparison in opposite directions on half of
/// the draws.
struct CounterexampleConfig {
  double sigma = 2.0;
  double eps = 0.25;
  double tau = 1e-3;  ///< perturbation scale; a, b are tau times a standard normal
  int reps = 20000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma > 1)) throw Error("counterexample: sigma must exceed 1");
    if (!(eps > 0) || !(eps < 1 / sigma))
      throw Error("counterexample: eps must lie in (0, 1/sigma) so the budget binds");
    if (!(tau > 0) || !(tau <= 1e-2))
      throw Error("counterexample: tau must lie in (0, 1e-2]");
    if (reps < 100) throw Error("counterexample: reps must be at least 100");
  }
};

inline Eigen::Matrix2d ce_sigma_matrix(double sigma) {
  if (!(sigma > 1)) throw Error("ce_sigma_matrix: sigma must exceed 1 to be positive definite");
  Eigen::Matrix2d m;
  m << 1, 1, 1, sigma;
  return m;
}

/// Closed-form optimizers of the budgeted program on this family, under the
/// exact mean direction (1, 0) and under the perturbed (1 + a, b).
struct CeClosedForms {
  Eigen::Vector2d w_base;       ///< optimizer for mean direction (1, 0)
  double objective_base;        ///< its quadratic objective 1 - 2 eps + sigma eps^2
  Eigen::Vector2d w_perturbed;  ///< optimizer for mean direction (1 + a, b)
  double objective_perturbed;
};

inline CeClosedForms ce_closed_forms(double sigma, double eps, double a, double b) {
  if (!(sigma > 1) || !(eps > 0) || !(eps < 1 / sigma))
    throw Error("ce_closed_forms: need sigma > 1 and eps in (0, 1/sigma)");
  if (std::abs(a) > 0.1 || std::abs(b) > 0.1)
    throw Error("ce_closed_forms: closed forms are only valid for |a|, |b| <= 0.1");
  const Eigen::Matrix2d m = ce_sigma_matrix(sigma);
  CeClosedForms out;
  out.w_base = Eigen::Vector2d(1, -eps);
  out.objective_base = out.w_base.dot(m * out.w_base);
  const double k = a + eps * (1 + a);
  out.w_perturbed =
      Eigen::Vector2d((1 + b * k / (1 + a + b)) / (1 + a), -k / (1 + a + b));
  out.objective_perturbed = out.w_perturbed.dot(m * out.w_perturbed);
  return out;
}

/// Both sides of the audited first-order comparison at one perturbation.
struct CeComparison {
  double lhs;            ///< (1 + a - b eps) / sqrt(objective_base), closed form
  double lhs_direct;     ///< the same quantity recomputed from inner products
  double rhs_exact;      ///< 1 / sqrt(objective_perturbed)
  double rhs_expansion;  ///< rhs_exact expanded to first order in (a, b)
  bool violated;         ///< lhs > rhs_exact: the audited comparison fails
};

/// The audited comparison asks whether the separation score of the
/// unperturbed optimizer, measured with the perturbed mean, stays below the
/// score of the perturbed optimizer. Both sides are exact closed forms
/// here; rhs_expansion additionally linearizes the right side in (a, b),
/// which exposes the failure mechanism: to first order the comparison
/// reduces to a sign test on (a - b eps).
inline CeComparison ce_compare_sides(double sigma, double eps, double a, double b) {
  const CeClosedForms forms = ce_closed_forms(sigma, eps, a, b);
  const double d = forms.objective_base;
  const Eigen::Vector2d mu_hat(1 + a, b);
  CeComparison out;
  out.lhs = (1 + a - b * eps) / std::sqrt(d);
  out.lhs_direct = mu_hat.dot(forms.w_base) / std::sqrt(d);
  out.rhs_exact = 1 / std::sqrt(forms.objective_perturbed);
  out.rhs_expansion =
      (1 + a - b * eps + (a - b * eps) * (1 + eps - eps * sigma * (1 + eps)) / d) /
      std::sqrt(d);
  out.violated = out.lhs > out.rhs_exact;
  return out;
}

struct CeDraw {
  double a;
  double b;
  double lhs;
  double rhs_exact;
  double rhs_expansion;
  bool violated;
};

struct CeReport {
  CounterexampleConfig config;
  std::vector<CeDraw> draws;
  double violation_fraction;    ///< share of draws with lhs > rhs_exact
  double sign_agreement;        ///< share where the first-order sign test predicts the flag
  double max_expansion_error;   ///< max |rhs_exact - rhs_expansion| over draws
};

/// Monte Carlo over perturbations a = tau z1, b = tau z2 with standard
/// normal z. For a fixed seed the z draws do not depend on tau, so sweeping
/// tau probes the same perturbation directions at different magnitudes and
/// max_expansion_error scales cleanly. Symmetric noise makes the violation
/// fraction approach one half as tau shrinks.
inline CeReport ce_violation_mc(const CounterexampleConfig& config) {
  config.validate();
  CeReport rep;
  rep.config = config;
  rep.draws.reserve(std::size_t(config.reps));
  auto eng = make_engine(config.seed);
  std::normal_distribution<double> normal;
  const double factor = 1 + config.eps - config.eps * config.sigma * (1 + config.eps);
  std::size_t violations = 0, agreements = 0;
  double max_err = 0;
  for (int r = 0; r < config.reps; ++r) {
    const double a = config.tau * normal(eng);
    const double b = config.tau * normal(eng);
    const CeComparison cmp = ce_compare_sides(config.sigma, config.eps, a, b);
    rep.draws.push_back({a, b, cmp.lhs, cmp.rhs_exact, cmp.rhs_expansion, cmp.violated});
    violations += cmp.violated ? 1 : 0;
    const bool predicted = (a - b * config.eps) * factor < 0;
    agreements += (predicted == cmp.violated) ? 1 : 0;
    max_err = std::max(max_err, std::abs(cmp.rhs_exact - cmp.rhs_expansion));
  }
  rep.violation_fraction = double(violations) / double(config.reps);
  rep.sign_agreement = double(agreements) / double(config.reps);
  rep.max_expansion_error = max_err;
  return rep;
}

}  // namespace road
