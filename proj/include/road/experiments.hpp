#pragma once

#include "road/core.hpp"
#include "road/estimators.hpp"
#include "road/parallel.hpp"
#include "road/rng.hpp"
#include "road/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace road {

/// Theoretical estimation noise rate sqrt(log(max(p, 2)) / n) for n
/// observations per group in dimension p.
inline double default_noise_rate(int n, int p) {
  if (n < 2) throw Error("default_noise_rate: n must be at least 2");
  if (p < 1) throw Error("default_noise_rate: p must be at least 1");
  return std::sqrt(std::log(double(std::max(p, 2))) / double(n));
}

/// Envelope c^2 a (1 + c^2 sigma_sup) that the plug-in rule's regret obeys
/// up to the estimation noise a; sigma_sup is the elementwise sup norm of
/// the covariance.
inline double regret_envelope(double c, double a, double sigma_sup) {
  return c * c * a * (1 + c * c * sigma_sup);
}

/// Error rate under `truth` of the rule fit from `est`: solve the budgeted
/// program on the estimated quantities, center at the estimated midpoint,
/// evaluate exactly under the true model. Throws InfeasibleError when the
/// estimated direction leaves the budget set empty.
inline double fitted_rule_rate(const GaussianPair& truth, const SampleEstimates& est, double c) {
  if (!(linf_norm(est.mu_d_hat) > 0))
    throw InfeasibleError("fitted_rule_rate: estimated mean difference is zero");
  if (min_l1_on_hyperplane(est.mu_d_hat) > c * (1 + 1e-12))
    throw InfeasibleError("fitted_rule_rate: budget c is below 1/linf of the estimated direction");
  RoadProblem prob(est.sigma_hat, est.mu_d_hat, c);
  const RoadSolution sol =
      prob.dim() <= 12 ? solve_exact(prob) : solve_projected_gradient(prob, 1e-11, 200000);
  return conditional_error_rates(sol.w, est.mu_a_hat, truth).average;
}

struct ConvergenceConfig {
  GaussianPair truth;
  double c;
  std::vector<int> n_grid;  ///< observations per group, strictly increasing
  int reps;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const {
    if (n_grid.empty()) throw Error("convergence: n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 4) throw Error("convergence: every n must be at least 4");
      if (i > 0 && n_grid[i] <= n_grid[i - 1])
        throw Error("convergence: n_grid must be strictly increasing");
    }
    if (reps < 1) throw Error("convergence: reps must be at least 1");
    if (!(c - min_l1_on_hyperplane(truth.mu_d()) >= 0.05))
      throw Error("convergence: c must exceed 1/linf(mu_d) by a margin of at least 0.05");
  }
};

/// One replicate of the convergence experiment. On a failed replicate (the
/// estimated direction was infeasible for the budget) the rates and regret
/// are zero and only n, replicate and d_n are meaningful.
struct RegretRecord {
  int n;
  int replicate;
  double w_hat_rate;
  double oracle_rate;
  double abs_regret;
  double d_n;  ///< regret envelope at the theoretical noise rate for this n
  bool failed;
};

struct ConvergenceSummary {
  int n;
  double median_abs_regret;
  double q90_abs_regret;
  double d_n;
  double fail_frac;
};

/// Draws `reps` training sets per grid point, fits the rule on each and
/// records its exact regret against the oracle rule. Every (n, replicate)
/// pair samples from its own RNG stream of the seed, so records do not
/// depend on the worker count or on which other grid points run. Feasibility
/// failures (small n can put the budget below 1/linf of the estimated
/// direction) are recorded, not raised.
inline std::vector<RegretRecord> run_convergence(const ConvergenceConfig& config) {
  config.validate();
  const GaussianPair& truth = config.truth;
  const int p = int(truth.dim());

  RoadProblem oracle_prob(truth.sigma, truth.mu_d(), config.c);
  const RoadSolution oracle_sol = oracle_prob.dim() <= 12
                                      ? solve_exact(oracle_prob)
                                      : solve_projected_gradient(oracle_prob, 1e-12, 300000);
  if (oracle_sol.kkt_residual > 1e-4)
    throw Error("run_convergence: oracle solution failed its optimality certificate");
  const double oracle = oracle_rate(oracle_sol.w, truth);

  const std::size_t total = config.n_grid.size() * std::size_t(config.reps);
  std::vector<RegretRecord> records(total);
  parallel_for(total, config.threads, [&](std::size_t flat) {
    const std::size_t n_index = flat / std::size_t(config.reps);
    const int rep = int(flat % std::size_t(config.reps));
    const int n = config.n_grid[n_index];
    RegretRecord& rec = records[flat];
    rec.n = n;
    rec.replicate = rep;
    rec.d_n = regret_envelope(config.c, default_noise_rate(n, p), max_abs(truth.sigma));
    const std::uint64_t draw_seed =
        mix64(config.seed + (std::uint64_t(std::uint32_t(n)) << 32) + std::uint64_t(rep) + 1);
    const LabeledDataset data = gen_synthetic(truth, n, draw_seed);
    const SampleEstimates est = fit_estimates(data);
    try {
      rec.w_hat_rate = fitted_rule_rate(truth, est, config.c);
      rec.oracle_rate = oracle;
      rec.abs_regret = std::abs(rec.w_hat_rate - oracle);
      rec.failed = false;
    } catch (const InfeasibleError&) {
      rec.w_hat_rate = 0;
      rec.oracle_rate = 0;
      rec.abs_regret = 0;
      rec.failed = true;
    }
  });
  return records;
}

namespace detail {

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2;
}

inline double sorted_q90(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  std::size_t idx = std::size_t(std::ceil(0.9 * double(m)));
  if (idx > 0) --idx;
  if (idx >= m) idx = m - 1;
  return v[idx];
}

}  // namespace detail

/// Per-grid-point medians, upper quantiles and failure fractions, in grid
/// order. Failed replicates count toward fail_frac and are excluded from
/// the quantiles; a grid point where every replicate failed reports zero
/// quantiles.
inline std::vector<ConvergenceSummary> summarize(const std::vector<RegretRecord>& records) {
  std::map<int, std::vector<double>> regrets;
  std::map<int, std::pair<int, int>> counts;  // n -> (failed, total)
  std::map<int, double> envelopes;
  for (const auto& rec : records) {
    auto& cnt = counts[rec.n];
    ++cnt.second;
    if (rec.failed)
      ++cnt.first;
    else
      regrets[rec.n].push_back(rec.abs_regret);
    envelopes[rec.n] = rec.d_n;
  }
  std::vector<ConvergenceSummary> out;
  out.reserve(counts.size());
  for (const auto& [n, cnt] : counts) {
    ConvergenceSummary s;
    s.n = n;
    const auto it = regrets.find(n);
    s.median_abs_regret = it == regrets.end() ? 0 : detail::sorted_median(it->second);
    s.q90_abs_regret = it == regrets.end() ? 0 : detail::sorted_q90(it->second);
    s.d_n = envelopes[n];
    s.fail_frac = double(cnt.first) / double(cnt.second);
    out.push_back(s);
  }
  return out;
}

/// Least-squares slope of log median regret against log n over the usable
/// grid points (at least 10 successful replicates and a positive median).
/// Requires three such points.
inline double fit_slope(const std::vector<RegretRecord>& records) {
  std::map<int, std::vector<double>> per_n;
  for (const auto& rec : records)
    if (!rec.failed) per_n[rec.n].push_back(rec.abs_regret);
  std::vector<double> xs, ys;
  for (auto& [n, regrets] : per_n) {
    if (regrets.size() < 10) continue;
    const double med = detail::sorted_median(regrets);
    if (!(med > 0)) continue;
    xs.push_back(std::log(double(n)));
    ys.push_back(std::log(med));
  }
  if (xs.size() < 3)
    throw Error(
        "fit_slope: need at least 3 n values with 10 successful replicates and positive median "
        "regret");
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0)) throw Error("fit_slope: degenerate grid");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace road
