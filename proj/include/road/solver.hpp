#pragma once

#include "road/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace road {

/// Instance of the sparse discriminant program
///   minimize w' sigma w   subject to   w . mu_d = 1,  |w|_1 <= c.
/// Construction validates shapes, symmetry of sigma, positive
/// semidefiniteness within tolerance, a nonzero mu_d and c > 0. Whether the
/// constraint set is nonempty is checked by the solvers, not here.
template <typename Scalar>
struct RoadProblemT {
  MatrixX<Scalar> sigma;
  VectorX<Scalar> mu_d;
  Scalar c;

  RoadProblemT(MatrixX<Scalar> sigma_in, VectorX<Scalar> mu_d_in, Scalar c_in)
      : sigma(std::move(sigma_in)), mu_d(std::move(mu_d_in)), c(c_in) {
    validate();
  }

  Eigen::Index dim() const { return mu_d.size(); }

 private:
  void validate() const {
    const Eigen::Index p = mu_d.size();
    if (p < 1) throw DimensionError("RoadProblem: dimension must be at least 1");
    if (sigma.rows() != p || sigma.cols() != p)
      throw DimensionError("RoadProblem: sigma and mu_d disagree on the dimension");
    if (!is_symmetric(sigma)) throw Error("RoadProblem: sigma is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
        ((sigma + sigma.transpose()) / Scalar(2)).eval(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw SingularMatrixError("RoadProblem: eigenvalue check on sigma failed");
    if (es.eigenvalues().minCoeff() <
        -Scalar(1e-10) * std::max(es.eigenvalues().maxCoeff(), Scalar(0)))
      throw Error("RoadProblem: sigma is not positive semidefinite");
    if (!(linf_norm(mu_d) > Scalar(0))) throw Error("RoadProblem: mu_d is the zero vector");
    if (!(c > Scalar(0))) throw Error("RoadProblem: l1 budget c must be positive");
  }
};

using RoadProblem = RoadProblemT<double>;

enum class SolveMethod { exact, projected_gradient };

template <typename Scalar>
struct RoadSolutionT {
  VectorX<Scalar> w;
  Scalar objective;     ///< w' sigma w at the returned point
  Scalar l1;            ///< attained |w|_1
  bool l1_active;       ///< true when c - |w|_1 <= 1e-6 * max(1, c)
  Scalar kkt_residual;  ///< optimality certificate, see kkt_residual()
  SolveMethod method;
  bool converged;       ///< always true for the exact path; the iterative
                        ///< path flags a hit iteration cap here
};

using RoadSolution = RoadSolutionT<double>;

/// Smallest |w|_1 attainable subject to w . mu_d = 1, which is
/// 1 / linf(mu_d). The budget c must reach this value for the program to be
/// feasible.
template <typename Derived>
typename Derived::Scalar min_l1_on_hyperplane(const Eigen::MatrixBase<Derived>& mu_d) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = linf_norm(mu_d);
  if (!(m > Scalar(0))) throw Error("min_l1_on_hyperplane: mu_d is the zero vector");
  return Scalar(1) / m;
}

// ---- projections ----------------------------------------------------------

/// Euclidean projection onto the l1 ball of radius c, by sorting the
/// absolute values and soft-thresholding at the largest feasible level.
template <typename Derived>
VectorX<typename Derived::Scalar> project_l1_ball(const Eigen::MatrixBase<Derived>& v_in,
                                                  typename Derived::Scalar c) {
  using Scalar = typename Derived::Scalar;
  if (!(c > Scalar(0))) throw Error("project_l1_ball: radius must be positive");
  const VectorX<Scalar> v = v_in;
  if (l1_norm(v) <= c) return v;
  std::vector<Scalar> u(v.data(), v.data() + v.size());
  for (auto& x : u) x = std::abs(x);
  std::sort(u.begin(), u.end(), std::greater<Scalar>());
  Scalar cum = 0, theta = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const Scalar cand = (cum - c) / Scalar(j + 1);
    if (u[j] > cand)
      theta = cand;
    else
      break;
  }
  return v.unaryExpr([theta](Scalar x) {
    const Scalar m = std::abs(x) - theta;
    return m > Scalar(0) ? (x > Scalar(0) ? m : -m) : Scalar(0);
  });
}

template <typename DerivedV, typename DerivedM>
VectorX<typename DerivedV::Scalar> project_hyperplane(
    const Eigen::MatrixBase<DerivedV>& v_in, const Eigen::MatrixBase<DerivedM>& mu_d_in,
    typename DerivedV::Scalar target = typename DerivedV::Scalar(1)) {
  using Scalar = typename DerivedV::Scalar;
  const VectorX<Scalar> v = v_in;
  const VectorX<Scalar> mu_d = mu_d_in;
  const Scalar nn = mu_d.squaredNorm();
  if (!(nn > Scalar(0))) throw Error("project_hyperplane: mu_d is the zero vector");
  return v - ((v.dot(mu_d) - target) / nn) * mu_d;
}

/// Dykstra alternating projection onto
///   {w : w . mu_d = 1} intersect {w : |w|_1 <= c}.
/// The returned point satisfies the ball constraint exactly (it is the
/// output of the ball projection); rounds stop once it also sits on the
/// hyperplane within `tol`, or after `max_rounds` rounds.
template <typename DerivedV, typename DerivedM>
VectorX<typename DerivedV::Scalar> project_intersection(
    const Eigen::MatrixBase<DerivedV>& v_in, const Eigen::MatrixBase<DerivedM>& mu_d_in,
    typename DerivedV::Scalar c, typename DerivedV::Scalar tol = typename DerivedV::Scalar(1e-10),
    int max_rounds = 10000) {
  using Scalar = typename DerivedV::Scalar;
  const VectorX<Scalar> v = v_in;
  const VectorX<Scalar> mu_d = mu_d_in;
  if (v.size() != mu_d.size())
    throw DimensionError("project_intersection: v and mu_d disagree on the dimension");
  if (min_l1_on_hyperplane(mu_d) > c * (Scalar(1) + Scalar(1e-12)))
    throw InfeasibleError("project_intersection: the two sets do not intersect");
  VectorX<Scalar> x = v;
  VectorX<Scalar> p = VectorX<Scalar>::Zero(v.size());
  VectorX<Scalar> q = VectorX<Scalar>::Zero(v.size());
  for (int round = 0; round < max_rounds; ++round) {
    const VectorX<Scalar> y = project_hyperplane((x + p).eval(), mu_d);
    p = x + p - y;
    x = project_l1_ball((y + q).eval(), c);
    q = y + q - x;
    if (std::abs(x.dot(mu_d) - Scalar(1)) <= tol) return x;
  }
  return x;
}

/// Largest eigenvalue estimate by `steps` power-iteration steps from a
/// fixed starting vector, floored at the largest diagonal entry.
template <typename Scalar>
Scalar power_lambda_max(const MatrixX<Scalar>& m, int steps = 50) {
  VectorX<Scalar> v = VectorX<Scalar>::LinSpaced(m.rows(), Scalar(1), Scalar(2));
  v.normalize();
  Scalar lam = m.diagonal().maxCoeff();
  for (int s = 0; s < steps; ++s) {
    VectorX<Scalar> mv = m * v;
    const Scalar n = mv.norm();
    if (!(n > Scalar(0))) break;
    lam = std::max(lam, v.dot(mv));
    v = mv / n;
  }
  return lam;
}

// ---- optimality certificate ------------------------------------------------

namespace detail {

// Golden-section minimizer for a convex function of one variable. Brackets
// the minimum by doubling around x0 (never below lo), then contracts.
template <typename F>
double minimize_convex_1d(const F& f, double x0, double lo = -std::numeric_limits<double>::infinity()) {
  const double gr = 0.6180339887498949;
  double m = std::max(x0, lo), h = 1.0;
  double a = std::max(lo, m - h), b = m + h;
  for (int tries = 0; tries < 80; ++tries) {
    const double fa = f(a), fm = f(m), fb = f(b);
    if (fa >= fm && fb >= fm) break;
    if (fa < fb)
      m = a;
    else
      m = b;
    h *= 2;
    a = std::max(lo, m - h);
    b = m + h;
  }
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return f((a + b) / 2) <= std::min(f1, f2) ? (a + b) / 2 : (f1 <= f2 ? x1 : x2);
}

}  // namespace detail

/// Optimality certificate for a feasible point w. Returns
///   min over lambda, nu >= 0 of
///     max_i stationarity_i(lambda, nu)  +  nu * max(0, c - |w|_1)
/// where stationarity holds coordinates of 2 sigma w + lambda mu_d + nu s to
/// zero on the support (s = sign(w_i)) and within the subgradient band
/// [-nu, nu] off it. Zero certifies a KKT point; the added term charges a
/// positive multiplier on an inactive budget (complementary slackness).
/// Requires w feasible within 1e-6 on both constraints.
template <typename Scalar, typename DerivedW>
Scalar kkt_residual(const RoadProblemT<Scalar>& problem, const Eigen::MatrixBase<DerivedW>& w_in) {
  if (w_in.size() != problem.dim())
    throw DimensionError("kkt_residual: w does not match the problem dimension");
  const VectorX<Scalar> w = w_in;
  const Scalar feas_hyp = std::abs(w.dot(problem.mu_d) - Scalar(1));
  const Scalar feas_l1 = l1_norm(w) - problem.c;
  if (feas_hyp > Scalar(1e-6) || feas_l1 > Scalar(1e-6))
    throw Error("kkt_residual: w is not feasible within 1e-6");

  const Eigen::Index p = w.size();
  const VectorX<Scalar> a = Scalar(2) * (problem.sigma * w);
  const VectorX<Scalar>& b = problem.mu_d;
  const Scalar slack = std::max(Scalar(0), problem.c - l1_norm(w));
  const Scalar support_cut = Scalar(1e-7) * std::max(Scalar(1), linf_norm(w));

  std::vector<Eigen::Index> sup;
  for (Eigen::Index i = 0; i < p; ++i)
    if (std::abs(w[i]) > support_cut) sup.push_back(i);

  const auto score = [&](double lam, double nu) -> double {
    nu = std::max(nu, 0.0);
    double stat = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double r = double(a[i]) + lam * double(b[i]);
      if (std::abs(w[i]) > support_cut)
        stat = std::max(stat, std::abs(r + nu * (w[i] > 0 ? 1.0 : -1.0)));
      else
        stat = std::max(stat, std::max(0.0, std::abs(r) - nu));
    }
    return stat + nu * double(slack);
  };

  // Least-squares multipliers over the support as the starting guess.
  double lam0 = 0, nu0 = 0;
  if (!sup.empty()) {
    Eigen::MatrixXd design(sup.size(), 2);
    Eigen::VectorXd target(sup.size());
    for (std::size_t k = 0; k < sup.size(); ++k) {
      design(k, 0) = double(b[sup[k]]);
      design(k, 1) = w[sup[k]] > 0 ? 1.0 : -1.0;
      target[k] = -double(a[sup[k]]);
    }
    const Eigen::Vector2d ls =
        design.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(target);
    lam0 = ls[0];
    nu0 = std::max(0.0, ls[1]);
    const double bb = design.col(0).squaredNorm();
    if (bb > 0) {
      const double lam_only = design.col(0).dot(target) / bb;
      if (score(lam_only, 0) < score(lam0, nu0)) {
        lam0 = lam_only;
        nu0 = 0;
      }
    }
  }

  // Nested golden-section search; the score is jointly convex, so the
  // partial minimum over nu is convex in lambda.
  const auto best_over_nu = [&](double lam) {
    return score(lam, detail::minimize_convex_1d([&](double nu) { return score(lam, nu); },
                                                 nu0, 0.0));
  };
  const double lam_star = detail::minimize_convex_1d(best_over_nu, lam0);
  double best = std::min(score(lam0, nu0), best_over_nu(lam_star));
  return Scalar(best);
}

// ---- solvers ---------------------------------------------------------------

namespace detail {

template <typename Scalar>
RoadSolutionT<Scalar> finish_solution(const RoadProblemT<Scalar>& problem, VectorX<Scalar> w,
                                      SolveMethod method, bool converged) {
  RoadSolutionT<Scalar> sol;
  sol.objective = w.dot(problem.sigma * w);
  sol.l1 = l1_norm(w);
  sol.l1_active = problem.c - sol.l1 <= Scalar(1e-6) * std::max(Scalar(1), problem.c);
  sol.method = method;
  sol.converged = converged;
  sol.w = std::move(w);
  sol.kkt_residual = kkt_residual(problem, sol.w);
  return sol;
}

// Minimizer subject to the hyperplane constraint alone: the scaled optimal
// unconstrained discriminant when sigma is positive definite, otherwise a
// bordered stationarity system solved by full-pivot LU (covers singular
// positive semidefinite sigma with a unique constrained minimizer). Returns
// false when neither route produces a trustworthy point.
template <typename Scalar>
bool equality_only_minimizer(const RoadProblemT<Scalar>& problem, VectorX<Scalar>& out) {
  const Eigen::Index p = problem.dim();
  Eigen::LLT<MatrixX<Scalar>> llt(problem.sigma);
  if (llt.info() == Eigen::Success) {
    VectorX<Scalar> wf = llt.solve(problem.mu_d);
    const Scalar resid = linf_norm((problem.sigma * wf - problem.mu_d).eval());
    const Scalar denom = problem.mu_d.dot(wf);
    if (resid <= Scalar(1e-8) * std::max(Scalar(1), linf_norm(problem.mu_d)) && denom > Scalar(0)) {
      out = wf / denom;
      return true;
    }
  }
  MatrixX<Scalar> k = MatrixX<Scalar>::Zero(p + 1, p + 1);
  k.topLeftCorner(p, p) = Scalar(2) * problem.sigma;
  k.col(p).head(p) = problem.mu_d;
  k.row(p).head(p) = problem.mu_d.transpose();
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(p + 1);
  rhs[p] = Scalar(1);
  Eigen::FullPivLU<MatrixX<Scalar>> lu(k);
  const VectorX<Scalar> x = lu.solve(rhs);
  const Scalar resid = linf_norm((k * x - rhs).eval());
  if (resid > Scalar(1e-8) * (Scalar(1) + max_abs(k) * linf_norm(x))) return false;
  out = x.head(p);
  return std::abs(out.dot(problem.mu_d) - Scalar(1)) <= Scalar(1e-7);
}

}  // namespace detail

template <typename Scalar>
RoadSolutionT<Scalar> solve_projected_gradient(const RoadProblemT<Scalar>& problem,
                                               Scalar tol = Scalar(1e-10), int max_iter = 100000);

/// Exact minimizer for small dimension by stationarity enumeration.
///
/// First tries the minimizer subject to the hyperplane alone; if its l1
/// norm fits the budget, that point is optimal and returned. Otherwise the
/// optimum sits on the l1 sphere, and the routine enumerates every support
/// subset and sign pattern, solving the bordered system of the two active
/// constraints on each face and keeping the best candidate that passes a
/// solve-residual check, sign consistency (s_i w_i >= -1e-12) and
/// feasibility. Ties within 1e-12 keep the earliest candidate in
/// enumeration order (subsets by index mask, then sign patterns with +1
/// before -1), making the returned face deterministic. Cost grows as 3^p,
/// so dimensions above `p_max` are refused. In the degenerate case where
/// every face system is singular the iterative solver is used as a
/// fallback, recognizable from the method tag.
template <typename Scalar>
RoadSolutionT<Scalar> solve_exact(const RoadProblemT<Scalar>& problem, Eigen::Index p_max = 12) {
  const Eigen::Index p = problem.dim();
  if (p > p_max)
    throw Error("solve_exact: dimension exceeds the enumeration limit, use the iterative solver");
  const Scalar min_l1 = min_l1_on_hyperplane(problem.mu_d);
  if (min_l1 > problem.c * (Scalar(1) + Scalar(1e-12)))
    throw InfeasibleError("solve_exact: infeasible, budget c is below 1/linf(mu_d)");

  VectorX<Scalar> w_eq;
  if (detail::equality_only_minimizer(problem, w_eq) &&
      l1_norm(w_eq) <= problem.c + Scalar(1e-12) * std::max(Scalar(1), problem.c))
    return detail::finish_solution(problem, std::move(w_eq), SolveMethod::exact, true);

  const std::uint32_t subsets = std::uint32_t(1) << p;
  Scalar best_obj = std::numeric_limits<Scalar>::infinity();
  VectorX<Scalar> best_w;
  std::vector<Eigen::Index> idx;
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    idx.clear();
    for (Eigen::Index i = 0; i < p; ++i)
      if (mask & (std::uint32_t(1) << i)) idx.push_back(i);
    const Eigen::Index k = Eigen::Index(idx.size());
    MatrixX<Scalar> sigma_ss(k, k);
    VectorX<Scalar> mu_s(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      mu_s[r] = problem.mu_d[idx[std::size_t(r)]];
      for (Eigen::Index cc = 0; cc < k; ++cc)
        sigma_ss(r, cc) = problem.sigma(idx[std::size_t(r)], idx[std::size_t(cc)]);
    }
    MatrixX<Scalar> sys = MatrixX<Scalar>::Zero(k + 2, k + 2);
    sys.topLeftCorner(k, k) = Scalar(2) * sigma_ss;
    sys.col(k).head(k) = mu_s;
    sys.row(k).head(k) = mu_s.transpose();
    VectorX<Scalar> rhs = VectorX<Scalar>::Zero(k + 2);
    rhs[k] = Scalar(1);
    rhs[k + 1] = problem.c;
    VectorX<Scalar> signs(k);
    for (std::uint32_t smask = 0; smask < (std::uint32_t(1) << k); ++smask) {
      for (Eigen::Index j = 0; j < k; ++j)
        signs[j] = (smask & (std::uint32_t(1) << j)) ? Scalar(-1) : Scalar(1);
      sys.col(k + 1).head(k) = signs;
      sys.row(k + 1).head(k) = signs.transpose();
      Eigen::FullPivLU<MatrixX<Scalar>> lu(sys);
      const VectorX<Scalar> x = lu.solve(rhs);
      if (linf_norm((sys * x - rhs).eval()) >
          Scalar(1e-8) * (Scalar(1) + max_abs(sys) * linf_norm(x)))
        continue;
      bool sign_ok = true;
      for (Eigen::Index j = 0; j < k && sign_ok; ++j)
        if (signs[j] * x[j] < Scalar(-1e-12)) sign_ok = false;
      if (!sign_ok) continue;
      VectorX<Scalar> w = VectorX<Scalar>::Zero(p);
      for (Eigen::Index j = 0; j < k; ++j) w[idx[std::size_t(j)]] = x[j];
      if (std::abs(w.dot(problem.mu_d) - Scalar(1)) > Scalar(1e-7)) continue;
      if (l1_norm(w) > problem.c + Scalar(1e-7) * std::max(Scalar(1), problem.c)) continue;
      const Scalar obj = w.dot(problem.sigma * w);
      if (best_w.size() == 0 ||
          obj < best_obj - Scalar(1e-12) * std::max(Scalar(1), std::abs(best_obj))) {
        best_obj = obj;
        best_w = std::move(w);
      }
    }
  }
  if (best_w.size() == 0)
    return solve_projected_gradient(problem, Scalar(1e-12), 200000);
  return detail::finish_solution(problem, std::move(best_w), SolveMethod::exact, true);
}

/// Projected gradient descent for any dimension. Fixed step 1/(2 lambda)
/// with lambda the power-iteration estimate of the largest eigenvalue of
/// sigma inflated by 5%; each step is pulled back to the constraint set by
/// Dykstra alternating projection. Starts from the vertex e_j / mu_d[j] at
/// the largest |mu_d[j]|, which always satisfies both constraints.
/// Stops when the objective decrease falls below `tol` while both
/// constraint residuals are below 1e-9; hitting `max_iter` first is
/// reported through converged = false on the returned solution.
template <typename Scalar>
RoadSolutionT<Scalar> solve_projected_gradient(const RoadProblemT<Scalar>& problem, Scalar tol,
                                               int max_iter) {
  if (!(tol > Scalar(0))) throw Error("solve_projected_gradient: tol must be positive");
  if (max_iter < 1) throw Error("solve_projected_gradient: max_iter must be at least 1");
  const Scalar min_l1 = min_l1_on_hyperplane(problem.mu_d);
  if (min_l1 > problem.c * (Scalar(1) + Scalar(1e-12)))
    throw InfeasibleError("solve_projected_gradient: infeasible, budget c is below 1/linf(mu_d)");

  const Eigen::Index p = problem.dim();
  const Eigen::Index j = argmax_abs(problem.mu_d);
  VectorX<Scalar> w = VectorX<Scalar>::Zero(p);
  w[j] = Scalar(1) / problem.mu_d[j];

  const Scalar lam = power_lambda_max(problem.sigma, 50) * Scalar(1.05);
  const Scalar step = Scalar(1) / (Scalar(2) * std::max(lam, Scalar(1e-30)));

  VectorX<Scalar> sw = problem.sigma * w;
  Scalar f = w.dot(sw);
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const VectorX<Scalar> v = w - step * Scalar(2) * sw;
    VectorX<Scalar> w_next = project_intersection(v, problem.mu_d, problem.c);
    VectorX<Scalar> sw_next = problem.sigma * w_next;
    const Scalar f_next = w_next.dot(sw_next);
    const Scalar hyp_res = std::abs(w_next.dot(problem.mu_d) - Scalar(1));
    const Scalar l1_res = std::max(Scalar(0), l1_norm(w_next) - problem.c);
    const bool done = f - f_next < tol && hyp_res < Scalar(1e-9) && l1_res < Scalar(1e-9);
    w = std::move(w_next);
    sw = std::move(sw_next);
    f = f_next;
    if (done) {
      converged = true;
      break;
    }
  }
  return detail::finish_solution(problem, std::move(w), SolveMethod::projected_gradient, converged);
}

}  // namespace road
