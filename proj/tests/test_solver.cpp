#include "road/solver.hpp"

#include "oracles.hpp"
#include "road/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace road;

namespace {

// Fresh distribution per draw: no cached state leaks between test cases.
double nrand(std::mt19937_64& eng) {
  std::normal_distribution<double> d;
  return d(eng);
}

MatrixXd random_spd(Eigen::Index p, std::mt19937_64& eng, double ridge = 0.3) {
  MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = nrand(eng);
  MatrixXd m = a * a.transpose() / double(p) + ridge * MatrixXd::Identity(p, p);
  return ((m + m.transpose()) / 2).eval();
}

// Covariance with eigenvalues spread over [0.5, 2.5]: keeps the gradient
// steps of the iterative solver well conditioned.
MatrixXd conditioned_spd(Eigen::Index p, std::mt19937_64& eng) {
  MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = nrand(eng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(a).householderQ();
  VectorXd evals = VectorXd::LinSpaced(p, 0.5, 2.5);
  MatrixXd m = q * evals.asDiagonal() * q.transpose();
  return ((m + m.transpose()) / 2).eval();
}

VectorXd random_nonzero(Eigen::Index p, std::mt19937_64& eng) {
  VectorXd v(p);
  do {
    for (Eigen::Index i = 0; i < p; ++i) v[i] = nrand(eng);
  } while (linf_norm(v) < 0.3);
  return v;
}

}  // namespace

TEST_CASE("min_l1_on_hyperplane is the inverse peak magnitude") {
  VectorXd mu(2);
  mu << 0.5, 0.5;
  CHECK(min_l1_on_hyperplane(mu) == 2.0);
  mu << -4, 1;
  CHECK(min_l1_on_hyperplane(mu) == 0.25);
  CHECK_THROWS_AS(min_l1_on_hyperplane(VectorXd::Zero(3)), Error);

  auto eng = make_engine(21);
  for (int rep = 0; rep < 8; ++rep) {
    Eigen::Vector2d m2(nrand(eng), nrand(eng));
    if (std::abs(m2[0]) < 0.2 || std::abs(m2[1]) < 0.2) continue;
    const double grid = oracles::grid_min_l1_2d(m2);
    CHECK(std::abs(grid - min_l1_on_hyperplane(VectorXd(m2))) <= 1e-3);
  }
}

TEST_CASE("project_l1_ball") {
  SUBCASE("interior points pass through") {
    VectorXd v(3);
    v << 0.5, -0.25, 0.1;
    CHECK(project_l1_ball(v, 1.0) == v);
  }
  SUBCASE("hand-computed projection") {
    VectorXd v(2);
    v << 3, 1;
    const VectorXd w = project_l1_ball(v, 2.0);
    CHECK(std::abs(w[0] - 2.0) <= 1e-15);
    CHECK(std::abs(w[1]) <= 1e-15);
  }
  SUBCASE("projection lands on the sphere and beats random feasible points") {
    auto eng = make_engine(22);
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::Index p = 7;
      VectorXd v(p);
      for (Eigen::Index i = 0; i < p; ++i) v[i] = 3 * nrand(eng);
      const double c = 1.5;
      const VectorXd w = project_l1_ball(v, c);
      if (l1_norm(v) <= c) continue;
      CHECK(std::abs(l1_norm(w) - c) <= 1e-12);
      // random points of the ball never sit closer to v
      std::uniform_real_distribution<double> unif(0, 1);
      for (int probe = 0; probe < 50; ++probe) {
        VectorXd z(p);
        double total = 0;
        for (Eigen::Index i = 0; i < p; ++i) {
          z[i] = -std::log(unif(eng) + 1e-300);
          total += z[i];
        }
        for (Eigen::Index i = 0; i < p; ++i)
          z[i] = (unif(eng) < 0.5 ? -1 : 1) * c * z[i] / total;
        CHECK((z - v).norm() >= (w - v).norm() - 1e-9);
      }
    }
  }
  SUBCASE("nonpositive radius is rejected") {
    CHECK_THROWS_AS(project_l1_ball(VectorXd::Zero(2), 0.0), Error);
  }
}

TEST_CASE("project_hyperplane restores the constraint orthogonally") {
  auto eng = make_engine(23);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index p = 5;
    const VectorXd mu = random_nonzero(p, eng);
    VectorXd v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = nrand(eng);
    const VectorXd w = project_hyperplane(v, mu);
    CHECK(std::abs(w.dot(mu) - 1) <= 1e-12);
    // the correction is parallel to mu
    const VectorXd diff = v - w;
    CHECK((diff - diff.dot(mu) / mu.squaredNorm() * mu).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(project_hyperplane(VectorXd::Zero(2), VectorXd::Zero(2)), Error);
}

TEST_CASE("project_intersection") {
  SUBCASE("already-feasible points come back unchanged") {
    VectorXd mu(2);
    mu << 1, 0;
    VectorXd v(2);
    v << 1, 0.3;
    const VectorXd w = project_intersection(v, mu, 2.0);
    CHECK((w - v).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  SUBCASE("collapses to the single feasible point") {
    VectorXd mu(2);
    mu << 1, 0;
    VectorXd v(2);
    v << 2, 2;
    const VectorXd w = project_intersection(v, mu, 1.0);
    CHECK(std::abs(w[0] - 1) <= 1e-7);
    CHECK(std::abs(w[1]) <= 1e-7);
  }
  SUBCASE("feasibility and the variational inequality on random inputs") {
    auto eng = make_engine(24);
    for (int rep = 0; rep < 15; ++rep) {
      const Eigen::Index p = 6;
      const VectorXd mu = random_nonzero(p, eng);
      const double c = 1.3 / linf_norm(mu);
      VectorXd v(p), u(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        v[i] = 2 * nrand(eng);
        u[i] = 2 * nrand(eng);
      }
      const VectorXd w = project_intersection(v, mu, c);
      CHECK(l1_norm(w) <= c + 1e-12);
      CHECK(std::abs(w.dot(mu) - 1) <= 1e-9);
      // projection property: (v - w) points away from any feasible z
      const VectorXd z = project_intersection(u, mu, c);
      CHECK((v - w).dot(z - w) <= 1e-6);
    }
  }
  SUBCASE("empty intersection is rejected") {
    VectorXd mu(2);
    mu << 1, 0;
    CHECK_THROWS_AS(project_intersection(VectorXd::Zero(2), mu, 0.5), InfeasibleError);
  }
}

TEST_CASE("power_lambda_max approximates the top eigenvalue") {
  VectorXd d(3);
  d << 0.2, 2.0, 1.1;
  CHECK(std::abs(power_lambda_max(MatrixXd(d.asDiagonal())) - 2.0) <= 1e-9);

  auto eng = make_engine(25);
  const MatrixXd m = conditioned_spd(8, eng);
  const double exact =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double est = power_lambda_max(m);
  CHECK(est <= exact + 1e-9);
  CHECK(est >= 0.9 * exact);
}

TEST_CASE("solve_exact on the closed-form two-dimensional family") {
  MatrixXd sigma(2, 2);
  sigma << 1, 1, 1, 2;
  VectorXd mu(2);
  mu << 1, 0;
  const RoadProblem prob(sigma, mu, 1.25);
  const RoadSolution sol = solve_exact(prob);
  CHECK(std::abs(sol.w[0] - 1.0) <= 1e-10);
  CHECK(std::abs(sol.w[1] + 0.25) <= 1e-10);
  CHECK(std::abs(sol.objective - 0.625) <= 1e-12);
  CHECK(std::abs(sol.l1 - 1.25) <= 1e-12);
  CHECK(sol.l1_active);
  CHECK(sol.kkt_residual <= 1e-9);
  CHECK(sol.method == SolveMethod::exact);
  CHECK(sol.converged);
}

TEST_CASE("solve_exact matches an independent grid search") {
  auto eng = make_engine(26);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index p = rep % 2 == 0 ? 2 : 3;
    const MatrixXd sigma = random_spd(p, eng);
    const VectorXd mu = random_nonzero(p, eng);
    std::uniform_real_distribution<double> unif(1.05, 2.0);
    const double c = unif(eng) / linf_norm(mu);
    const RoadProblem prob(sigma, mu, c);
    const RoadSolution sol = solve_exact(prob);
    CAPTURE(rep);
    CHECK(std::abs(sol.w.dot(mu) - 1) <= 1e-9);
    CHECK(sol.l1 <= c + 1e-9);
    CHECK(sol.kkt_residual <= 1e-7);
    const double grid = oracles::grid_road_objective(sigma, mu, c);
    CHECK(sol.objective <= grid + 1e-9);
    CHECK(grid <= sol.objective + 1e-6);
  }
}

TEST_CASE("solve_exact takes the unconstrained point when the budget is slack") {
  auto eng = make_engine(27);
  const MatrixXd sigma = random_spd(4, eng);
  const VectorXd mu = random_nonzero(4, eng);
  const VectorXd fisher = fisher_direction(sigma, mu);
  const VectorXd scaled = fisher / fisher.dot(mu);
  const RoadProblem prob(sigma, mu, 10 * l1_norm(scaled));
  const RoadSolution sol = solve_exact(prob);
  CHECK((sol.w - scaled).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK_FALSE(sol.l1_active);
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("solve_exact handles singular positive semidefinite covariance") {
  SUBCASE("slack budget, flat direction unused") {
    MatrixXd sigma = MatrixXd::Zero(2, 2);
    sigma(1, 1) = 1;
    VectorXd mu(2);
    mu << 1, 0;
    const RoadSolution sol = solve_exact(RoadProblem(sigma, mu, 2.0));
    CHECK(std::abs(sol.w[0] - 1) <= 1e-10);
    CHECK(std::abs(sol.w[1]) <= 1e-10);
    CHECK(sol.objective <= 1e-12);
  }
  SUBCASE("rank-one covariance with an active budget") {
    MatrixXd sigma(2, 2);
    sigma << 1, 1, 1, 1;
    VectorXd mu(2);
    mu << 1, 0;
    const RoadSolution sol = solve_exact(RoadProblem(sigma, mu, 1.1));
    // w1 = 1 forced; objective (1 + w2)^2 minimized at w2 = -0.1
    CHECK(std::abs(sol.w[0] - 1) <= 1e-9);
    CHECK(std::abs(sol.w[1] + 0.1) <= 1e-9);
    CHECK(std::abs(sol.objective - 0.81) <= 1e-9);
    const double grid = oracles::grid_road_objective(sigma, mu, 1.1);
    CHECK(std::abs(sol.objective - grid) <= 1e-6);
  }
}

TEST_CASE("solve_exact boundary feasibility cases") {
  VectorXd mu(2);
  mu << 1, 0;
  const MatrixXd sigma = MatrixXd::Identity(2, 2);
  SUBCASE("budget exactly at the minimum is the vertex") {
    const RoadSolution sol = solve_exact(RoadProblem(sigma, mu, 1.0));
    CHECK(std::abs(sol.w[0] - 1) <= 1e-9);
    CHECK(std::abs(sol.w[1]) <= 1e-9);
    CHECK(sol.l1_active);
  }
  SUBCASE("budget below the minimum is infeasible") {
    CHECK_THROWS_AS(solve_exact(RoadProblem(sigma, mu, 0.9)), InfeasibleError);
  }
  SUBCASE("dimension above the enumeration cap is refused") {
    const Eigen::Index p = 13;
    CHECK_THROWS_AS(solve_exact(RoadProblem(MatrixXd::Identity(p, p), VectorXd::Ones(p), 3.0)),
                    Error);
  }
}

TEST_CASE("solve_exact is deterministic") {
  auto eng = make_engine(28);
  const MatrixXd sigma = random_spd(3, eng);
  const VectorXd mu = random_nonzero(3, eng);
  const RoadProblem prob(sigma, mu, 1.2 / linf_norm(mu));
  const RoadSolution a = solve_exact(prob);
  const RoadSolution b = solve_exact(prob);
  CHECK(a.w == b.w);
  CHECK(a.objective == b.objective);
}

TEST_CASE("projected gradient agrees with the exact solver") {
  auto eng = make_engine(29);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index p = 6;
    const MatrixXd sigma = conditioned_spd(p, eng);
    const VectorXd mu = random_nonzero(p, eng);
    std::uniform_real_distribution<double> unif(1.1, 1.8);
    const double c = unif(eng) / linf_norm(mu);
    const RoadProblem prob(sigma, mu, c);
    const RoadSolution exact = solve_exact(prob);
    const RoadSolution pg = solve_projected_gradient(prob, 1e-13, 300000);
    CAPTURE(rep);
    CHECK(pg.converged);
    CHECK(std::abs(pg.w.dot(mu) - 1) <= 1e-9);
    CHECK(l1_norm(pg.w) <= c + 1e-9);
    CHECK(std::abs(pg.objective - exact.objective) <= 1e-6);
    CHECK(pg.kkt_residual <= 1e-5);
    CHECK(pg.method == SolveMethod::projected_gradient);
  }
}

TEST_CASE("projected gradient reports a hit iteration cap") {
  auto eng = make_engine(30);
  const MatrixXd sigma = conditioned_spd(10, eng);
  const VectorXd mu = random_nonzero(10, eng);
  const RoadProblem prob(sigma, mu, 1.5 / linf_norm(mu));
  const RoadSolution sol = solve_projected_gradient(prob, 1e-16, 3);
  CHECK_FALSE(sol.converged);
  // the returned point is still feasible, only unconverged
  CHECK(l1_norm(sol.w) <= prob.c + 1e-9);
  CHECK(std::abs(sol.w.dot(mu) - 1) <= 1e-8);
}

TEST_CASE("projected gradient validates its arguments") {
  const RoadProblem prob(MatrixXd::Identity(2, 2), (VectorXd(2) << 1, 0).finished(), 1.5);
  CHECK_THROWS_AS(solve_projected_gradient(prob, 0.0, 100), Error);
  CHECK_THROWS_AS(solve_projected_gradient(prob, 1e-10, 0), Error);
  const RoadProblem tight(MatrixXd::Identity(2, 2), (VectorXd(2) << 1, 0).finished(), 0.5);
  CHECK_THROWS_AS(solve_projected_gradient(tight, 1e-10, 100), InfeasibleError);
}

TEST_CASE("kkt_residual certificates") {
  SUBCASE("tiny at exact optima") {
    auto eng = make_engine(31);
    for (int rep = 0; rep < 10; ++rep) {
      const Eigen::Index p = 2 + rep % 3;
      const MatrixXd sigma = random_spd(p, eng);
      const VectorXd mu = random_nonzero(p, eng);
      std::uniform_real_distribution<double> unif(1.1, 2.0);
      const RoadProblem prob(sigma, mu, unif(eng) / linf_norm(mu));
      const RoadSolution sol = solve_exact(prob);
      CAPTURE(rep);
      CHECK(kkt_residual(prob, sol.w) <= 1e-8);
    }
  }
  SUBCASE("clearly positive away from the optimum") {
    const RoadProblem prob(MatrixXd::Identity(2, 2), (VectorXd(2) << 1, 0).finished(), 1.2);
    VectorXd w(2);
    w << 1, 0.001;
    CHECK(kkt_residual(prob, w) >= 1e-4);
  }
  SUBCASE("zero with an inactive budget at the unconstrained optimum") {
    const RoadProblem prob(MatrixXd::Identity(3, 3), (VectorXd(3) << 1, 0, 0).finished(), 10.0);
    VectorXd w(3);
    w << 1, 0, 0;
    CHECK(kkt_residual(prob, w) <= 1e-10);
  }
  SUBCASE("forced budget multiplier with off-support pressure") {
    // the only feasible point; the certificate must find nu about 1.8
    MatrixXd sigma(2, 2);
    sigma << 1, 0.9, 0.9, 1;
    const RoadProblem prob(sigma, (VectorXd(2) << 1, 0).finished(), 1.0);
    VectorXd w(2);
    w << 1, 0;
    CHECK(kkt_residual(prob, w) <= 1e-8);
  }
  SUBCASE("infeasible points are rejected") {
    const RoadProblem prob(MatrixXd::Identity(2, 2), (VectorXd(2) << 1, 0).finished(), 1.2);
    VectorXd w(2);
    w << 1.1, 0;  // misses the hyperplane by 0.1
    CHECK_THROWS_AS(kkt_residual(prob, w), Error);
    w << 1, 0.5;  // l1 = 1.5 > c
    CHECK_THROWS_AS(kkt_residual(prob, w), Error);
    CHECK_THROWS_AS(kkt_residual(prob, VectorXd::Zero(3)), DimensionError);
  }
}

TEST_CASE("RoadProblem validates its inputs") {
  const VectorXd mu = (VectorXd(2) << 1, 0).finished();
  CHECK_THROWS_AS(RoadProblem(MatrixXd::Identity(3, 3), mu, 1.0), DimensionError);
  CHECK_THROWS_AS(RoadProblem((MatrixXd(2, 2) << 1, 0.2, 0.1, 1).finished(), mu, 1.0), Error);
  CHECK_THROWS_AS(RoadProblem((MatrixXd(2, 2) << 1, 2, 2, 1).finished(), mu, 1.0), Error);
  CHECK_THROWS_AS(RoadProblem(MatrixXd::Identity(2, 2), VectorXd::Zero(2), 1.0), Error);
  CHECK_THROWS_AS(RoadProblem(MatrixXd::Identity(2, 2), mu, 0.0), Error);
  CHECK_THROWS_AS(RoadProblem(MatrixXd::Identity(2, 2), mu, -1.0), Error);
}
