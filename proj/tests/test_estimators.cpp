#include "road/estimators.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace road;

namespace {

GaussianPair skew_pair() {
  VectorXd mu1(3), mu2(3);
  mu1 << 1, 0.2, -0.5;
  mu2 << -0.3, 0.1, 0.4;
  MatrixXd sigma(3, 3);
  sigma << 1.5, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.8;
  return GaussianPair(mu1, mu2, sigma);
}

}  // namespace

TEST_CASE("LabeledDataset validates rows and labels") {
  MatrixXd x(2, 2);
  x << 0, 0, 1, 1;
  CHECK_NOTHROW(LabeledDataset(x, {1, 2}));
  CHECK_THROWS_AS(LabeledDataset(x, {1}), DimensionError);
  CHECK_THROWS_AS(LabeledDataset(x, {1, 3}), Error);
  CHECK_THROWS_AS(LabeledDataset(MatrixXd(2, 0), {1, 2}), DimensionError);
}

TEST_CASE("fit_estimates matches a hand-pooled example") {
  MatrixXd x(4, 2);
  x << 0, 0, 2, 0, 1, 1, 1, 3;
  const LabeledDataset data(x, {1, 1, 2, 2});
  const SampleEstimates est = fit_estimates(data);
  CHECK(est.n1 == 2);
  CHECK(est.n2 == 2);
  CHECK((est.mu1_hat - (VectorXd(2) << 1, 0).finished()).isZero(1e-14));
  CHECK((est.mu2_hat - (VectorXd(2) << 1, 2).finished()).isZero(1e-14));
  CHECK((est.mu_a_hat - (VectorXd(2) << 1, 1).finished()).isZero(1e-14));
  CHECK((est.mu_d_hat - (VectorXd(2) << 0, -1).finished()).isZero(1e-14));
  // pooled scatter [[2,0],[0,2]] over n1 + n2 - 2 = 2
  CHECK((est.sigma_hat - MatrixXd::Identity(2, 2)).isZero(1e-14));
}

TEST_CASE("fit_estimates requires two observations per group") {
  MatrixXd x(3, 1);
  x << 0, 1, 2;
  CHECK_THROWS_AS(fit_estimates(LabeledDataset(x, {1, 2, 2})), Error);
  CHECK_THROWS_AS(fit_estimates(LabeledDataset(x, {1, 1, 1})), Error);
}

TEST_CASE("exact_estimates mirrors the model") {
  const GaussianPair pair = skew_pair();
  const SampleEstimates est = exact_estimates(pair);
  CHECK(est.mu1_hat == pair.mu1);
  CHECK(est.mu2_hat == pair.mu2);
  CHECK(est.mu_d_hat == pair.mu_d());
  CHECK(est.mu_a_hat == pair.mu_a());
  CHECK(est.sigma_hat == pair.sigma);
  CHECK(est.n1 == 0);
  CHECK(est.n2 == 0);
}

TEST_CASE("gaussian_factor reproduces the covariance") {
  const GaussianPair pair = skew_pair();
  const MatrixXd f = gaussian_factor(pair.sigma);
  CHECK(max_abs((f * f.transpose() - pair.sigma).eval()) <= 1e-12);

  MatrixXd singular = MatrixXd::Zero(2, 2);
  singular(0, 0) = 4;
  const MatrixXd fs = gaussian_factor(singular);
  CHECK(max_abs((fs * fs.transpose() - singular).eval()) <= 1e-12);
}

TEST_CASE("gen_synthetic layout, determinism and stream separation") {
  const GaussianPair pair = skew_pair();
  const LabeledDataset a = gen_synthetic(pair, 50, 5);
  CHECK(a.n() == 100);
  CHECK(a.dim() == 3);
  for (Eigen::Index r = 0; r < 50; ++r) CHECK(a.labels[std::size_t(r)] == 1);
  for (Eigen::Index r = 50; r < 100; ++r) CHECK(a.labels[std::size_t(r)] == 2);

  const LabeledDataset b = gen_synthetic(pair, 50, 5);
  CHECK(a.x == b.x);

  const LabeledDataset c = gen_synthetic(pair, 50, 6);
  CHECK(a.x != c.x);

  // the first group-2 row is not a replay of the first group-1 row
  CHECK((a.x.row(0) - a.x.row(50)).lpNorm<Eigen::Infinity>() > 1e-6);

  CHECK_THROWS_AS(gen_synthetic(pair, 0, 1), Error);
}

TEST_CASE("gen_synthetic with zero covariance pins every row to its group mean") {
  VectorXd mu1(2), mu2(2);
  mu1 << 2, -1;
  mu2 << 0, 3;
  const GaussianPair pair(mu1, mu2, MatrixXd::Zero(2, 2));
  const LabeledDataset data = gen_synthetic(pair, 4, 3);
  for (Eigen::Index r = 0; r < 4; ++r)
    CHECK((data.x.row(r).transpose() - mu1).lpNorm<Eigen::Infinity>() <= 1e-14);
  for (Eigen::Index r = 4; r < 8; ++r)
    CHECK((data.x.row(r).transpose() - mu2).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("fitted moments converge at the root-n rate") {
  const GaussianPair pair = skew_pair();
  const int n_grid[] = {1000, 2000, 4000, 8000};
  const int seeds = 50;
  double mu_rms[4] = {0, 0, 0, 0};
  double sigma_mean[4] = {0, 0, 0, 0};
  for (int gi = 0; gi < 4; ++gi) {
    double sq = 0, sig = 0;
    for (int s = 0; s < seeds; ++s) {
      const LabeledDataset data = gen_synthetic(pair, n_grid[gi], 1000 + std::uint64_t(s));
      const SampleEstimates est = fit_estimates(data);
      sq += (est.mu_d_hat - pair.mu_d()).squaredNorm();
      sig += max_abs((est.sigma_hat - pair.sigma).eval());
    }
    mu_rms[gi] = std::sqrt(sq / (seeds * 3.0));
    sigma_mean[gi] = sig / seeds;
  }
  for (int gi = 0; gi < 3; ++gi) {
    CAPTURE(gi);
    const double ratio = mu_rms[gi] / mu_rms[gi + 1];
    // one doubling of n should shrink the error by about sqrt(2)
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.8);
    CHECK(sigma_mean[gi + 1] < sigma_mean[gi]);
  }
}
