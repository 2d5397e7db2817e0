#pragma once

#include "road/core.hpp"
#include "road/rng.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace road {

/// Observation matrix (one row per observation) with group labels 1 / 2.
template <typename Scalar>
struct LabeledDatasetT {
  MatrixX<Scalar> x;
  std::vector<int> labels;

  LabeledDatasetT(MatrixX<Scalar> x_in, std::vector<int> labels_in)
      : x(std::move(x_in)), labels(std::move(labels_in)) {
    if (x.rows() != Eigen::Index(labels.size()))
      throw DimensionError("LabeledDataset: row count and label count differ");
    if (x.cols() < 1) throw DimensionError("LabeledDataset: dimension must be at least 1");
    for (int l : labels)
      if (l != 1 && l != 2) throw Error("LabeledDataset: labels must be 1 or 2");
  }

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

using LabeledDataset = LabeledDatasetT<double>;

/// Group means, their midpoint / half-difference, and the pooled covariance.
template <typename Scalar>
struct SampleEstimatesT {
  VectorX<Scalar> mu1_hat;
  VectorX<Scalar> mu2_hat;
  VectorX<Scalar> mu_a_hat;  ///< (mu1_hat + mu2_hat) / 2
  VectorX<Scalar> mu_d_hat;  ///< (mu1_hat - mu2_hat) / 2
  MatrixX<Scalar> sigma_hat;
  Eigen::Index n1;
  Eigen::Index n2;
};

using SampleEstimates = SampleEstimatesT<double>;

/// Group means and pooled covariance with divisor n1 + n2 - 2. Each group
/// must contribute at least two observations.
template <typename Scalar>
SampleEstimatesT<Scalar> fit_estimates(const LabeledDatasetT<Scalar>& data) {
  const Eigen::Index p = data.dim();
  std::vector<Eigen::Index> rows1, rows2;
  for (Eigen::Index r = 0; r < data.n(); ++r)
    (data.labels[std::size_t(r)] == 1 ? rows1 : rows2).push_back(r);
  if (rows1.size() < 2 || rows2.size() < 2)
    throw Error("fit_estimates: each group needs at least two observations");

  SampleEstimatesT<Scalar> est;
  est.n1 = Eigen::Index(rows1.size());
  est.n2 = Eigen::Index(rows2.size());
  est.mu1_hat = VectorX<Scalar>::Zero(p);
  est.mu2_hat = VectorX<Scalar>::Zero(p);
  for (Eigen::Index r : rows1) est.mu1_hat += data.x.row(r).transpose();
  for (Eigen::Index r : rows2) est.mu2_hat += data.x.row(r).transpose();
  est.mu1_hat /= Scalar(est.n1);
  est.mu2_hat /= Scalar(est.n2);
  est.mu_a_hat = (est.mu1_hat + est.mu2_hat) / Scalar(2);
  est.mu_d_hat = (est.mu1_hat - est.mu2_hat) / Scalar(2);

  MatrixX<Scalar> scatter = MatrixX<Scalar>::Zero(p, p);
  for (Eigen::Index r : rows1) {
    const VectorX<Scalar> d = data.x.row(r).transpose() - est.mu1_hat;
    scatter.noalias() += d * d.transpose();
  }
  for (Eigen::Index r : rows2) {
    const VectorX<Scalar> d = data.x.row(r).transpose() - est.mu2_hat;
    scatter.noalias() += d * d.transpose();
  }
  est.sigma_hat = scatter / Scalar(est.n1 + est.n2 - 2);
  est.sigma_hat = ((est.sigma_hat + est.sigma_hat.transpose()) / Scalar(2)).eval();
  return est;
}

/// Estimates equal to the population quantities, with zero sample counts.
/// Useful to feed estimation-aware pipelines with exact inputs.
template <typename Scalar>
SampleEstimatesT<Scalar> exact_estimates(const GaussianPairT<Scalar>& truth) {
  SampleEstimatesT<Scalar> est;
  est.mu1_hat = truth.mu1;
  est.mu2_hat = truth.mu2;
  est.mu_a_hat = truth.mu_a();
  est.mu_d_hat = truth.mu_d();
  est.sigma_hat = truth.sigma;
  est.n1 = 0;
  est.n2 = 0;
  return est;
}

/// Factor F with F F' = sigma, from the spectral decomposition with
/// eigenvalues clamped at zero. On a failed decomposition one retry is made
/// with jitter 1e-10 * trace / p added to the diagonal.
template <typename Scalar>
MatrixX<Scalar> gaussian_factor(const MatrixX<Scalar>& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sigma);
  if (es.info() != Eigen::Success) {
    const Scalar jitter =
        Scalar(1e-10) * sigma.trace() / Scalar(sigma.rows()) + Scalar(1e-300);
    es.compute(sigma + jitter * MatrixX<Scalar>::Identity(sigma.rows(), sigma.cols()));
    if (es.info() != Eigen::Success)
      throw SingularMatrixError("gaussian_factor: eigendecomposition failed");
  }
  const VectorX<Scalar> vals = es.eigenvalues().cwiseMax(Scalar(0));
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

/// Draws n_per_group observations from each population of `truth`. Rows
/// 0..n-1 carry label 1, rows n..2n-1 label 2. Each group samples from its
/// own RNG stream of `seed`, so the two groups stay decorrelated and the
/// output is reproducible for a fixed build.
template <typename Scalar>
LabeledDatasetT<Scalar> gen_synthetic(const GaussianPairT<Scalar>& truth,
                                      Eigen::Index n_per_group, std::uint64_t seed) {
  if (n_per_group < 1) throw Error("gen_synthetic: n_per_group must be at least 1");
  const Eigen::Index p = truth.dim();
  const MatrixX<Scalar> factor = gaussian_factor(truth.sigma);
  MatrixX<Scalar> x(2 * n_per_group, p);
  std::vector<int> labels(std::size_t(2 * n_per_group));
  VectorX<Scalar> z(p);
  for (int g = 1; g <= 2; ++g) {
    auto eng = make_engine(seed, std::uint64_t(g));
    std::normal_distribution<double> normal;
    const VectorX<Scalar>& mu = g == 1 ? truth.mu1 : truth.mu2;
    const Eigen::Index base = g == 1 ? 0 : n_per_group;
    for (Eigen::Index i = 0; i < n_per_group; ++i) {
      for (Eigen::Index d = 0; d < p; ++d) z[d] = Scalar(normal(eng));
      x.row(base + i) = (mu + factor * z).transpose();
      labels[std::size_t(base + i)] = g;
    }
  }
  return LabeledDatasetT<Scalar>(std::move(x), std::move(labels));
}

}  // namespace road
