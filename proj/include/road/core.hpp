#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace road {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for every domain error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions between vectors/matrices of one problem.
struct DimensionError : Error {
  using Error::Error;
};

/// The constraint set of an optimization problem is empty.
struct InfeasibleError : Error {
  using Error::Error;
};

/// A factorization failed because the input is singular or indefinite.
struct SingularMatrixError : Error {
  using Error::Error;
};

// ---- norms ----------------------------------------------------------------

template <typename Derived>
typename Derived::Scalar l1_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.template lpNorm<1>();
}

template <typename Derived>
typename Derived::Scalar linf_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.template lpNorm<Eigen::Infinity>();
}

/// Elementwise sup norm max_ij |m_ij|. Every matrix perturbation bound in
/// this library is stated in this norm, not the operator infinity norm.
template <typename Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::Scalar(0) : m.cwiseAbs().maxCoeff();
}

/// Index of the largest |v_i|, lowest index winning ties.
template <typename Derived>
Eigen::Index argmax_abs(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) throw DimensionError("argmax_abs: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) return false;
  const MatrixX<Scalar> dense = m;
  const Scalar scale = max_abs(dense);
  if (!(scale > Scalar(0))) return true;
  return max_abs((dense - dense.transpose()).eval()) <= rel_tol * scale;
}

// ---- normal tail ----------------------------------------------------------

/// Upper tail P(Z > z) of the standard normal. Routed through erfc so the
/// far tail keeps relative accuracy instead of cancelling to zero.
template <typename Scalar>
Scalar phi_bar(Scalar z) {
  return Scalar(0.5) * std::erfc(z / std::sqrt(Scalar(2)));
}

// ---- two-group Gaussian model ---------------------------------------------

/// Pair of Gaussian populations N(mu1, sigma) and N(mu2, sigma) sharing one
/// covariance. Construction validates shape, symmetry (1e-12 relative),
/// nonnegative diagonal, positive semidefiniteness (smallest eigenvalue
/// >= -1e-10 times the largest) and mu1 != mu2.
template <typename Scalar>
struct GaussianPairT {
  VectorX<Scalar> mu1;
  VectorX<Scalar> mu2;
  MatrixX<Scalar> sigma;

  GaussianPairT(VectorX<Scalar> mu1_in, VectorX<Scalar> mu2_in, MatrixX<Scalar> sigma_in)
      : mu1(std::move(mu1_in)), mu2(std::move(mu2_in)), sigma(std::move(sigma_in)) {
    validate();
  }

  Eigen::Index dim() const { return mu1.size(); }

  /// Midpoint (mu1 + mu2) / 2 of the two population means.
  VectorX<Scalar> mu_a() const { return ((mu1 + mu2) / Scalar(2)).eval(); }

  /// Half-difference (mu1 - mu2) / 2 of the two population means.
  VectorX<Scalar> mu_d() const { return ((mu1 - mu2) / Scalar(2)).eval(); }

 private:
  void validate() const {
    const Eigen::Index p = mu1.size();
    if (p < 1) throw DimensionError("GaussianPair: dimension must be at least 1");
    if (mu2.size() != p || sigma.rows() != p || sigma.cols() != p)
      throw DimensionError("GaussianPair: mu1, mu2 and sigma disagree on the dimension");
    if (!is_symmetric(sigma))
      throw Error("GaussianPair: sigma is not symmetric");
    if (sigma.diagonal().minCoeff() < -Scalar(1e-12) * std::max(Scalar(1), max_abs(sigma)))
      throw Error("GaussianPair: sigma has a negative diagonal entry");
    const MatrixX<Scalar> sym = ((sigma + sigma.transpose()) / Scalar(2)).eval();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw SingularMatrixError("GaussianPair: eigenvalue check on sigma failed");
    const Scalar lam_max = es.eigenvalues().maxCoeff();
    const Scalar lam_min = es.eigenvalues().minCoeff();
    if (lam_min < -Scalar(1e-10) * std::max(lam_max, Scalar(0)))
      throw Error("GaussianPair: sigma is not positive semidefinite");
    if (!(linf_norm((mu1 - mu2).eval()) > Scalar(0)))
      throw Error("GaussianPair: mu1 and mu2 coincide");
  }
};

using GaussianPair = GaussianPairT<double>;

// ---- classification rule and its error rates ------------------------------

/// Affine rule: assign x to group 1 iff w . (x - center) >= 0. A point on
/// the decision boundary goes to group 1.
template <typename DerivedX, typename DerivedW, typename DerivedC>
int classify(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w,
             const Eigen::MatrixBase<DerivedC>& center) {
  using Scalar = typename DerivedW::Scalar;
  if (x.size() != w.size() || center.size() != w.size())
    throw DimensionError("classify: x, w and center disagree on the dimension");
  return w.dot(x - center) >= Scalar(0) ? 1 : 2;
}

template <typename Scalar>
struct ErrorRatesT {
  Scalar rate1;     ///< P(misclassify | group 1)
  Scalar rate2;     ///< P(misclassify | group 2)
  Scalar average;   ///< (rate1 + rate2) / 2, the rate under equal priors
};

using ErrorRates = ErrorRatesT<double>;

/// Exact misclassification probabilities of the rule (w, center) when the
/// data really follow `truth`. Throws when w'Sigma w is numerically zero,
/// since no direction of that kind separates anything.
template <typename DerivedW, typename DerivedC, typename Scalar>
ErrorRatesT<Scalar> conditional_error_rates(const Eigen::MatrixBase<DerivedW>& w,
                                            const Eigen::MatrixBase<DerivedC>& center,
                                            const GaussianPairT<Scalar>& truth) {
  if (w.size() != truth.dim() || center.size() != truth.dim())
    throw DimensionError("conditional_error_rates: w/center do not match the model dimension");
  const VectorX<Scalar> wv = w;
  const VectorX<Scalar> cv = center;
  const Scalar quad = wv.dot(truth.sigma * wv);
  const Scalar scale = wv.squaredNorm() * max_abs(truth.sigma);
  if (!(quad > Scalar(1e-14) * scale) || !(quad > Scalar(0)))
    throw Error("conditional_error_rates: w'Sigma w is numerically zero, direction carries no signal");
  const Scalar sd = std::sqrt(quad);
  ErrorRatesT<Scalar> out;
  out.rate1 = phi_bar(wv.dot((truth.mu1 - cv).eval()) / sd);
  out.rate2 = phi_bar(-wv.dot((truth.mu2 - cv).eval()) / sd);
  out.average = (out.rate1 + out.rate2) / Scalar(2);
  return out;
}

/// Misclassification probability of the centered rule (w, mu_a) under
/// `truth`, for directions normalized to w . mu_d = 1. With that
/// normalization both conditional rates coincide and the value reduces to
/// phi_bar(1 / sqrt(w'Sigma w)).
template <typename DerivedW, typename Scalar>
Scalar oracle_rate(const Eigen::MatrixBase<DerivedW>& w, const GaussianPairT<Scalar>& truth) {
  if (w.size() != truth.dim())
    throw DimensionError("oracle_rate: w does not match the model dimension");
  const VectorX<Scalar> wv = w;
  if (std::abs(wv.dot(truth.mu_d()) - Scalar(1)) > Scalar(1e-8))
    throw Error("oracle_rate: w is not normalized to w . mu_d = 1");
  return conditional_error_rates(wv, truth.mu_a(), truth).average;
}

/// Unconstrained optimal direction sigma^{-1} mu_d via Cholesky. Throws
/// SingularMatrixError when sigma is not positive definite or the solve is
/// inaccurate (residual above 1e-8 * linf(mu_d)).
template <typename DerivedS, typename DerivedM>
VectorX<typename DerivedS::Scalar> fisher_direction(const Eigen::MatrixBase<DerivedS>& sigma,
                                                    const Eigen::MatrixBase<DerivedM>& mu_d) {
  using Scalar = typename DerivedS::Scalar;
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu_d.size())
    throw DimensionError("fisher_direction: sigma and mu_d disagree on the dimension");
  const MatrixX<Scalar> s = sigma;
  const VectorX<Scalar> mu = mu_d;
  if (!is_symmetric(s)) throw Error("fisher_direction: sigma is not symmetric");
  Eigen::LLT<MatrixX<Scalar>> llt(s);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("fisher_direction: sigma is not positive definite");
  VectorX<Scalar> w = llt.solve(mu);
  const Scalar resid = linf_norm((s * w - mu).eval());
  if (resid > Scalar(1e-8) * std::max(Scalar(1), linf_norm(mu)))
    throw SingularMatrixError("fisher_direction: solve residual too large, sigma is near singular");
  return w;
}

}  // namespace road
