#pragma once

#include <Eigen/Dense>

#include "igs/errors.hpp"

namespace igs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
/// eigenvector columns orthonormal and sign-canonicalized (largest-magnitude
/// entry positive). Ties keep first-occurrence order after the sort, so the
/// output is a deterministic function of the input.
struct EigenSystem {
  Vec values;   // descending
  Mat vectors;  // columns match values
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (!m.allFinite()) throw InvalidMatrix(std::string(who) + ": non-finite entries");
}

}  // namespace detail

/// True when m is symmetric to `tol` relative to its largest entry.
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.template lpNorm<Eigen::Infinity>());
  return (m - m.transpose()).template lpNorm<Eigen::Infinity>() <= tol * scale;
}

/// (m + m^T)/2. Covariance updates drift off symmetry in floating point;
/// every ingestion point funnels through here.
template <typename Derived>
Mat symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return 0.5 * (m + m.transpose());
}

EigenSystem eig_sym(const Mat& m);

/// Largest eigenvalue of a symmetric matrix (0 for an empty matrix).
double spectral_norm_sym(const Mat& m);

/// Cheap decision: is the spectral norm of PSD matrix m at most `bound`?
/// Uses max-diagonal and trace envelopes before falling back to an exact
/// eigenvalue computation.
bool psd_norm_at_most(const Mat& m, double bound);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Quantile of the chi-squared distribution with n degrees of freedom:
/// the q with P(n/2, q/2) = p. Newton iteration on the regularized lower
/// incomplete gamma from a Wilson-Hilferty starting point.
double chi2_quantile(double p, int n);

/// chi_{n,p,eps} = eps^2 / chi2_quantile(p, n); the eigenvalue threshold
/// below which the posterior is tight enough for the target precision.
double chi_npe(double epsilon, double p, int n);

/// Frobenius-nearest positive semidefinite matrix: eigenvalues clipped at 0.
Mat project_psd(const Mat& m);

/// Euclidean projection onto the l1 ball of radius tau.
Vec project_l1_ball(const Vec& v, double tau);

}  // namespace igs
