#pragma once

#include <utility>
#include <vector>

#include "igs/numerics.hpp"

namespace igs {

/// Target precision (epsilon, p), noise variance and dimension, plus the
/// derived termination threshold chi = eps^2 / chi2_quantile(p, n).
struct PrecisionSpec {
  double epsilon = 0.0;
  double p = 0.0;
  double sigma2 = 0.0;
  int n = 0;
  double chi = 0.0;
};

PrecisionSpec make_precision_spec(double epsilon, double p, double sigma2, int n);

/// Gaussian posterior (mean, covariance). Values, not entities: updates
/// return new beliefs and never mutate their input.
struct GaussianBelief {
  Vec mean;
  Mat cov;

  Eigen::Index dim() const { return mean.size(); }
};

GaussianBelief make_gaussian_belief(Vec mean, Mat cov);

/// How mixture weights are updated after a measurement.
///  - PaperLiteral: multiply by exp{-z_c^2 / 2 d_c}, d_c = a'S_c a + s2.
///  - ExactBayes:   additionally multiply by d_c^{-1/2}, i.e. the exact
///    Gaussian likelihood of y under component c.
enum class WeightUpdateMode { PaperLiteral, ExactBayes };

struct GmmBelief {
  std::vector<GaussianBelief> components;
  Vec weights;

  Eigen::Index dim() const { return components.empty() ? 0 : components.front().dim(); }
  int size() const { return static_cast<int>(components.size()); }
};

GmmBelief make_gmm_belief(std::vector<GaussianBelief> components, Vec weights);

/// Conditioning of N(mean, cov) on the observation y = a'x + w, w ~ N(0, s2):
///   mean' = mean + cov a (y - a'mean) / (a'cov a + s2)
///   cov'  = cov - cov a a'cov / (a'cov a + s2)
/// Rank is preserved; result covariance is re-symmetrized.
GaussianBelief posterior_update_gaussian(const GaussianBelief& b, const Vec& a,
                                         double y, double sigma2);

/// Per-component conditioning plus the weight update in the selected mode.
/// Weights are renormalized in log-space with max subtraction.
GmmBelief posterior_update_gmm(const GmmBelief& b, const Vec& a, double y,
                               double sigma2, WeightUpdateMode mode);

/// Rank-aware posterior entropy ln[(2 pi e)^{s/2} Vol(cov)] where Vol is the
/// product of eigenvalues above rank_tol * lambda_max and s their count.
/// Returns -inf for the zero matrix.
double posterior_entropy(const GaussianBelief& b, double rank_tol = 1e-10);

/// Point estimate: posterior mean.
Vec map_estimate(const GaussianBelief& b);

/// Point estimate for a mixture: the argmax-weight component's mean and its
/// index; ties broken by lowest index.
std::pair<int, Vec> map_estimate(const GmmBelief& b);

}  // namespace igs
