#include "igs/belief.hpp"

#include <cmath>
#include <limits>

namespace igs {

PrecisionSpec make_precision_spec(double epsilon, double p, double sigma2, int n) {
  if (!(epsilon > 0.0)) throw Error("precision spec: epsilon must be > 0");
  if (!(p > 0.0 && p < 1.0)) throw InvalidProbability("precision spec: p must be in (0,1)");
  if (!(sigma2 > 0.0)) throw Error("precision spec: sigma2 must be > 0");
  if (n < 1) throw DimError("precision spec: n must be >= 1");
  PrecisionSpec s;
  s.epsilon = epsilon;
  s.p = p;
  s.sigma2 = sigma2;
  s.n = n;
  s.chi = chi_npe(epsilon, p, n);
  return s;
}

GaussianBelief make_gaussian_belief(Vec mean, Mat cov) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols())
    throw DimError("gaussian belief: mean/cov dimension mismatch");
  detail::require_finite(cov, "gaussian belief");
  if (!is_symmetric(cov)) throw InvalidMatrix("gaussian belief: covariance not symmetric");
  return GaussianBelief{std::move(mean), symmetrize(cov)};
}

GmmBelief make_gmm_belief(std::vector<GaussianBelief> components, Vec weights) {
  if (components.empty()) throw EmptyData("gmm belief: no components");
  if (weights.size() != static_cast<Eigen::Index>(components.size()))
    throw DimError("gmm belief: weight/component count mismatch");
  for (const auto& c : components)
    if (c.dim() != components.front().dim())
      throw DimError("gmm belief: components of unequal dimension");
  if (weights.minCoeff() < 0.0) throw Error("gmm belief: negative weight");
  const double sum = weights.sum();
  if (!(std::abs(sum - 1.0) <= 1e-10))
    throw Error("gmm belief: weights must sum to 1");
  return GmmBelief{std::move(components), std::move(weights)};
}

GaussianBelief posterior_update_gaussian(const GaussianBelief& b, const Vec& a,
                                         double y, double sigma2) {
  if (a.size() != b.dim()) throw DimError("posterior update: measurement dimension mismatch");
  if (!(sigma2 > 0.0)) throw Error("posterior update: sigma2 must be > 0");
  if (a.squaredNorm() == 0.0) throw Error("posterior update: zero measurement vector");

  const Vec g = b.cov * a;
  const double den = a.dot(g) + sigma2;
  GaussianBelief out;
  out.mean = b.mean + g * ((y - a.dot(b.mean)) / den);
  out.cov = symmetrize(b.cov - (g * g.transpose()) / den);
  return out;
}

GmmBelief posterior_update_gmm(const GmmBelief& b, const Vec& a, double y,
                               double sigma2, WeightUpdateMode mode) {
  const int c_count = b.size();
  GmmBelief out;
  out.components.reserve(c_count);
  Vec logw(c_count);
  for (int c = 0; c < c_count; ++c) {
    const GaussianBelief& comp = b.components[c];
    const double den = a.dot(comp.cov * a) + sigma2;
    const double z = y - a.dot(comp.mean);
    double lw = std::log(b.weights[c]) - 0.5 * z * z / den;
    if (mode == WeightUpdateMode::ExactBayes) lw -= 0.5 * std::log(den);
    logw[c] = lw;
    out.components.push_back(posterior_update_gaussian(comp, a, y, sigma2));
  }
  const double lmax = logw.maxCoeff();
  if (!std::isfinite(lmax)) throw WeightCollapse("gmm update: all weights vanished");
  Vec w = (logw.array() - lmax).exp();
  const double sum = w.sum();
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw WeightCollapse("gmm update: weight normalization failed");
  out.weights = w / sum;
  return out;
}

double posterior_entropy(const GaussianBelief& b, double rank_tol) {
  const EigenSystem es = eig_sym(b.cov);
  const double lmax = es.values.size() ? es.values[0] : 0.0;
  if (!(lmax > 0.0)) return -std::numeric_limits<double>::infinity();
  const double cut = rank_tol * lmax;
  int s = 0;
  double logvol = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values[i] > cut) {
      ++s;
      logvol += std::log(es.values[i]);
    }
  }
  constexpr double ln_2pi_e = 2.8378770664093454836;  // ln(2*pi*e)
  return 0.5 * s * ln_2pi_e + 0.5 * logvol;
}

Vec map_estimate(const GaussianBelief& b) { return b.mean; }

std::pair<int, Vec> map_estimate(const GmmBelief& b) {
  int best = 0;
  for (int c = 1; c < b.size(); ++c)
    if (b.weights[c] > b.weights[best]) best = c;
  return {best, b.components[best].mean};
}

}  // namespace igs
