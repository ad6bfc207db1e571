#pragma once

// Test-only oracles, kept independent of the library's implementation paths:
// a long-double Kummer-series incomplete gamma, boundary grid search for the
// l1 projection, an information-form Gaussian conditioning route, and a
// projected-subgradient reference solver for the trace-minimization program.

#include <cmath>
#include <random>

#include "igs/numerics.hpp"
#include "igs/rng.hpp"

namespace oracle {

using igs::Mat;
using igs::Vec;

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// P(a, x) via the Kummer confluent hypergeometric series
// x^a e^-x sum_k x^k / Gamma(a+k+1), evaluated in long double.
inline long double gamma_p_series_ld(long double a, long double x) {
  if (x <= 0.0L) return 0.0L;
  long double log_term = a * std::log(x) - x - std::lgamma(a + 1.0L);
  long double term = std::exp(log_term);
  long double sum = 0.0L;
  for (int k = 0; k < 100000; ++k) {
    sum += term;
    term *= x / (a + 1.0L + k);
    if (term < sum * 1e-22L) break;
  }
  return sum;
}

// Brute-force projection of v onto the l1 ball boundary (valid when v is
// strictly outside the ball), scanning the first coordinate at `step`.
inline Vec l1_project_grid_2d(const Vec& v, double tau, double step = 1e-3) {
  Vec best(2);
  double best_d = std::numeric_limits<double>::infinity();
  for (double w1 = -tau; w1 <= tau + 1e-15; w1 += step) {
    const double rem = tau - std::abs(w1);
    for (const double w2 : {rem, -rem}) {
      const double d = (v[0] - w1) * (v[0] - w1) + (v[1] - w2) * (v[1] - w2);
      if (d < best_d) {
        best_d = d;
        best << w1, w2;
      }
    }
  }
  return best;
}

// Gaussian conditioning through the information (precision) form:
// J' = S^-1 + a a'/s2, h' = S^-1 mu + a y / s2. Needs full-rank S.
struct ConditionedGaussian {
  Vec mean;
  Mat cov;
};

inline ConditionedGaussian condition_information_form(const Vec& mu, const Mat& cov,
                                                      const Vec& a, double y,
                                                      double sigma2) {
  const Mat j_prior = cov.inverse();
  const Mat j_post = j_prior + (a * a.transpose()) / sigma2;
  ConditionedGaussian out;
  out.cov = j_post.inverse();
  out.mean = out.cov * (j_prior * mu + a * (y / sigma2));
  return out;
}

inline Mat random_psd(int n, int rank, igs::Rng& rng, double scale = 1.0) {
  Mat g(n, rank);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  return igs::symmetrize(scale * g * g.transpose());
}

inline Vec random_vec(int n, igs::Rng& rng) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Long-run projected subgradient reference for
//   min tr(X) s.t. X PSD, ||gamma - B(X)||_1 <= tau.
// Slow but entirely independent of the ADMM path; returns the best feasible
// iterate.
inline Mat subgradient_reference(const Mat& vectors, const Vec& gamma, double tau,
                                 int iterations = 200000, double step0 = 0.05) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index m = vectors.cols();
  Mat x = Mat::Zero(n, n);
  Mat best = x;
  double best_tr = std::numeric_limits<double>::infinity();
  const bool zero_feasible = gamma.cwiseAbs().sum() <= tau;
  if (zero_feasible) return x;

  for (int it = 1; it <= iterations; ++it) {
    Vec r(m);
    for (Eigen::Index i = 0; i < m; ++i)
      r[i] = gamma[i] - vectors.col(i).dot(x * vectors.col(i));
    const double viol = r.cwiseAbs().sum() - tau;
    Mat grad;
    if (viol > 0.0) {
      grad = Mat::Zero(n, n);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double s = r[i] > 0.0 ? -1.0 : (r[i] < 0.0 ? 1.0 : 0.0);
        grad += s * vectors.col(i) * vectors.col(i).transpose();
      }
    } else {
      if (x.trace() < best_tr) {
        best_tr = x.trace();
        best = x;
      }
      grad = Mat::Identity(n, n);
    }
    const double step = step0 / std::sqrt(static_cast<double>(it));
    x = igs::project_psd(x - step * grad / std::max(1.0, grad.norm()));
  }
  return best_tr < std::numeric_limits<double>::infinity() ? best : x;
}

}  // namespace oracle
