#include "igs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace igs {

EigenSystem eig_sym(const Mat& m) {
  detail::require_finite(m, "eig_sym");
  if (m.rows() != m.cols()) throw InvalidMatrix("eig_sym: matrix not square");
  if (!is_symmetric(m)) throw InvalidMatrix("eig_sym: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) throw InvalidMatrix("eig_sym: solver failed");

  const auto n = m.rows();
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  // canonical sign: largest-magnitude entry of each eigenvector positive
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax;
    out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

double spectral_norm_sym(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool psd_norm_at_most(const Mat& m, double bound) {
  if (m.rows() == 0) return true;
  // For PSD m: max diag <= ||m|| <= tr(m).
  if (m.diagonal().maxCoeff() > bound) return false;
  if (m.trace() <= bound) return true;
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff() <= bound;
}

namespace {

// Series expansion of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  const double lg = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - lg);
}

// Continued fraction for Q(a,x) = 1 - P(a,x), valid for x >= a + 1
// (modified Lentz).
double gamma_q_contfrac(double a, double x) {
  const double lg = std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

// Acklam's rational approximation of the standard normal quantile; only a
// starting point for Newton, accuracy ~1e-9 is plenty.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_quantile(double p, int n) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidProbability("chi2_quantile: p must be in (0,1)");
  if (n < 1) throw InvalidProbability("chi2_quantile: degrees of freedom must be >= 1");
  const double a = 0.5 * n;

  // Wilson-Hilferty start
  const double z = normal_quantile(p);
  const double t = 1.0 - 2.0 / (9.0 * n) + z * std::sqrt(2.0 / (9.0 * n));
  double q = n * t * t * t;
  if (!(q > 0.0)) q = 1e-8;

  // Newton on f(q) = P(a, q/2) - p with bisection safeguard.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double f = gamma_p(a, 0.5 * q) - p;
    if (f > 0.0)
      hi = std::min(hi, q);
    else
      lo = std::max(lo, q);
    // chi-squared density at q
    const double logpdf = (a - 1.0) * std::log(0.5 * q) - 0.5 * q - std::lgamma(a) -
                          std::log(2.0);
    const double pdf = std::exp(logpdf);
    double next = q - f / pdf;
    if (!(std::isfinite(next)) || next <= lo || next >= hi)
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * q;
    if (std::abs(next - q) <= 1e-14 * std::max(1.0, q)) {
      q = next;
      break;
    }
    q = next;
  }
  return q;
}

double chi_npe(double epsilon, double p, int n) {
  if (!(epsilon > 0.0)) throw InvalidProbability("chi_npe: epsilon must be > 0");
  return epsilon * epsilon / chi2_quantile(p, n);
}

Mat project_psd(const Mat& m) {
  detail::require_finite(m, "project_psd");
  if (!is_symmetric(m)) throw InvalidMatrix("project_psd: matrix not symmetric");
  EigenSystem es = eig_sym(m);
  const Vec clipped = es.values.cwiseMax(0.0);
  return symmetrize(es.vectors * clipped.asDiagonal() * es.vectors.transpose());
}

Vec project_l1_ball(const Vec& v, double tau) {
  if (tau < 0.0) throw Error("project_l1_ball: tau must be >= 0");
  if (tau == 0.0) return Vec::Zero(v.size());
  const Vec av = v.cwiseAbs();
  if (av.sum() <= tau) return v;

  // Exact threshold via sort (Duchi et al. style).
  std::vector<double> u(av.data(), av.data() + av.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double cand = (cum - tau) / static_cast<double>(k + 1);
    if (k + 1 == u.size() || u[k + 1] <= cand) {
      theta = cand;
      break;
    }
  }
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = v[i] < 0.0 ? -mag : mag;
  }
  return out;
}

}  // namespace igs
