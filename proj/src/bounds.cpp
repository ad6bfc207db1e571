#include "igs/bounds.hpp"

#include <cmath>
#include <limits>

namespace igs {

namespace {
constexpr double ln_2pi_e = 2.8378770664093454836;
}

EntropyBounds entropy_bounds(const MismatchTrack& track, double delta, double trace0) {
  if (!(delta > 0.0 && delta < 1.0) && delta != 0.0)
    throw InvalidTrack("entropy_bounds: delta must be in [0,1)");
  if (track.s < 1) throw InvalidTrack("entropy_bounds: rank must be >= 1");
  const int K = track.K;
  if (static_cast<int>(track.beta.size()) < K ||
      static_cast<int>(track.lambda_hat.size()) < K ||
      static_cast<int>(track.lambda_true.size()) < K)
    throw InvalidTrack("entropy_bounds: track shorter than K");

  EntropyBounds out;
  out.bound.resize(K);
  out.ideal.resize(K);
  out.f.resize(K);
  const double s = static_cast<double>(track.s);
  double log_bound = 0.5 * s * (ln_2pi_e + std::log(trace0));
  // ideal-case entropy: exact-covariance run over the initial true spectrum
  double ideal_base = 0.5 * s * ln_2pi_e;
  for (int j = 0; j < track.s && j < static_cast<int>(track.eigs_true.size()); ++j)
    if (track.eigs_true[j] > 0.0) ideal_base += 0.5 * std::log(track.eigs_true[j]);
  double ideal_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const double bl = track.beta[k] * track.lambda_hat[k];
    const double f = 1.0 - ((1.0 - delta) / s) * bl / (bl + track.sigma2);
    if (!(f > 0.0 && f < 1.0))
      throw InvalidTrack("entropy_bounds: contraction factor outside (0,1)");
    out.f[k] = f;
    log_bound += 0.5 * s * std::log(f);  // minus (s/2) ln(1/f)
    out.bound[k] = log_bound;
    if (k < static_cast<int>(track.eigs_true.size()) && track.chi > 0.0)
      ideal_sum += 0.5 * track.eigs_true[k] / track.chi;
    out.ideal[k] = ideal_base - ideal_sum;
  }
  return out;
}

PowerBounds power_bounds(const Vec& eigs, int s, int K, const PrecisionSpec& spec) {
  PowerBounds out;
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    if (eigs[i] > spec.chi)
      out.ideal += spec.sigma2 * (1.0 / spec.chi - 1.0 / eigs[i]);
  out.extra_cap = (20.0 * s / 51.0 + K / 272.0) * spec.sigma2 / spec.chi;
  out.extra_cap_k_eq_s = (323.0 / 816.0) * spec.sigma2 * s / spec.chi;
  return out;
}

DeltaRecursion delta_recursion_check(double delta_prev, double beta, double sigma2) {
  if (delta_prev < 0.0 || beta < 0.0 || sigma2 < 0.0)
    throw Error("delta_recursion_check: inputs must be nonnegative");
  DeltaRecursion out;
  out.admissible = beta == 0.0 || delta_prev <= 0.75 * sigma2 / beta;
  out.cap = 4.0 * delta_prev;
  return out;
}

double one_sparse_trace_cap(double trace_prev, double rho_min, int n, double gamma) {
  if (!(rho_min >= 0.0 && rho_min < 1.0))
    throw Error("one_sparse_trace_cap: rho_min must be in [0,1)");
  if (!(gamma > 0.0)) throw Error("one_sparse_trace_cap: gamma must be > 0");
  const double shrink =
      ((n - 1) * rho_min + 1.0) / (static_cast<double>(n) * (1.0 + gamma));
  return (1.0 - shrink) * trace_prev;
}

long long one_sparse_min_steps(double trace0, const PrecisionSpec& spec, int n,
                               double gamma) {
  if (!(gamma > 0.0)) throw Error("one_sparse_min_steps: gamma must be > 0");
  if (!(trace0 > spec.chi)) return 0;
  const double rate = 1.0 / (static_cast<double>(n) * (1.0 + gamma));
  const double k = std::log(trace0 / spec.chi) / std::log(1.0 / (1.0 - rate));
  return static_cast<long long>(std::ceil(std::max(k, 0.0)));
}

Vec unbiasedness_drift(const Vec& mu_gap, const std::vector<DriftStep>& steps,
                       double sigma2) {
  Vec gap = mu_gap;
  for (const auto& st : steps) {
    if (st.u_hat.size() != gap.size()) throw DimError("unbiasedness_drift: dim mismatch");
    const double c = st.beta * st.lambda_hat / (st.beta * st.lambda_hat + sigma2);
    gap -= (c * st.u_hat.dot(gap)) * st.u_hat;
  }
  return gap;
}

GmmDiag gmm_mismatch_diagnostics(const GmmMismatchTrack& track) {
  const int K = static_cast<int>(track.a.size());
  if (static_cast<int>(track.delta.size()) != K + 1)
    throw InvalidTrack("gmm diagnostics: delta must have K+1 entries");
  GmmDiag d;
  d.rho.resize(K);
  d.b.resize(K);
  d.z.resize(K);
  d.delta = track.delta;
  d.rho_cap.resize(K);
  d.cap_defined.resize(K);

  const double s2 = track.sigma2;
  const double n = static_cast<double>(track.n);
  double eta0 = 0.0;
  double big_delta = 0.0;
  double u_agg = 0.0;

  for (int k = 0; k < K; ++k) {
    const Vec& a = track.a[k];
    d.rho[k] = a.dot(track.mu_hat[k] - track.mu_true[k]);
    d.z[k] = track.y[k] - a.dot(track.mu_true_prev[k]);
    const double mean_gap = a.dot(track.mu_component - track.mu_true_prev[k]);
    d.b[k] = std::sqrt((track.lambda_true[k] + track.delta[k]) + s2 + mean_gap * mean_gap);

    const double abs_rho = std::abs(d.rho[k]);
    eta0 = std::max(eta0, (s2 * (abs_rho + 2.0 * n * d.b[k]) * abs_rho +
                           track.beta[k] * n * n * d.b[k] * d.b[k] * track.delta[k]) /
                              (s2 * s2));
    big_delta = std::max(big_delta, std::max(abs_rho, track.delta[k]));

    // recursive cap on |rho_k|
    const double lam_hat = track.lambda_hat[k];
    const double delta_k = track.delta[k + 1];
    d.cap_defined[k] = lam_hat > delta_k && track.beta[k] > 0.0;
    if (d.cap_defined[k]) {
      const double prev = k == 0 ? 0.0 : std::abs(d.rho[k - 1]);
      d.rho_cap[k] =
          (prev + delta_k * std::abs(d.z[k]) /
                      ((lam_hat - delta_k) + s2 / track.beta[k])) /
          (lam_hat * track.beta[k] / s2 + 1.0);
    } else {
      d.rho_cap[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  for (int k = 0; k < K; ++k)
    u_agg = std::max(u_agg, (s2 * (big_delta + 2.0 * n * d.b[k]) +
                             track.beta[k] * n * n * d.b[k] * d.b[k]) /
                                (s2 * s2));
  d.eta0 = eta0;
  d.Delta = big_delta;
  d.U = u_agg;
  d.eta0_proof = u_agg * big_delta;
  return d;
}

}  // namespace igs
