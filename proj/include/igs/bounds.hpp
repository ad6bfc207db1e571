#pragma once

#include <vector>

#include "igs/belief.hpp"

namespace igs {

/// Twin-track record of a mismatched Gaussian run: per-step spectral gap
/// delta_k = ||assumed_k - true_k|| plus the eigenvalues and powers that the
/// bound evaluators consume. delta has K+1 entries (delta_0 first).
struct MismatchTrack {
  std::vector<double> delta;        // delta_0 .. delta_K
  std::vector<double> lambda_true;  // top eigenvalue of true cov before step k
  std::vector<double> lambda_hat;   // top eigenvalue of assumed cov before step k
  std::vector<double> beta;         // per-step power
  std::vector<double> eigs_true;    // initial true spectrum, descending
  double sigma2 = 0.0;
  double chi = 0.0;
  int s = 0;  // rank of the true covariance
  int K = 0;  // step count
};

struct EntropyBounds {
  std::vector<double> bound;  // k = 1..K mismatch bound
  std::vector<double> ideal;  // k = 1..K exact-covariance posterior entropy
  std::vector<double> f;      // per-step contraction factors
};

/// Entropy bound: bound_k = (s/2){ln[2 pi e tr0] - sum_{j<=k} ln(1/f_j)} with
/// f_j = 1 - ((1-delta)/s) b_j l_j / (b_j l_j + s2). Throws InvalidTrack when
/// some f_j falls outside (0,1). ideal_k is the posterior entropy when the
/// true covariance is used.
EntropyBounds entropy_bounds(const MismatchTrack& track, double delta, double trace0);

struct PowerBounds {
  double ideal = 0.0;            // sum over eigenvalues above chi
  double extra_cap = 0.0;        // (20 s/51 + K/272) sigma^2 / chi
  double extra_cap_k_eq_s = 0.0; // (323/816) sigma^2 s / chi
};

/// eigs must be descending; K is the count of eigenvalues above chi.
PowerBounds power_bounds(const Vec& eigs, int s, int K, const PrecisionSpec& spec);

struct DeltaRecursion {
  bool admissible = false;  // delta_prev <= 3 sigma^2 / (4 beta)
  double cap = 0.0;         // 4 delta_prev
};

DeltaRecursion delta_recursion_check(double delta_prev, double beta, double sigma2);

/// One-step trace cap for one-sparse sensing:
/// [1 - ((n-1) rho + 1) / (n (1+gamma))] * trace_prev.
double one_sparse_trace_cap(double trace_prev, double rho_min, int n, double gamma);

/// Measurement count sufficient for precision epsilon at confidence p:
/// ceil(max{ ln(trace0/chi) / ln(1/(1 - 1/(n(1+gamma)))), 0 }).
long long one_sparse_min_steps(double trace0, const PrecisionSpec& spec, int n,
                               double gamma);

struct DriftStep {
  double beta = 0.0;
  double lambda_hat = 0.0;
  Vec u_hat;
};

/// Expected estimator gap after the given steps:
/// prod_j (I - beta_j lambda_j/(beta_j lambda_j + s2) u_j u_j') applied to
/// mu_gap in step order.
Vec unbiasedness_drift(const Vec& mu_gap, const std::vector<DriftStep>& steps,
                       double sigma2);

/// Twin-track record of a mismatched GMM run restricted to the true
/// component c*. Entries are indexed by step k = 1..K; delta has K+1 entries.
struct GmmMismatchTrack {
  std::vector<Vec> a;                // measurement vectors
  std::vector<double> beta;
  std::vector<double> y;
  std::vector<Vec> mu_hat;           // assumed posterior mean of c*, after step k
  std::vector<Vec> mu_true;          // true posterior mean of c*, after step k
  std::vector<Vec> mu_true_prev;     // true posterior mean before step k
  std::vector<double> lambda_true;   // top eigenvalue of true cov before step k
  std::vector<double> lambda_hat;    // top eigenvalue of assumed cov before step k
  std::vector<double> delta;         // delta_{c*,0} .. delta_{c*,K}
  Vec mu_component;                  // true initial mean of component c*
  double sigma2 = 0.0;
  int n = 0;
};

/// Mismatch diagnostics of the GMM power bound: per-step projection errors
/// rho_k, envelopes b_k, the eta_0 aggregate, and the recursive cap on
/// |rho_k| (flagged undefined where lambda_hat_k <= delta_k).
struct GmmDiag {
  std::vector<double> rho;      // a_k' (mu_hat_k - mu_true_k)
  std::vector<double> b;
  std::vector<double> z;        // y_k - a_k' mu_true_{k-1}
  std::vector<double> delta;    // copy of the track deltas
  std::vector<double> rho_cap;  // recursive cap on |rho_k|
  std::vector<bool> cap_defined;
  double eta0 = 0.0;        // theorem-statement aggregate
  double Delta = 0.0;       // max_k max(|rho_k|, delta_{k-1})
  double U = 0.0;
  double eta0_proof = 0.0;  // U * Delta
  double eta_hat = 0.5;
};

GmmDiag gmm_mismatch_diagnostics(const GmmMismatchTrack& track);

}  // namespace igs
