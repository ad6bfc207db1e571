#pragma once

#include <vector>

#include "igs/numerics.hpp"
#include "igs/rng.hpp"

namespace igs {

/// Sample covariance (1/L) sum x x'. Zero-mean convention by default,
/// matching signals drawn from N(0, Sigma); set subtract_mean for user data.
Mat sample_covariance(const std::vector<Vec>& samples, bool subtract_mean = false);

/// Columns-as-samples overload.
Mat sample_covariance(const Mat& samples, bool subtract_mean = false);

/// Smallest L with L >= 4 sqrt(n) tr(Sigma) (||Sigma||/delta^2 + 4/delta),
/// the sample count that puts ||sample cov - Sigma|| <= delta with
/// probability exceeding 1 - 2n exp(-sqrt(n)).
long long required_sample_size(double trace_sigma, double norm_sigma, int n, double delta);

/// alpha * prev + (1-alpha) * x x'; the sequential covariance refresh used
/// when sensing a stream of signals.
Mat sequential_cov_update(const Mat& prev, const Vec& x_hat, double alpha);

/// Sketching parameters: counts, noise variance, l1 budget, and the
/// constants they are derived from.
struct SketchConfig {
  long long M = 0;  // sketch vectors
  long long N = 0;  // signal copies
  long long L = 0;  // noisy repeats per (vector, copy) pair
  double sigma2 = 0.0;
  double tau = 0.0;
  double c0 = 1.0, c1 = 1.0, c2 = 1.0;
};

/// Smallest integers satisfying the sketching conditions
///   M > c0 n s,
///   N >= 4 sqrt(n) tr(Sigma) (36 M^2 n^2 ||Sigma|| / tau^2 + 24 M n / tau),
///   L >= max{ M s2 / (4 n^2 ||Sigma||),
///             s2 / sqrt(2 (tr/||Sigma||) M n^2),
///             6 M s2 / tau },
/// with tau = M delta / c2 exactly. c0, c2 default to 1; they are heuristic
/// knobs, the theory leaves them unspecified.
SketchConfig sketch_params(int n, int s, double trace_sigma, double norm_sigma,
                           double sigma2, double delta, double c0 = 1.0, double c1 = 1.0,
                           double c2 = 1.0);

/// Sketch vectors and their aggregated energies gamma.
struct SketchProblem {
  Mat vectors;  // n x M, column i is b_i
  Vec gamma;    // M aggregated energies, each an average of squares
};

/// gamma_i = (1/N) sum_j ( b_i' x_j + wbar_ij )^2 where wbar_ij is the
/// average of L iid N(0, sigma2) draws, sampled directly as N(0, sigma2/L).
SketchProblem sketch_signals(const Mat& signals, const Mat& vectors, long long L,
                             double sigma2, Rng& rng);

/// [B(X)]_i = b_i' X b_i.
Vec apply_sketch_operator(const Mat& x, const Mat& vectors);

struct RecoveryOptions {
  int max_iterations = 50000;
  double tol = 1e-8;        // iterate-change stopping threshold
  double rho = 1.0;         // ADMM penalty
  double trace_tol = 1e-6;  // returned trace vs best feasible trace found
  double l1_slack = 1e-6;   // feasibility slack factor on tau
};

struct RecoveryResult {
  Mat sigma;
  bool converged = false;
  int iterations = 0;
  double l1_residual = 0.0;
  double min_eigenvalue = 0.0;
};

/// min tr(X) s.t. X PSD, ||gamma - B(X)||_1 <= tau, by consensus ADMM with
/// PSD-projection and l1-ball-projection blocks. The returned matrix is the
/// best feasible iterate encountered, so it satisfies both constraints even
/// when converged is false. Throws InfeasibleSketch when no PSD matrix fits
/// the budget (certified, or residual stagnation above tau) and
/// MaxIterations when the budget ran out before any feasible iterate.
RecoveryResult recover_covariance(const SketchProblem& prob, double tau,
                                  const RecoveryOptions& opts = {});

}  // namespace igs
