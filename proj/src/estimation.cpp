#include "igs/estimation.hpp"

#include <cmath>
#include <limits>

namespace igs {

Mat sample_covariance(const std::vector<Vec>& samples, bool subtract_mean) {
  if (samples.empty()) throw EmptyData("sample_covariance: no samples");
  const Eigen::Index n = samples.front().size();
  Mat m(n, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != n) throw DimError("sample_covariance: ragged samples");
    m.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  return sample_covariance(m, subtract_mean);
}

Mat sample_covariance(const Mat& samples, bool subtract_mean) {
  if (samples.cols() == 0) throw EmptyData("sample_covariance: no samples");
  const double inv_l = 1.0 / static_cast<double>(samples.cols());
  if (!subtract_mean) return symmetrize(inv_l * (samples * samples.transpose()));
  const Vec mean = samples.rowwise().mean();
  const Mat centered = samples.colwise() - mean;
  return symmetrize(inv_l * (centered * centered.transpose()));
}

long long required_sample_size(double trace_sigma, double norm_sigma, int n, double delta) {
  if (!(trace_sigma > 0.0 && norm_sigma > 0.0 && n >= 1 && delta > 0.0))
    throw Error("required_sample_size: all inputs must be positive");
  const double bound =
      4.0 * std::sqrt(static_cast<double>(n)) * trace_sigma *
      (norm_sigma / (delta * delta) + 4.0 / delta);
  return static_cast<long long>(std::ceil(bound));
}

Mat sequential_cov_update(const Mat& prev, const Vec& x_hat, double alpha) {
  if (prev.rows() != x_hat.size()) throw DimError("sequential_cov_update: dimension mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("sequential_cov_update: alpha in [0,1]");
  return symmetrize(alpha * prev + (1.0 - alpha) * (x_hat * x_hat.transpose()));
}

SketchConfig sketch_params(int n, int s, double trace_sigma, double norm_sigma,
                           double sigma2, double delta, double c0, double c1, double c2) {
  if (!(n >= 1 && s >= 1 && trace_sigma > 0.0 && norm_sigma > 0.0 && sigma2 >= 0.0 &&
        delta > 0.0 && c0 > 0.0 && c2 > 0.0))
    throw Error("sketch_params: invalid inputs");
  SketchConfig cfg;
  cfg.sigma2 = sigma2;
  cfg.c0 = c0;
  cfg.c1 = c1;
  cfg.c2 = c2;
  // smallest integer strictly above c0*n*s
  cfg.M = static_cast<long long>(std::floor(c0 * n * s)) + 1;
  cfg.tau = static_cast<double>(cfg.M) * delta / c2;
  const double m = static_cast<double>(cfg.M);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double n_bound = 4.0 * std::sqrt(static_cast<double>(n)) * trace_sigma *
                         (36.0 * m * m * nn * norm_sigma / (cfg.tau * cfg.tau) +
                          24.0 * m * static_cast<double>(n) / cfg.tau);
  cfg.N = std::max<long long>(1, static_cast<long long>(std::ceil(n_bound)));
  const double l_bound =
      std::max({m * sigma2 / (4.0 * nn * norm_sigma),
                sigma2 / std::sqrt(2.0 * (trace_sigma / norm_sigma) * m * nn),
                6.0 * m * sigma2 / cfg.tau});
  cfg.L = std::max<long long>(1, static_cast<long long>(std::ceil(l_bound)));
  return cfg;
}

SketchProblem sketch_signals(const Mat& signals, const Mat& vectors, long long L,
                             double sigma2, Rng& rng) {
  if (signals.rows() != vectors.rows())
    throw DimError("sketch_signals: signal/vector dimension mismatch");
  if (L < 1) throw Error("sketch_signals: L must be >= 1");
  const Eigen::Index m = vectors.cols();
  const Eigen::Index n_sig = signals.cols();
  if (n_sig == 0) throw EmptyData("sketch_signals: no signals");

  const double noise_sd = sigma2 > 0.0 ? std::sqrt(sigma2 / static_cast<double>(L)) : 0.0;
  Vec gamma = Vec::Zero(m);
  constexpr Eigen::Index kBlock = 4096;
  Mat y;
  for (Eigen::Index j0 = 0; j0 < n_sig; j0 += kBlock) {
    const Eigen::Index cols = std::min(kBlock, n_sig - j0);
    y.noalias() = vectors.transpose() * signals.middleCols(j0, cols);  // m x cols
    if (noise_sd > 0.0)
      for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < m; ++i) y(i, j) += noise_sd * rng.normal();
    gamma += y.array().square().matrix().rowwise().sum();
  }
  gamma /= static_cast<double>(n_sig);
  return SketchProblem{vectors, std::move(gamma)};
}

Vec apply_sketch_operator(const Mat& x, const Mat& vectors) {
  if (x.rows() != vectors.rows()) throw DimError("apply_sketch_operator: dimension mismatch");
  return ((x * vectors).cwiseProduct(vectors)).colwise().sum().transpose();
}

namespace {

// Symmetric vectorization with sqrt(2)-scaled off-diagonals, so that
// svec(X) . svec(Y) = <X, Y>_F.
struct SymVec {
  Eigen::Index n = 0;
  Eigen::Index dim() const { return n * (n + 1) / 2; }

  Vec operator()(const Mat& x) const {
    Vec v(dim());
    Eigen::Index k = 0;
    const double r2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[k++] = x(i, i);
      for (Eigen::Index j = i + 1; j < n; ++j) v[k++] = r2 * x(i, j);
    }
    return v;
  }

  Mat inverse(const Vec& v) const {
    Mat x(n, n);
    Eigen::Index k = 0;
    const double inv_r2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, i) = v[k++];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double e = inv_r2 * v[k++];
        x(i, j) = e;
        x(j, i) = e;
      }
    }
    return x;
  }
};

}  // namespace

RecoveryResult recover_covariance(const SketchProblem& prob, double tau,
                                  const RecoveryOptions& opts) {
  if (!(tau >= 0.0)) throw Error("recover_covariance: tau must be >= 0");
  const Eigen::Index n = prob.vectors.rows();
  const Eigen::Index m = prob.vectors.cols();
  if (prob.gamma.size() != m) throw DimError("recover_covariance: gamma/vector count mismatch");

  RecoveryResult res;
  // The zero matrix is always trace-minimal when feasible.
  if (prob.gamma.cwiseAbs().sum() <= tau) {
    res.sigma = Mat::Zero(n, n);
    res.converged = true;
    res.l1_residual = prob.gamma.cwiseAbs().sum();
    return res;
  }
  // Infeasibility certificate: B(X)_i >= 0 for PSD X, so entries with
  // gamma_i < 0 contribute at least |gamma_i| to the residual.
  double neg_mass = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) neg_mass += std::max(0.0, -prob.gamma[i]);
  if (neg_mass > tau * (1.0 + opts.l1_slack))
    throw InfeasibleSketch("recover_covariance: negative sketch mass exceeds tau");

  const SymVec sv{n};
  const Eigen::Index d = sv.dim();

  // Global scaling keeps the l1 geometry and conditions the consensus blocks.
  double kappa = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) kappa += prob.vectors.col(i).squaredNorm();
  kappa = std::max(kappa / static_cast<double>(m), 1e-12);

  Mat bmat(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec& b = prob.vectors.col(i);
    bmat.row(i) = sv(Mat(b * b.transpose())).transpose() / kappa;
  }
  const Vec gamma_s = prob.gamma / kappa;
  const double tau_s = tau / kappa;

  const Mat gram = bmat.transpose() * bmat;
  const Eigen::LDLT<Mat> system((gram + Mat::Identity(d, d)).eval());
  const Vec cost = sv(Mat::Identity(n, n));  // gradient of tr(X)

  // Least-squares warm start, clipped to the PSD cone.
  Vec x;
  {
    const Eigen::LDLT<Mat> ls_sys((gram + 1e-10 * Mat::Identity(d, d)).eval());
    const Vec x_ls = ls_sys.solve(bmat.transpose() * gamma_s);
    x = sv(project_psd(sv.inverse(x_ls)));
  }
  Vec z = x;
  Vec w = gamma_s - project_l1_ball(gamma_s - bmat * x, tau_s);
  Vec u = Vec::Zero(m);
  Vec v = Vec::Zero(d);

  const double rho = opts.rho;
  // Absolute epsilon keeps tau = 0 (exact-fit) problems solvable in floats.
  const double feas_tol =
      tau * (1.0 + opts.l1_slack) + 1e-12 * std::max(1.0, prob.gamma.cwiseAbs().sum());
  bool have_best = false;
  double best_trace = 0.0;
  Mat best_sigma;
  double best_residual = std::numeric_limits<double>::infinity();
  double stagnation_probe = std::numeric_limits<double>::infinity();

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Vec x_prev = x;
    x = system.solve(bmat.transpose() * (w - u) + (z - v) - cost / rho);
    const Vec bx = bmat * x;
    w = gamma_s - project_l1_ball(gamma_s - (bx + u), tau_s);
    const Mat z_mat = project_psd(sv.inverse(x + v));
    z = sv(z_mat);
    u += bx - w;
    v += x - z;

    const double residual = (prob.gamma - apply_sketch_operator(z_mat, prob.vectors))
                                .cwiseAbs()
                                .sum();
    best_residual = std::min(best_residual, residual);
    if (residual <= feas_tol) {
      const double tr = z_mat.trace();
      if (!have_best || tr < best_trace) {
        have_best = true;
        best_trace = tr;
        best_sigma = z_mat;
      }
    }
    const double change = (x - x_prev).lpNorm<Eigen::Infinity>();
    if (change < opts.tol && have_best) {
      ++it;
      res.converged = true;
      break;
    }
    if (it == opts.max_iterations / 2) stagnation_probe = best_residual;
  }

  if (!have_best) {
    const bool stagnated =
        std::isfinite(stagnation_probe) &&
        (stagnation_probe - best_residual) <= 1e-10 * std::max(1.0, best_residual);
    if (stagnated)
      throw InfeasibleSketch("recover_covariance: residual stagnated above tau");
    throw MaxIterations("recover_covariance: no feasible iterate within budget", it,
                        best_residual);
  }

  res.sigma = best_sigma;
  res.iterations = it;
  res.l1_residual =
      (prob.gamma - apply_sketch_operator(best_sigma, prob.vectors)).cwiseAbs().sum();
  Eigen::SelfAdjointEigenSolver<Mat> es(best_sigma, Eigen::EigenvaluesOnly);
  res.min_eigenvalue = es.eigenvalues().minCoeff();
  return res;
}

}  // namespace igs
