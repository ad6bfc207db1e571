#pragma once

#include <string>
#include <vector>

#include "igs/bounds.hpp"
#include "igs/policies.hpp"

namespace igs {

/// Covariance generation styles used by the synthetic experiments.
///  - RandomLowRank: R R' with R n-by-s standard normal, unit spectral norm.
///  - Structured:    11' + 20 a^2 diag{n,...,1}, a ~ N(0,1), unit spectral norm.
///  - OnesPlusDiag:  d d' + 5 I with d = ones (not normalized).
///  - Custom:        caller-supplied matrix.
enum class CovStyle { RandomLowRank, Structured, OnesPlusDiag, Custom };

struct ModelSpec {
  enum class Kind { Gaussian, Gmm } kind = Kind::Gaussian;
  int n = 0;
  CovStyle style = CovStyle::RandomLowRank;
  int rank = 3;          // RandomLowRank
  Mat custom_cov;        // Custom (single component)
  int components = 1;    // Gmm
  Vec weights;           // Gmm true weights; empty: uniform
};

/// How the assumed parameters are perturbed away from the truth.
struct MismatchSpec {
  enum class Style { None, AddRandGram, ScaledTo } style = Style::None;
  int r = 1;            // AddRandGram column count
  double delta0 = 0.0;  // ScaledTo spectral distance
  bool normalize = false;
  double mean_offset = 0.0;  // ||mu_hat - mu||; 0 keeps the true mean
};

Mat gen_covariance(int n, CovStyle style, int rank, Rng& rng, const Mat* custom = nullptr);

Mat perturb_covariance(const Mat& sigma, const MismatchSpec& spec, Rng& rng);

/// Built signal model: true parameters plus cached sampling factors.
struct SignalModel {
  ModelSpec::Kind kind = ModelSpec::Kind::Gaussian;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  Vec weights;
  std::vector<Mat> factors;  // V sqrt(lambda^+), rank-aware sampling
};

SignalModel build_signal_model(const ModelSpec& spec, Rng& rng);

/// A built model plus the assumed (possibly mismatched) initialization the
/// algorithm is handed.
struct Instance {
  SignalModel model;
  std::vector<Vec> assumed_means;
  std::vector<Mat> assumed_covs;
  Vec assumed_weights;  // algorithm's initial mixture weights
};

Instance build_instance(const ModelSpec& model, const MismatchSpec& mismatch, Rng& rng,
                        const Vec* assumed_weights = nullptr);

/// Draw x from the model; returns the component label for mixtures (0 for
/// Gaussian).
std::pair<Vec, int> sample_signal(const SignalModel& model, Rng& rng);

/// y = a'x + w, w ~ N(0, sigma2).
double measure(const Vec& x, const Vec& a, double sigma2, Rng& rng);

struct TrialOptions {
  SensingOptions sensing;
  bool twin_track = false;  // replay both tracks for mismatch diagnostics
};

struct TrialResult {
  double recovery_error = 0.0;
  bool success = false;
  int true_label = 0;
  int predicted_label = 0;
  double total_power = 0.0;
  int steps = 0;
  Vec estimate;
  std::vector<StepDiag> step_diags;
  std::vector<MeasurementRecord> records;
  // twin-track diagnostics (filled when TrialOptions::twin_track)
  MismatchTrack mismatch;                  // Gaussian runs
  std::vector<Vec> mean_gap;               // assumed minus true posterior mean
  std::vector<double> trace_true;
  std::vector<double> trace_assumed;
  std::vector<double> entropy_true;
  GmmMismatchTrack gmm_track;              // GMM runs
};

/// One trial: draw x, run the sensing loop against a noisy oracle, score the
/// estimate, and (optionally) replay the measurement record on the true
/// posterior to produce the twin-track diagnostics.
TrialResult run_trial(const Instance& inst, const PrecisionSpec& spec,
                      const TrialOptions& opts, Rng& signal_rng, Rng& noise_rng);

/// The eigen-greedy power sequence is a pure function of the assumed
/// covariance (posterior covariances never depend on the observations); this
/// evaluates it without measuring. Used to hand the random baseline a paired
/// power budget.
std::vector<double> infogreedy_power_schedule(Mat cov, const PrecisionSpec& spec,
                                              const PowerRule& rule, int max_steps);

struct PolicySpec {
  std::string name;
  SensingOptions sensing;
  bool info_greedy2 = false;  // sequential covariance refresh across trials
  double alpha = 0.5;         // Info-Greedy-2 forgetting factor
  bool pair_random_power = true;
};

struct McConfig {
  ModelSpec model;
  MismatchSpec mismatch;
  double epsilon = 0.1;
  double p = 0.95;
  double sigma2 = 1e-4;
  std::vector<PolicySpec> policies;
  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  bool redraw_per_trial = false;  // new (model, mismatch) draw per trial
  bool twin_track = false;
  Vec assumed_weights;  // GMM initial weights; empty: uniform
};

struct McTrialRow {
  int trial = 0;
  double error = 0.0;
  bool success = false;
  double power = 0.0;
  int steps = 0;
  int misclass = -1;  // -1: not a classification run
};

struct McPolicyResult {
  std::string name;
  std::vector<McTrialRow> rows;
  double mean_error = 0.0;
  double median_error = 0.0;
  double success_rate = 0.0;
  double misclass_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_power = 0.0;
  double mean_steps = 0.0;
  // per-step averages over trials reaching that step
  std::vector<double> mean_trace_assumed;
  std::vector<double> mean_trace_true;
  std::vector<double> mean_delta;
};

struct McResult {
  std::vector<McPolicyResult> policies;
};

/// Monte Carlo driver. Trial t draws its substreams from (seed, t) only, so
/// results are a pure function of (config, seed) at any thread count; the
/// signal stream is shared across policies for paired comparisons.
/// Info-Greedy-2 policies run their trials in order (the covariance refresh
/// is sequential by definition).
McResult run_monte_carlo(const McConfig& cfg);

}  // namespace igs
