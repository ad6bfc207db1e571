#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "igs/belief.hpp"
#include "igs/rng.hpp"

namespace igs {

/// Power allocation rule for one measurement.
///  - Standard:  sigma^2 (1/chi - 1/lambda)^+           (drives lambda to chi)
///  - Slack:     sigma^2 (1/(chi - delta_s) - 1/lambda)^+, delta_s < chi
///               (overshoot that absorbs covariance mismatch)
///  - OneSparse: sigma^2 / (gamma * max_diag)
///  - Fixed:     beta
struct PowerRule {
  enum class Kind { Standard, Slack, OneSparse, Fixed } kind = Kind::Standard;
  double delta_s = 0.0;  // Slack
  double gamma = 0.0;    // OneSparse
  double beta = 0.0;     // Fixed

  static PowerRule standard() { return {}; }
  static PowerRule slack(double delta_s);
  static PowerRule one_sparse(double gamma);
  static PowerRule fixed(double beta);
};

double allocate_power(double lambda_hat, const PrecisionSpec& spec, const PowerRule& rule,
                      std::optional<double> max_diag = std::nullopt);

/// One sensing step: vector a (power included, ||a||^2 = beta), its power,
/// and the observed scalar.
struct MeasurementRecord {
  Vec a;
  double beta = 0.0;
  double y = 0.0;
  int step = 0;
};

/// A proposed measurement before observation.
struct Measurement {
  Vec a;
  double beta = 0.0;
};

/// Proposal or Stop (termination condition met).
using Proposal = std::optional<Measurement>;

/// Eigen-greedy proposal: a = sqrt(beta) u along the top eigenvector;
/// Stop when ||cov|| <= chi.
Proposal next_measurement_infogreedy(const GaussianBelief& b, const PrecisionSpec& spec,
                                     const PowerRule& rule);

/// One-sparse proposal: a = sqrt(beta) e_j along the largest-variance
/// coordinate; Stop when ||cov|| <= chi.
Proposal next_measurement_one_sparse(const GaussianBelief& b, const PrecisionSpec& spec,
                                     const PowerRule& rule);

/// Mixture heuristic: highest-weight component, then eigen-greedy (or
/// one-sparse) on it; Stop when that component's ||cov|| <= chi.
Proposal next_measurement_gmm(const GmmBelief& b, const PrecisionSpec& spec,
                              const PowerRule& rule, bool sparse);

/// Random direction with prescribed power: a = sqrt(beta) g/||g||, or a
/// uniformly random scaled basis vector when one_sparse is set.
Measurement next_measurement_random(int n, double beta, Rng& rng, bool one_sparse = false);

/// Non-adaptive plan: top-K eigenvectors of cov with powers from the rule
/// applied to the initial eigenvalues.
std::vector<Measurement> plan_batch(const Mat& cov, int K, const PrecisionSpec& spec,
                                    const PowerRule& rule);

enum class Policy { InfoGreedy, OneSparse, Random, RandomOneSparse, Batch };

enum class DiagLevel { Basic, Full };

/// Per-step diagnostics recorded by the driver. spec_norm/entropy are only
/// populated at DiagLevel::Full (they cost an eigendecomposition); trace and
/// the one-sparse fields are always recorded.
struct StepDiag {
  int step = 0;
  double beta = 0.0;
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();  // eigen policies
  double trace = 0.0;
  double spec_norm = std::numeric_limits<double>::quiet_NaN();
  double entropy = std::numeric_limits<double>::quiet_NaN();
  int j = -1;                                                    // one-sparse index
  double max_diag = std::numeric_limits<double>::quiet_NaN();
  double rho_min = std::numeric_limits<double>::quiet_NaN();     // min_i rho_{i,j}
};

using Belief = std::variant<GaussianBelief, GmmBelief>;

struct SensingOptions {
  Policy policy = Policy::InfoGreedy;
  PowerRule rule = PowerRule::standard();
  int max_steps = -1;  // -1: dimension of the belief
  int split = 1;       // m > 1: sub-measurements of amplitude sqrt(beta/m)
  DiagLevel diag = DiagLevel::Basic;
  WeightUpdateMode weight_mode = WeightUpdateMode::PaperLiteral;
  std::vector<double> power_schedule;  // per-step powers for Random policies
};

struct SensingTrace {
  std::vector<MeasurementRecord> records;
  Belief final_belief;
  double total_power = 0.0;
  std::vector<StepDiag> steps;
};

/// Measurement oracle: given a, return the observed y. Failures propagate
/// as MeasurementError.
using MeasurementOracle = std::function<double(const Vec&)>;

/// The sensing loop: propose, measure, update, until Stop or max_steps.
SensingTrace run_sensing(const Belief& b0, const PrecisionSpec& spec,
                         const SensingOptions& opts, const MeasurementOracle& oracle,
                         Rng& rng);

}  // namespace igs
