#pragma once

#include <string>

#include "igs/simulator.hpp"

namespace igs {

/// Parsed file config for one CLI command. Field defaults double as the
/// documented schema defaults (alpha = 0.5, Theorem-2 delta = 0.5, one-sparse
/// gamma = 1).
struct RunConfig {
  enum class Command { Sense, Mc, Sketch, Bounds, Gen } command = Command::Mc;
  std::uint64_t seed = 0;
  int trials = 1;
  int threads = 0;  // 0: IGS_THREADS or hardware default
  std::string out;

  ModelSpec model;
  Vec assumed_weights;  // algorithm's initial mixture weights; empty: uniform
  double epsilon = 0.1;
  double p = 0.95;
  double sigma2 = 1e-4;
  MismatchSpec mismatch;
  bool redraw_per_trial = false;
  bool twin_track = false;
  std::vector<PolicySpec> policies;

  struct BoundsCmd {
    std::string kind = "entropy";  // entropy | one_sparse_trace | delta_recursion
    double delta = 0.5;            // Theorem-2 free constant
    double gamma = 1.0;            // one-sparse power constant
  } bounds;

  struct SketchCmd {
    int s = 2;
    double delta = 0.2;
    double c0 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    long long M = -1;  // -1: derive from the lemma
    long long N = -1;
    long long L = -1;
    double tau = -1.0;
    double sigma2 = 1.0;  // sketching noise variance
  } sketch;

  struct GenCmd {
    std::string what = "covariance";  // covariance | samples
    int count = 100;
    int component = 0;
  } gen;
};

/// Strict parse: unknown keys and out-of-range values are collected and
/// reported together in one ConfigError.
RunConfig parse_config(const std::string& path);

RunConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace igs
