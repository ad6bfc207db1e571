#pragma once

#include <stdexcept>
#include <string>

namespace igs {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error {
  using Error::Error;
};

struct InvalidProbability : Error {
  using Error::Error;
};

struct DimError : Error {
  using Error::Error;
};

/// All mixture weights vanished after a posterior update (numerically
/// impossible observation, detected after log-space renormalization).
struct WeightCollapse : Error {
  using Error::Error;
};

struct InvalidSlack : Error {
  using Error::Error;
};

struct MeasurementError : Error {
  using Error::Error;
};

struct EmptyData : Error {
  using Error::Error;
};

/// A bound evaluator received a trace violating its hypothesis.
struct InvalidTrack : Error {
  using Error::Error;
};

/// No PSD matrix within the l1 budget exists (residual stagnated above tau).
struct InfeasibleSketch : Error {
  using Error::Error;
};

/// Solver hit its iteration cap without meeting both constraints.
struct MaxIterations : Error {
  MaxIterations(const std::string& what, int iterations, double residual)
      : Error(what), iterations(iterations), l1_residual(residual) {}
  int iterations;
  double l1_residual;
};

/// Config schema violation; message lists every offending field.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace igs
