#pragma once

#include <stdexcept>
#include <string>

namespace infogeo {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid argument values: parameter bound violations, malformed shapes,
/// bad confidence levels, non-positive standard deviations.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ODE integration failure: non-finite state or step-size underflow.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimizer never produced a finite objective value.
class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fisher metric unusable at a point: indefinite, or condition number
/// beyond the singularity cutoff.
class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration problems; the message names the offending
/// field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace infogeo
