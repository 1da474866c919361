#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fredholm {

/// Short %g rendering of a double for error messages.
inline std::string num_str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/// Invalid parameters or inputs (maps to CLI exit code 1).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not certify its requested tolerance
/// (maps to CLI exit code 2). Never used for silent truncation.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  explicit ConvergenceError(const std::string& what)
      : ConvergenceError(what, -1.0) {}

  /// Best error estimate reached before giving up (negative if unknown).
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Parameters fall outside the analytic regime an operation is valid in,
/// e.g. real critical points in the growth model (exit code 1).
class RegimeError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A mathematical precondition (real spectrum, eigenvalues < 1, ...) does
/// not hold for the given instance (exit code 3 when surfaced by the CLI).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fredholm
