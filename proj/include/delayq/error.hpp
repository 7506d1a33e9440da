#pragma once

#include <stdexcept>
#include <string>

namespace delayq {

/// Violated input contract (bad parameters, mismatched lags, malformed histories).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense evaluation or quadrature requested outside the covered time range.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A requested quantity does not exist for the given parameters
/// (e.g. no real Hopf frequency).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The integrator produced a non-finite state.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Newton iteration failed to converge or hit a singular derivative.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delayq
