#pragma once

#include <stdexcept>
#include <string>

namespace thinfilm {

// Argument outside the mathematical domain of an operation (negative order,
// negative time, r0 >= r1, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Array sizes or grids that do not match.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Query outside a stored range (e.g. interpolant past the trajectory horizon).
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// A numerical procedure produced a result that violates its own contract.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Iterative solver stopped at max_iter without meeting its tolerance.
class ConvergenceError : public NumericalFailure {
public:
  ConvergenceError(const std::string &what, double marginal_error, int iterations)
      : NumericalFailure(what), marginal_error_(marginal_error), iterations_(iterations) {}
  double marginal_error() const noexcept { return marginal_error_; }
  int iterations() const noexcept { return iterations_; }

private:
  double marginal_error_;
  int iterations_;
};

// Malformed scenario / config input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace thinfilm
