#pragma once

#include <stdexcept>
#include <string>

namespace pdebs {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Inconsistent or invalid configuration (grid mismatch, bad key, aliasing).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown or non-finite values during integration.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The actuator bank cannot independently move the first N modes.
class StabilizabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Decay fit preconditions not met.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdebs
