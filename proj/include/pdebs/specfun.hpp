#pragma once

// Special functions needed by the backstepping kernels.
//
// I1 is evaluated by its power series only. Kernel arguments are bounded by
// sqrt(lambda0) times the domain size, which keeps z well below 50 where the
// series converges in well under 100 terms.

#include <cmath>
#include <string>

#include "pdebs/errors.hpp"

namespace pdebs::specfun {

struct SeriesTolerance {
  double rel_tol = 1e-14;
  int max_terms = 200;

  void validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("SeriesTolerance: rel_tol must be > 0");
    if (max_terms < 1) throw DomainError("SeriesTolerance: max_terms must be >= 1");
  }
};

namespace detail {

inline void require_nonneg_finite(double z, const char* who) {
  if (!std::isfinite(z)) throw DomainError(std::string(who) + ": non-finite argument");
  if (z < 0.0) throw DomainError(std::string(who) + ": negative argument");
}

// Sums first + first*q/(1*2) + ... with ratio q/((j+1)(j+2)) between terms.
// Shared by I1 (first = z/2) and I1(z)/z (first = 1/2).
inline double i1_family_series(double first, double z, const SeriesTolerance& tol) {
  tol.validate();
  const double q = 0.25 * z * z;
  double term = first;
  double sum = first;
  if (first == 0.0) return 0.0;
  for (int j = 0; j < tol.max_terms; ++j) {
    term *= q / ((j + 1.0) * (j + 2.0));
    sum += term;
    if (std::abs(term) < tol.rel_tol * std::abs(sum)) return sum;
  }
  throw NumericalError("I1 series did not converge within max_terms at z = " + std::to_string(z));
}

}  // namespace detail

/// Modified Bessel function of the first kind, order one, for z >= 0.
inline double bessel_i1(double z, const SeriesTolerance& tol = {}) {
  detail::require_nonneg_finite(z, "bessel_i1");
  return detail::i1_family_series(0.5 * z, z, tol);
}

/// I1(z)/z with the removable singularity filled in (1/2 at z = 0).
inline double i1_ratio(double z, const SeriesTolerance& tol = {}) {
  detail::require_nonneg_finite(z, "i1_ratio");
  return detail::i1_family_series(0.5, z, tol);
}

inline double sinc(double z) {
  if (!std::isfinite(z)) throw DomainError("sinc: non-finite argument");
  if (z == 0.0) return 1.0;
  return std::sin(z) / z;
}

}  // namespace pdebs::specfun
