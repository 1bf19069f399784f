#pragma once

// Crank-Nicolson for one line of a three-point operator
//   (A u)_j = lower_j u_{j-1} + diag_j u_j + upper_j u_{j+1},
// homogeneous at the first node and coupled to a prescribed boundary value
// through `tail` at the last node.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pdebs/errors.hpp"

namespace pdebs::sim {

struct LineOperator {
  std::vector<double> lower;  // lower[0] unused
  std::vector<double> diag;
  std::vector<double> upper;  // upper[n-1] unused
  double tail = 0.0;          // coefficient of the boundary value in the last row

  [[nodiscard]] std::size_t size() const { return diag.size(); }
};

/// epsilon (d^2/dx^2 - q) + lambda on n interior nodes of spacing h,
/// u = 0 at the first end and u = U at the far end.
inline LineOperator cartesian_line(std::size_t n, double h, double epsilon, double q, double lambda) {
  LineOperator op;
  const double s = epsilon / (h * h);
  op.lower.assign(n, s);
  op.upper.assign(n, s);
  op.diag.assign(n, -2.0 * s - epsilon * q + lambda);
  op.tail = s;
  return op;
}

/// epsilon ((1/r)(r u_r)_r - alpha2 u / r^2) + lambda on staggered radial cells
/// r_j = (j + 1/2) dr, zero flux through the inner face r = 0 and u(R) = U
/// imposed half a cell beyond the last centre.
inline LineOperator radial_line(std::size_t nr, double R, double epsilon, double alpha2, double lambda) {
  LineOperator op;
  const double dr = R / static_cast<double>(nr);
  op.lower.assign(nr, 0.0);
  op.upper.assign(nr, 0.0);
  op.diag.assign(nr, 0.0);
  for (std::size_t j = 0; j < nr; ++j) {
    const double r = (static_cast<double>(j) + 0.5) * dr;
    const double face_lo = static_cast<double>(j) * dr;
    const double scale = epsilon / (r * dr * dr);
    const double lo = scale * face_lo;
    double hi = 0.0;
    if (j + 1 < nr) {
      hi = scale * (static_cast<double>(j) + 1.0) * dr;
      op.upper[j] = hi;
    } else {
      hi = scale * R * 2.0;  // face at R, half-cell distance
      op.tail = hi;
    }
    op.lower[j] = lo;
    op.diag[j] = -(lo + hi) - epsilon * alpha2 / (r * r) + lambda;
  }
  return op;
}

/// Factored (I - dt/2 A) for repeated Crank-Nicolson steps.
class LineCN {
public:
  LineCN() = default;

  LineCN(LineOperator op, double dt) : op_(std::move(op)), dt_(dt) {
    const std::size_t n = op_.size();
    if (n == 0) throw NumericalError("LineCN: empty line");
    cprime_.resize(n);
    inv_denom_.resize(n);
    const double half = 0.5 * dt_;
    double prev_c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = j ? -half * op_.lower[j] : 0.0;
      const double b = 1.0 - half * op_.diag[j];
      const double c = j + 1 < n ? -half * op_.upper[j] : 0.0;
      const double denom = b - a * prev_c;
      if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom))
        throw NumericalError("LineCN: zero pivot at row " + std::to_string(j));
      inv_denom_[j] = 1.0 / denom;
      cprime_[j] = c * inv_denom_[j];
      prev_c = cprime_[j];
    }
  }

  [[nodiscard]] std::size_t size() const { return op_.size(); }
  [[nodiscard]] const LineOperator& op() const { return op_; }
  [[nodiscard]] double dt() const { return dt_; }

  /// out <- (I - dt/2 A)^{-1} [ (I + dt/2 A) in + dt/2 tail (bc_old + bc_new) e_last ].
  /// `out` may alias `in`.
  template <class T>
  void step(std::span<const T> in, T bc_old, T bc_new, std::span<T> out) const {
    const std::size_t n = op_.size();
    if (in.size() != n || out.size() != n) throw NumericalError("LineCN: size mismatch");
    const double half = 0.5 * dt_;
    scratch_resize<T>(n);
    auto& rhs = scratch<T>();
    for (std::size_t j = 0; j < n; ++j) {
      T v = in[j] + half * op_.diag[j] * in[j];
      if (j) v += half * op_.lower[j] * in[j - 1];
      if (j + 1 < n) v += half * op_.upper[j] * in[j + 1];
      rhs[j] = v;
    }
    rhs[n - 1] += half * op_.tail * (bc_old + bc_new);

    rhs[0] = rhs[0] * inv_denom_[0];
    for (std::size_t j = 1; j < n; ++j) {
      const double a = -half * op_.lower[j];
      rhs[j] = (rhs[j] - a * rhs[j - 1]) * inv_denom_[j];
    }
    out[n - 1] = rhs[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) out[j] = rhs[j] - cprime_[j] * out[j + 1];
  }

private:
  template <class T>
  std::vector<T>& scratch() const {
    if constexpr (std::is_same_v<T, double>)
      return real_scratch_;
    else
      return complex_scratch_;
  }
  template <class T>
  void scratch_resize(std::size_t n) const {
    auto& s = scratch<T>();
    if (s.size() != n) s.resize(n);
  }

  LineOperator op_;
  double dt_ = 0.0;
  std::vector<double> cprime_;
  std::vector<double> inv_denom_;
  // per-instance work space; a LineCN is owned by one stepper and not shared across threads
  mutable std::vector<double> real_scratch_;
  mutable std::vector<std::complex<double>> complex_scratch_;
};

}  // namespace pdebs::sim
