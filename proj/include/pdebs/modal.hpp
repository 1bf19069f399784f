#pragma once

// Sine-series and angular-eigenfunction transforms between sampled profiles and
// mode coefficients. Analysis is the defining integral evaluated with the
// composite trapezoid rule on the sampling grid; synthesis uses the raw modes.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/errors.hpp"

namespace pdebs::modal {

enum class ModalDomain { square_y, sector_theta };

/// Coefficients u_n(x_i) for n = 1..n_max; row n-1, column = grid index.
struct ModalSeries {
  int n_max = 0;
  Eigen::MatrixXd coeffs;
  ModalDomain domain = ModalDomain::square_y;
};

struct AngularBasis {
  double theta1 = 0.0;
  double theta2 = M_PI / 2.0;
  int n_max = 1;

  AngularBasis() = default;
  AngularBasis(double t1, double t2, int n) : theta1(t1), theta2(t2), n_max(n) { validate(); }

  [[nodiscard]] double span() const { return theta2 - theta1; }
  /// Angular eigenvalue n pi / (theta2 - theta1).
  [[nodiscard]] double alpha(int n) const { return n * M_PI / span(); }
  [[nodiscard]] double phi(int n, double theta) const { return std::sin(alpha(n) * (theta - theta1)); }

  void validate() const {
    if (!std::isfinite(theta1) || !std::isfinite(theta2)) throw DomainError("AngularBasis: non-finite limits");
    if (!(span() > 0.0) || span() > 2.0 * M_PI + 1e-12)
      throw DomainError("AngularBasis: need 0 < theta2 - theta1 <= 2 pi");
    if (n_max < 1) throw DomainError("AngularBasis: n_max must be >= 1");
  }
};

namespace detail {

inline void check_samples(std::span<const double> u, int n_max, const char* who) {
  if (u.size() < 3) throw ConfigError(std::string(who) + ": need at least 3 samples");
  if (n_max < 1) throw ConfigError(std::string(who) + ": n_max must be >= 1");
  if (2 * static_cast<std::size_t>(n_max) >= u.size())
    throw ConfigError(std::string(who) + ": n_max = " + std::to_string(n_max) + " aliases on " +
                      std::to_string(u.size()) + " grid points (need n_max < points/2)");
  double peak = 0.0;
  for (double v : u) {
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite sample");
    peak = std::max(peak, std::abs(v));
  }
  const double tol = 1e-12 * peak;
  if (std::abs(u.front()) > tol || std::abs(u.back()) > tol)
    throw DomainError(std::string(who) + ": samples must vanish at both endpoints");
}

// 2/(span) * trapezoid( u(s) sin(n pi s / span) ) on s_j = j span/(P-1).
// Endpoint samples are zero, so only interior nodes contribute.
inline std::vector<double> dirichlet_sine_analysis(std::span<const double> u, int n_max) {
  const std::size_t P = u.size();
  const double inv = 1.0 / static_cast<double>(P - 1);
  std::vector<double> out(static_cast<std::size_t>(n_max), 0.0);
  for (int n = 1; n <= n_max; ++n) {
    double acc = 0.0;
    for (std::size_t j = 1; j + 1 < P; ++j) acc += u[j] * std::sin(n * M_PI * static_cast<double>(j) * inv);
    out[static_cast<std::size_t>(n - 1)] = 2.0 * inv * acc;
  }
  return out;
}

}  // namespace detail

/// u_n = 2 int_0^1 u(y) sin(n pi y) dy for samples on y_j = j/(P-1).
inline std::vector<double> sine_coeffs(std::span<const double> samples, int n_max) {
  detail::check_samples(samples, n_max, "sine_coeffs");
  return detail::dirichlet_sine_analysis(samples, n_max);
}

inline double sine_reconstruct(std::span<const double> coeffs, double y) {
  double s = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) s += coeffs[n] * std::sin(static_cast<double>(n + 1) * M_PI * y);
  return s;
}

/// u_n = (2/(theta2-theta1)) int u(theta) Phi_n(theta) dtheta on a uniform grid
/// spanning [theta1, theta2] with both endpoints included.
inline std::vector<double> angular_coeffs(std::span<const double> samples, const AngularBasis& basis) {
  basis.validate();
  detail::check_samples(samples, basis.n_max, "angular_coeffs");
  // With the substitution s = (theta - theta1)/span the integral is the unit sine analysis.
  return detail::dirichlet_sine_analysis(samples, basis.n_max);
}

inline double angular_reconstruct(std::span<const double> coeffs, const AngularBasis& basis, double theta) {
  double s = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) s += coeffs[n] * basis.phi(static_cast<int>(n + 1), theta);
  return s;
}

/// Sine coefficients of every column of `interior`, a (points x ny) array of
/// interior values along y with implied zero endpoints.
inline ModalSeries sine_series_by_column(const Eigen::MatrixXd& interior_by_row, int n_max) {
  // interior_by_row(i, j): grid index i along the transverse axis, j along y (interior only)
  const Eigen::Index ny = interior_by_row.cols();
  std::vector<double> column(static_cast<std::size_t>(ny + 2), 0.0);
  ModalSeries out;
  out.n_max = n_max;
  out.coeffs.resize(n_max, interior_by_row.rows());
  for (Eigen::Index i = 0; i < interior_by_row.rows(); ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) column[static_cast<std::size_t>(j + 1)] = interior_by_row(i, j);
    const auto c = sine_coeffs(column, n_max);
    for (int n = 0; n < n_max; ++n) out.coeffs(n, i) = c[static_cast<std::size_t>(n)];
  }
  return out;
}

}  // namespace pdebs::modal
