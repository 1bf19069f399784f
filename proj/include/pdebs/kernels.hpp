#pragma once

// Closed-form backstepping kernels.
//
// Sign convention: the minus sign is part of the kernel, so K(x,x) = -lambda0 x / 2
// holds literally and every boundary law reads U = \int K(1, xi) u(xi) dxi.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/errors.hpp"
#include "pdebs/specfun.hpp"

namespace pdebs {

/// Plant u_t = epsilon * Laplacian(u) + lambda * u with requested decay rate c.
struct PlantParams {
  double epsilon = 1.0;
  double lambda = 0.0;
  double c = 1.0;

  PlantParams() = default;
  PlantParams(double eps, double lam, double decay) : epsilon(eps), lambda(lam), c(decay) { validate(); }

  [[nodiscard]] double lambda0() const { return (lambda + c) / epsilon; }

  void validate() const {
    if (!std::isfinite(epsilon) || !std::isfinite(lambda) || !std::isfinite(c))
      throw DomainError("PlantParams: non-finite value");
    if (!(epsilon > 0.0)) throw DomainError("PlantParams: epsilon must be > 0");
    if (!(c > 0.0)) throw DomainError("PlantParams: c must be > 0");
  }
};

namespace kernels {

namespace detail {

inline double checked_lambda0(const PlantParams& p) {
  const double l0 = p.lambda0();
  if (!(l0 >= 0.0)) throw DomainError("kernel: lambda0 = (lambda + c)/epsilon must be >= 0");
  return l0;
}

// lambda0 * I1(z)/z with z = sqrt(lambda0 (a^2 - b^2)); the common Bessel factor.
inline double bessel_factor(double l0, double a, double b) {
  const double d = std::max(0.0, a * a - b * b);
  return l0 * specfun::i1_ratio(std::sqrt(l0 * d));
}

}  // namespace detail

/// K(x, xi) = -lambda0 xi I1(z)/z, z = sqrt(lambda0 (x^2 - xi^2)), for 0 <= xi <= x.
inline double kernel_1d(const PlantParams& p, double x, double xi) {
  const double l0 = detail::checked_lambda0(p);
  if (!(xi >= 0.0) || !(x >= 0.0)) throw DomainError("kernel_1d: arguments must be >= 0");
  if (xi > x) throw DomainError("kernel_1d: requires xi <= x");
  return -xi * detail::bessel_factor(l0, x, xi);
}

/// h(eta) = lambda0 eta I1(z)/z with z = sqrt(lambda0 (1 - eta^2)); note h = -K(1, eta).
inline double strip_gain(const PlantParams& p, double eta) {
  const double l0 = detail::checked_lambda0(p);
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("strip_gain: eta must lie in [0, 1]");
  return eta * detail::bessel_factor(l0, 1.0, eta);
}

/// Truncated strip kernel 2N h(eta) sinc(2 pi N (x - xi)). The law applies the leading minus.
inline double kernel_strip_truncated(const PlantParams& p, int N, double x, double xi, double eta) {
  if (N < 1) throw DomainError("kernel_strip_truncated: N must be >= 1");
  if (!std::isfinite(x) || !std::isfinite(xi)) throw DomainError("kernel_strip_truncated: non-finite x/xi");
  return 2.0 * N * strip_gain(p, eta) * specfun::sinc(2.0 * M_PI * N * (x - xi));
}

/// Sector kernel k_n(r, rho) = -lambda0 rho (rho/r)^alpha_n I1(z)/z, z = sqrt(lambda0 (r^2 - rho^2)).
inline double kernel_sector(const PlantParams& p, double alpha_n, double r, double rho) {
  const double l0 = detail::checked_lambda0(p);
  if (!(alpha_n >= 0.0)) throw DomainError("kernel_sector: alpha_n must be >= 0");
  if (!(r > 0.0)) throw DomainError("kernel_sector: r must be > 0");
  if (!(rho >= 0.0)) throw DomainError("kernel_sector: rho must be >= 0");
  if (rho > r) throw DomainError("kernel_sector: requires rho <= r");
  const double geometric = alpha_n == 0.0 ? 1.0 : std::pow(rho / r, alpha_n);
  return -rho * geometric * detail::bessel_factor(l0, r, rho);
}

/// Max |K_xx - K_xixi - lambda0 K| over the triangular grid of spacing h, using
/// second-order central differences at points at least 2h from every edge.
inline double kernel_residual_1d(const PlantParams& p, double h) {
  const double l0 = detail::checked_lambda0(p);
  if (!(h > 0.0) || h > 1.0 / 32.0) throw DomainError("kernel_residual_1d: grid too coarse (need h <= 1/32)");
  const double cells = std::round(1.0 / h);
  if (std::abs(cells * h - 1.0) > 1e-12) throw DomainError("kernel_residual_1d: h must divide 1");
  const auto n = static_cast<Eigen::Index>(cells);

  // K on the lower triangle j <= i of an (n+1)^2 grid.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i <= n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = kernel_1d(p, static_cast<double>(i) * h, static_cast<double>(j) * h);

  const double inv_h2 = 1.0 / (h * h);
  double worst = 0.0;
  for (Eigen::Index i = 4; i <= n - 2; ++i) {
    for (Eigen::Index j = 2; j <= i - 2; ++j) {
      const double kxx = (K(i + 1, j) - 2.0 * K(i, j) + K(i - 1, j)) * inv_h2;
      const double kee = (K(i, j + 1) - 2.0 * K(i, j) + K(i, j - 1)) * inv_h2;
      worst = std::max(worst, std::abs(kxx - kee - l0 * K(i, j)));
    }
  }
  return worst;
}

/// Which outer-boundary kernel row a table holds.
struct KernelGeometry {
  enum class Kind { square, strip, sector };
  Kind kind = Kind::square;
  double extent = 1.0;   // L for square, 1 for strip, R for sector
  double alpha = 0.0;    // sector angular eigenvalue alpha_n
  int mode = 0;          // sector mode index n, informational

  static KernelGeometry square(double L = 1.0) { return {Kind::square, L, 0.0, 0}; }
  static KernelGeometry strip() { return {Kind::strip, 1.0, 0.0, 0}; }
  static KernelGeometry sector(double R, double alpha_n, int n) { return {Kind::sector, R, alpha_n, n}; }
};

inline const char* to_string(KernelGeometry::Kind k) {
  switch (k) {
    case KernelGeometry::Kind::square: return "square";
    case KernelGeometry::Kind::strip: return "strip";
    case KernelGeometry::Kind::sector: return "sector";
  }
  return "?";
}

/// Precomputed gain row g(xi) with quadrature weights, so that U = sum_i w_i g_i u_i.
///
/// Square and strip tables are sampled on the node-aligned grid xi_i = i L/(n-1)
/// (trapezoid rule, both endpoints included). Sector tables are sampled at the
/// staggered radial cell centres (j + 1/2) dr (midpoint rule).
/// For the strip the stored row is -h(eta), i.e. the paper's leading minus is
/// already applied.
struct KernelTable {
  KernelGeometry geometry;
  std::vector<double> abscissae;
  std::vector<double> values;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return abscissae.size(); }
  [[nodiscard]] bool node_aligned() const { return geometry.kind != KernelGeometry::Kind::sector; }

  /// Throws ConfigError unless the table matches `expected` abscissae to 1e-12 relative.
  void require_aligned(const std::vector<double>& expected, const char* who) const {
    if (expected.size() != abscissae.size())
      throw ConfigError(std::string(who) + ": kernel table has " + std::to_string(abscissae.size()) +
                        " samples but the grid has " + std::to_string(expected.size()));
    const double scale = std::max(1.0, geometry.extent);
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (std::abs(expected[i] - abscissae[i]) > 1e-12 * scale)
        throw ConfigError(std::string(who) + ": kernel table abscissae do not match the simulation grid");
  }
};

inline KernelTable build_kernel_table(const PlantParams& p, const KernelGeometry& g, int n_samples) {
  if (n_samples < 16) throw ConfigError("build_kernel_table: n_samples must be >= 16");
  if (!(g.extent > 0.0)) throw ConfigError("build_kernel_table: extent must be > 0");
  KernelTable t;
  t.geometry = g;
  const auto n = static_cast<std::size_t>(n_samples);
  t.abscissae.resize(n);
  t.values.resize(n);
  t.weights.resize(n);

  if (g.kind == KernelGeometry::Kind::sector) {
    const double dr = g.extent / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double rho = (static_cast<double>(j) + 0.5) * dr;
      t.abscissae[j] = rho;
      t.values[j] = kernel_sector(p, g.alpha, g.extent, rho);
      t.weights[j] = dr;
    }
    return t;
  }

  if (g.kind == KernelGeometry::Kind::strip && g.extent != 1.0)
    throw ConfigError("build_kernel_table: strip tables live on [0, 1]");
  const double h = g.extent / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    // pin the last abscissa to the extent so the diagonal sample is exact
    const double xi = i + 1 == n ? g.extent : static_cast<double>(i) * h;
    t.abscissae[i] = xi;
    t.values[i] = g.kind == KernelGeometry::Kind::strip ? -strip_gain(p, xi) : kernel_1d(p, g.extent, xi);
    t.weights[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
  }
  return t;
}

}  // namespace kernels
}  // namespace pdebs
