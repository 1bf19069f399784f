#pragma once

// Crank-Nicolson time steppers.
//
// Rectangles and sectors have homogeneous Dirichlet data along the direction
// tangential to the controlled edge, so the discrete 5-point operator is
// diagonalised exactly by a discrete sine transform in that direction. Each
// step transforms, runs one tridiagonal CN solve per tangential mode along the
// normal direction, and transforms back. This is the same linear system a
// sparse factorisation of the assembled 2-D CN matrix would solve.
//
// The controlled-edge value is held over the step (zero-order hold), so it
// enters the CN right-hand side with the same value at both time levels.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/sim/grids.hpp"
#include "pdebs/sim/line_solver.hpp"

namespace pdebs::sim {

namespace detail {

/// S(l, m) = sin((l+1)(m+1) pi / (n+1)); S S = (n+1)/2 I.
inline Eigen::MatrixXd sine_transform_matrix(int n) {
  Eigen::MatrixXd S(n, n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) S(l, m) = std::sin(static_cast<double>((l + 1) * (m + 1)) * M_PI / (n + 1));
  return S;
}

/// Eigenvalue of -(second difference) for sine mode m (1-based) on n interior nodes of spacing h.
inline double second_difference_eigenvalue(int m, int n, double h) {
  const double s = std::sin(m * M_PI / (2.0 * (n + 1)));
  return 4.0 * s * s / (h * h);
}

inline void require_finite(const Eigen::MatrixXd& v, const char* who) {
  if (!v.allFinite()) throw NumericalError(std::string(who) + ": non-finite state after step");
}

}  // namespace detail

/// Crank-Nicolson stepper for u_t = epsilon Lap(u) + lambda u on a RectGrid.
class RectStepper {
public:
  RectStepper(const RectGrid& grid, const PlantParams& p, double dt) : grid_(grid), dt_(dt) {
    grid.validate();
    p.validate();
    if (!(dt > 0.0)) throw ConfigError("RectStepper: dt must be > 0");
    const int nt = grid.edge_count();
    const int nn = grid.normal_count();
    S_ = detail::sine_transform_matrix(nt);
    scale_ = 2.0 / (nt + 1);
    lines_.reserve(static_cast<std::size_t>(nt));
    for (int m = 1; m <= nt; ++m) {
      const double q = detail::second_difference_eigenvalue(m, nt, grid.edge_spacing());
      lines_.emplace_back(cartesian_line(static_cast<std::size_t>(nn), grid.normal_spacing(), p.epsilon, q, p.lambda), dt);
    }
  }

  [[nodiscard]] const RectGrid& grid() const { return grid_; }
  [[nodiscard]] double dt() const { return dt_; }

  /// Advances `f` by dt with the controlled edge held at `profile`.
  void step(Field2D& f, std::span<const double> profile) const {
    if (!(f.grid == grid_)) throw ConfigError("RectStepper: field grid does not match stepper grid");
    const int nt = grid_.edge_count();
    if (profile.size() != static_cast<std::size_t>(nt))
      throw ConfigError("RectStepper: boundary profile has " + std::to_string(profile.size()) + " values, edge has " +
                        std::to_string(nt));
    const Eigen::Map<const Eigen::VectorXd> prof(profile.data(), nt);

    // normal-major layout: rows along the normal, columns along the edge
    if (grid_.controlled == Edge::east)
      modal_.noalias() = f.values * S_;
    else
      modal_.noalias() = f.values.transpose() * S_;
    modal_ *= scale_;
    bmodal_.noalias() = scale_ * (S_ * prof);

    const auto nn = static_cast<std::size_t>(grid_.normal_count());
    for (int m = 0; m < nt; ++m) {
      double* col = modal_.col(m).data();
      lines_[static_cast<std::size_t>(m)].step<double>(std::span<const double>(col, nn), bmodal_(m), bmodal_(m),
                                                       std::span<double>(col, nn));
    }

    if (grid_.controlled == Edge::east)
      f.values.noalias() = modal_ * S_;
    else
      f.values.noalias() = (modal_ * S_).transpose();
    f.edge = prof;
    f.time += dt_;
    detail::require_finite(f.values, "step_rect");
  }

private:
  RectGrid grid_;
  double dt_;
  Eigen::MatrixXd S_;
  double scale_ = 1.0;
  std::vector<LineCN> lines_;
  // work space; a stepper is owned by one run and not shared across threads
  mutable Eigen::MatrixXd modal_;
  mutable Eigen::VectorXd bmodal_;
};

/// One CN step of the rectangle; builds a stepper per call (use RectStepper in loops).
inline Field2D step_rect(const Field2D& state, const PlantParams& p, std::span<const double> boundary_profile, double dt) {
  RectStepper stepper(state.grid, p, dt);
  Field2D next = state;
  stepper.step(next, boundary_profile);
  return next;
}

/// Same stencil as step_rect over the full extended square; the mask only matters
/// for diagnostics and restricted norms.
inline Field2D step_masked(const Field2D& state, const MaskedGrid& mg, const PlantParams& p,
                           std::span<const double> boundary_profile, double dt) {
  if (!(state.grid == mg.parent)) throw ConfigError("step_masked: field grid is not the masked grid's parent");
  return step_rect(state, p, boundary_profile, dt);
}

/// Per-wavenumber strip line: u_t = epsilon (u_yy - 4 pi^2 k^2 u) + lambda u,
/// u(0) = 0, u(1) = control.
inline LineCN strip_line(std::size_t n, const PlantParams& p, double k, double dt) {
  const double h = 1.0 / static_cast<double>(n + 1);
  return LineCN(cartesian_line(n, h, p.epsilon, 4.0 * M_PI * M_PI * k * k, p.lambda), dt);
}

inline StripMode step_mode_strip(const StripMode& state, const PlantParams& p, double k, std::complex<double> control,
                                 double dt) {
  p.validate();
  if (!(dt > 0.0)) throw ConfigError("step_mode_strip: dt must be > 0");
  const auto n = static_cast<std::size_t>(state.values.size());
  if (n < 3) throw ConfigError("step_mode_strip: need at least 3 interior nodes");
  const LineCN line = strip_line(n, p, k, dt);
  StripMode next = state;
  line.step<std::complex<double>>(std::span<const std::complex<double>>(state.values.data(), n), control, control,
                                  std::span<std::complex<double>>(next.values.data(), n));
  next.boundary = control;
  next.key = k;
  next.time = state.time + dt;
  if (!next.values.allFinite()) throw NumericalError("step_mode_strip: non-finite state after step");
  return next;
}

/// Radial line for one angular mode: epsilon ((1/r)(r u_r)_r - alpha^2 u/r^2) + lambda u.
inline LineCN sector_line(std::size_t nr, double R, const PlantParams& p, double alpha, double dt) {
  return LineCN(radial_line(nr, R, p.epsilon, alpha * alpha, p.lambda), dt);
}

inline RadialMode step_mode_sector(const RadialMode& state, const PlantParams& p, double alpha_n, double control,
                                   double dt) {
  p.validate();
  if (!(alpha_n >= 0.0)) throw DomainError("step_mode_sector: alpha_n must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("step_mode_sector: dt must be > 0");
  if (!(state.extent > 0.0)) throw ConfigError("step_mode_sector: radius must be > 0");
  const auto n = static_cast<std::size_t>(state.values.size());
  if (n < 3) throw ConfigError("step_mode_sector: need at least 3 radial cells");
  const LineCN line = sector_line(n, state.extent, p, alpha_n, dt);
  RadialMode next = state;
  line.step<double>(std::span<const double>(state.values.data(), n), control, control,
                    std::span<double>(next.values.data(), n));
  next.boundary = control;
  next.key = alpha_n;
  next.time = state.time + dt;
  if (!next.values.allFinite()) throw NumericalError("step_mode_sector: non-finite state after step");
  return next;
}

/// Crank-Nicolson stepper for the sector in polar coordinates:
/// conservative radial flux form plus the 3-point angular second difference.
class PolarStepper {
public:
  PolarStepper(const PolarGrid& grid, const PlantParams& p, double dt) : grid_(grid), dt_(dt) {
    grid.validate();
    p.validate();
    if (!(dt > 0.0)) throw ConfigError("PolarStepper: dt must be > 0");
    const int nt = grid.ntheta;
    S_ = detail::sine_transform_matrix(nt);
    scale_ = 2.0 / (nt + 1);
    for (int m = 1; m <= nt; ++m) {
      const double alpha2 = detail::second_difference_eigenvalue(m, nt, grid.dtheta());
      lines_.emplace_back(radial_line(static_cast<std::size_t>(grid.nr), grid.R, p.epsilon, alpha2, p.lambda), dt);
    }
  }

  [[nodiscard]] const PolarGrid& grid() const { return grid_; }
  [[nodiscard]] double dt() const { return dt_; }

  void step(PolarField& f, std::span<const double> profile) const {
    if (!(f.grid == grid_)) throw ConfigError("PolarStepper: field grid does not match stepper grid");
    const int nt = grid_.ntheta;
    if (profile.size() != static_cast<std::size_t>(nt))
      throw ConfigError("PolarStepper: boundary profile size does not match ntheta");
    const Eigen::Map<const Eigen::VectorXd> prof(profile.data(), nt);
    modal_.noalias() = scale_ * (f.values * S_);
    bmodal_.noalias() = scale_ * (S_ * prof);
    const auto nr = static_cast<std::size_t>(grid_.nr);
    for (int m = 0; m < nt; ++m) {
      double* col = modal_.col(m).data();
      lines_[static_cast<std::size_t>(m)].step<double>(std::span<const double>(col, nr), bmodal_(m), bmodal_(m),
                                                       std::span<double>(col, nr));
    }
    f.values.noalias() = modal_ * S_;
    f.edge = prof;
    f.time += dt_;
    detail::require_finite(f.values, "step_polar");
  }

private:
  PolarGrid grid_;
  double dt_;
  Eigen::MatrixXd S_;
  double scale_ = 1.0;
  std::vector<LineCN> lines_;
  // work space; a stepper is owned by one run and not shared across threads
  mutable Eigen::MatrixXd modal_;
  mutable Eigen::VectorXd bmodal_;
};

}  // namespace pdebs::sim
