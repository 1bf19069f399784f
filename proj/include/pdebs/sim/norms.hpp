#pragma once

// Discrete L2 / H1 norms. Rectangular fields use the trapezoid rule on the
// node grid including the boundary, where only the held controlled-edge
// values are nonzero. Polar fields use cell centres weighted by r.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pdebs/errors.hpp"
#include "pdebs/sim/grids.hpp"

namespace pdebs::sim {

/// Interior values plus the boundary ring; (nx+2) x (ny+2).
inline Eigen::MatrixXd padded(const Field2D& f) {
  const RectGrid& g = f.grid;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(g.nx + 2, g.ny + 2);
  P.block(1, 1, g.nx, g.ny) = f.values;
  if (f.edge.size() == g.edge_count()) {
    if (g.controlled == Edge::east)
      P.block(g.nx + 1, 1, 1, g.ny) = f.edge.transpose();
    else
      P.block(1, g.ny + 1, g.nx, 1) = f.edge;
  }
  return P;
}

namespace detail {

inline double trapezoid_sq(const Eigen::MatrixXd& P, double hx, double hy) {
  double s = 0.0;
  const Eigen::Index nx = P.rows(), ny = P.cols();
  for (Eigen::Index j = 0; j < ny; ++j) {
    const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    for (Eigen::Index i = 0; i < nx; ++i) {
      const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      s += wx * wy * P(i, j) * P(i, j);
    }
  }
  return s * hx * hy;
}

// Face differences: each x-face (i, i+1) at row j carries weight hx*hy
// (halved on the boundary rows), and likewise for y-faces.
inline double gradient_sq(const Eigen::MatrixXd& P, double hx, double hy) {
  const Eigen::Index nx = P.rows(), ny = P.cols();
  double s = 0.0;
  for (Eigen::Index j = 0; j < ny; ++j) {
    const double w = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    for (Eigen::Index i = 0; i + 1 < nx; ++i) {
      const double d = (P(i + 1, j) - P(i, j)) / hx;
      s += w * d * d;
    }
  }
  for (Eigen::Index i = 0; i < nx; ++i) {
    const double w = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
    for (Eigen::Index j = 0; j + 1 < ny; ++j) {
      const double d = (P(i, j + 1) - P(i, j)) / hy;
      s += w * d * d;
    }
  }
  return s * hx * hy;
}

}  // namespace detail

inline double l2_norm(const Field2D& f) {
  return std::sqrt(detail::trapezoid_sq(padded(f), f.grid.hx(), f.grid.hy()));
}

/// |grad u|_{L2}.
inline double h1_seminorm(const Field2D& f) {
  return std::sqrt(detail::gradient_sq(padded(f), f.grid.hx(), f.grid.hy()));
}

/// (|u|^2 + |grad u|^2)^{1/2}.
inline double h1_norm(const Field2D& f) {
  const Eigen::MatrixXd P = padded(f);
  const double hx = f.grid.hx(), hy = f.grid.hy();
  return std::sqrt(detail::trapezoid_sq(P, hx, hy) + detail::gradient_sq(P, hx, hy));
}

/// L2 over the physical-domain nodes of a masked grid only.
inline double l2_norm(const Field2D& f, const MaskedGrid& mg) {
  if (!(f.grid == mg.parent)) throw ConfigError("l2_norm: field grid is not the masked grid's parent");
  double s = 0.0;
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i)
      if (mg.in_domain(i, j)) s += f.values(i, j) * f.values(i, j);
  return std::sqrt(s * f.grid.hx() * f.grid.hy());
}

/// L2 with area element r dr dtheta over the cell centres.
inline double l2_norm(const PolarField& f) {
  const PolarGrid& g = f.grid;
  double s = 0.0;
  for (int j = 0; j < g.nr; ++j) s += g.r(j) * f.values.row(j).squaredNorm();
  return std::sqrt(s * g.dr() * g.dtheta());
}

/// L2 of one line state: interior nodes on a uniform grid of n+1 cells over
/// [0, extent], the held end value with half weight.
template <class T>
double l2_norm(const ModeState<T>& m) {
  const auto n = m.values.size();
  const double h = m.extent / static_cast<double>(n + 1);
  const double s = m.values.squaredNorm() + 0.5 * std::norm(m.boundary);
  return std::sqrt(s * h);
}

/// Radial line on staggered centres, weighted by r.
inline double l2_norm_radial(const RadialMode& m) {
  const auto n = m.values.size();
  const double dr = m.extent / static_cast<double>(n);
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) s += (static_cast<double>(j) + 0.5) * dr * m.values(j) * m.values(j);
  return std::sqrt(s * dr);
}

/// Trapezoid weights for a sorted, uniformly or non-uniformly spaced sample set.
inline std::vector<double> trapezoid_weights(std::span<const double> x) {
  std::vector<double> w(x.size(), 0.0);
  if (x.size() < 2) {
    if (!w.empty()) w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = x[i + 1] - x[i];
    w[i] += 0.5 * d;
    w[i + 1] += 0.5 * d;
  }
  return w;
}

/// Ensemble L2: (sum_k w_k |u_k|^2)^{1/2} with trapezoid weights in k.
inline double l2_norm(std::span<const StripMode> ensemble) {
  std::vector<double> ks;
  ks.reserve(ensemble.size());
  for (const auto& m : ensemble) ks.push_back(m.key);
  const auto w = trapezoid_weights(ks);
  double s = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const double v = l2_norm(ensemble[i]);
    s += w[i] * v * v;
  }
  return std::sqrt(s);
}

}  // namespace pdebs::sim
