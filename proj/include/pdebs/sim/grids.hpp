#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/errors.hpp"

namespace pdebs::sim {

/// Which side of a rectangle carries the boundary control.
enum class Edge { east, north };

/// Interior nodes of [0, extent]^2; node (i, j) sits at ((i+1) hx, (j+1) hy).
struct RectGrid {
  int nx = 64;
  int ny = 64;
  double extent = 1.0;
  Edge controlled = Edge::east;

  RectGrid() = default;
  RectGrid(int nx_, int ny_, double L = 1.0, Edge e = Edge::east) : nx(nx_), ny(ny_), extent(L), controlled(e) {
    validate();
  }

  [[nodiscard]] double hx() const { return extent / (nx + 1); }
  [[nodiscard]] double hy() const { return extent / (ny + 1); }
  [[nodiscard]] double x(int i) const { return (i + 1) * hx(); }
  [[nodiscard]] double y(int j) const { return (j + 1) * hy(); }

  /// Interior count along the direction normal to the controlled edge.
  [[nodiscard]] int normal_count() const { return controlled == Edge::east ? nx : ny; }
  /// Interior count along the controlled edge.
  [[nodiscard]] int edge_count() const { return controlled == Edge::east ? ny : nx; }
  [[nodiscard]] double normal_spacing() const { return controlled == Edge::east ? hx() : hy(); }
  [[nodiscard]] double edge_spacing() const { return controlled == Edge::east ? hy() : hx(); }

  /// Node coordinates 0, h, ..., extent along the normal direction (boundaries included).
  [[nodiscard]] std::vector<double> normal_abscissae() const {
    const int n = normal_count() + 2;
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = i * normal_spacing();
    a.back() = extent;
    return a;
  }

  void validate() const {
    if (nx < 8 || ny < 8) throw ConfigError("RectGrid: nx and ny must be >= 8");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("RectGrid: extent must be > 0");
  }

  bool operator==(const RectGrid&) const = default;
};

/// Staggered polar grid: r_j = (j + 1/2) dr, theta_l = theta1 + (l + 1) dtheta.
struct PolarGrid {
  int nr = 64;
  int ntheta = 48;
  double R = 1.0;
  double theta1 = 0.0;
  double theta2 = M_PI / 2.0;

  PolarGrid() = default;
  PolarGrid(int nr_, int nth, double R_, double t1, double t2) : nr(nr_), ntheta(nth), R(R_), theta1(t1), theta2(t2) {
    validate();
  }

  [[nodiscard]] double dr() const { return R / nr; }
  [[nodiscard]] double dtheta() const { return (theta2 - theta1) / (ntheta + 1); }
  [[nodiscard]] double r(int j) const { return (j + 0.5) * dr(); }
  [[nodiscard]] double theta(int l) const { return theta1 + (l + 1) * dtheta(); }
  [[nodiscard]] double span() const { return theta2 - theta1; }

  [[nodiscard]] std::vector<double> radial_centres() const {
    std::vector<double> a(static_cast<std::size_t>(nr));
    for (int j = 0; j < nr; ++j) a[static_cast<std::size_t>(j)] = r(j);
    return a;
  }

  void validate() const {
    if (nr < 8 || ntheta < 8) throw ConfigError("PolarGrid: nr and ntheta must be >= 8");
    if (!(R > 0.0)) throw ConfigError("PolarGrid: R must be > 0");
    if (!(theta2 > theta1) || theta2 - theta1 > 2.0 * M_PI + 1e-12)
      throw ConfigError("PolarGrid: need 0 < theta2 - theta1 <= 2 pi");
  }

  bool operator==(const PolarGrid&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Crossing of the domain boundary between a node inside the mask and a
/// 4-neighbour outside it.
struct InterfaceCrossing {
  int i = 0, j = 0;    // inside node
  int di = 0, dj = 0;  // unit step towards the outside neighbour
  double fraction = 0; // crossing at inside + fraction * h * (di, dj), 0 < fraction <= 1
  Point at;            // crossing point
  double s = 0;        // arclength along the cut, from its start vertex
};

/// Rectangular grid with per-node membership in a polygonal physical domain.
/// Nodes outside the polygon belong to the extension region.
struct MaskedGrid {
  RectGrid parent;
  std::vector<Point> polygon;           // physical domain, counter-clockwise
  Point cut_from, cut_to;               // the interface segment
  std::vector<std::uint8_t> inside;     // index i + nx * j
  std::vector<int> interface_nodes;     // inside nodes with an outside 4-neighbour
  std::vector<InterfaceCrossing> crossings;  // sorted by s

  [[nodiscard]] bool in_domain(int i, int j) const {
    return inside[static_cast<std::size_t>(i + parent.nx * j)] != 0;
  }
  [[nodiscard]] std::size_t inside_count() const {
    std::size_t n = 0;
    for (auto v : inside) n += v;
    return n;
  }
};

/// Even-odd ray test; points on the boundary count as inside.
inline bool point_in_polygon(const std::vector<Point>& poly, Point p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
    const Point& A = poly[a];
    const Point& B = poly[b];
    // on-segment check
    const double cross = (B.x - A.x) * (p.y - A.y) - (B.y - A.y) * (p.x - A.x);
    if (std::abs(cross) < 1e-13 && p.x >= std::min(A.x, B.x) - 1e-13 && p.x <= std::max(A.x, B.x) + 1e-13 &&
        p.y >= std::min(A.y, B.y) - 1e-13 && p.y <= std::max(A.y, B.y) + 1e-13)
      return true;
    if ((A.y > p.y) != (B.y > p.y)) {
      const double xint = A.x + (p.y - A.y) * (B.x - A.x) / (B.y - A.y);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

/// Builds the mask for `polygon` on `parent` and locates where grid lines leave
/// the domain through the segment cut_from -> cut_to.
inline MaskedGrid make_masked_grid(const RectGrid& parent, std::vector<Point> polygon, Point cut_from, Point cut_to) {
  parent.validate();
  MaskedGrid g;
  g.parent = parent;
  g.polygon = std::move(polygon);
  g.cut_from = cut_from;
  g.cut_to = cut_to;
  const int nx = parent.nx, ny = parent.ny;
  g.inside.assign(static_cast<std::size_t>(nx * ny), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      g.inside[static_cast<std::size_t>(i + nx * j)] = point_in_polygon(g.polygon, {parent.x(i), parent.y(j)}) ? 1 : 0;

  const double cx = cut_to.x - cut_from.x, cy = cut_to.y - cut_from.y;
  const double cut_len = std::hypot(cx, cy);
  const int steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!g.in_domain(i, j)) continue;
      bool on_interface = false;
      for (const auto& st : steps) {
        const int ii = i + st[0], jj = j + st[1];
        const Point P{parent.x(i), parent.y(j)};
        const Point Q{(ii + 1) * parent.hx(), (jj + 1) * parent.hy()};
        const bool q_inside = (ii >= 0 && ii < nx && jj >= 0 && jj < ny) ? g.in_domain(ii, jj)
                                                                         : point_in_polygon(g.polygon, Q);
        if (q_inside) continue;
        // segment P->Q against the cut
        const double dx = Q.x - P.x, dy = Q.y - P.y;
        const double denom = dx * cy - dy * cx;
        if (std::abs(denom) < 1e-15) continue;
        const double t = ((cut_from.x - P.x) * cy - (cut_from.y - P.y) * cx) / denom;
        const double u = ((cut_from.x - P.x) * dy - (cut_from.y - P.y) * dx) / denom;
        if (t <= 0.0 || t > 1.0 + 1e-12 || u < -1e-12 || u > 1.0 + 1e-12) continue;
        InterfaceCrossing c;
        c.i = i;
        c.j = j;
        c.di = st[0];
        c.dj = st[1];
        c.fraction = std::min(t, 1.0);
        c.at = {P.x + c.fraction * dx, P.y + c.fraction * dy};
        c.s = std::clamp(u, 0.0, 1.0) * cut_len;
        g.crossings.push_back(c);
        on_interface = true;
      }
      if (on_interface) g.interface_nodes.push_back(i + nx * j);
    }
  }
  std::sort(g.crossings.begin(), g.crossings.end(),
            [](const InterfaceCrossing& a, const InterfaceCrossing& b) { return a.s < b.s; });
  return g;
}

/// Piano-shaped domain: [0, L]^2 minus the upper-left triangle cut by the
/// segment (0, L/2) -> (L/2, L). Control acts on the top edge.
inline MaskedGrid piano_grid(int n, double L = 1.0) {
  const RectGrid parent(n, n, L, Edge::north);
  std::vector<Point> poly{{0, 0}, {L, 0}, {L, L}, {0.5 * L, L}, {0, 0.5 * L}};
  return make_masked_grid(parent, std::move(poly), {0, 0.5 * L}, {0.5 * L, L});
}

/// Degenerate mask: every node belongs to the physical domain.
inline MaskedGrid full_mask(const RectGrid& parent) {
  const double L = parent.extent;
  std::vector<Point> poly{{0, 0}, {L, 0}, {L, L}, {0, L}};
  return make_masked_grid(parent, std::move(poly), {0, L}, {0, L});
}

/// Discretized u(t, x, y) at interior nodes plus the held controlled-edge profile.
struct Field2D {
  RectGrid grid;
  Eigen::MatrixXd values;  // (nx, ny)
  Eigen::VectorXd edge;    // controlled-edge values currently applied
  double time = 0.0;

  Field2D() = default;
  explicit Field2D(const RectGrid& g)
      : grid(g), values(Eigen::MatrixXd::Zero(g.nx, g.ny)), edge(Eigen::VectorXd::Zero(g.edge_count())) {}
};

/// u(t, r, theta) on a PolarGrid plus the held outer-radius profile U(theta_l).
struct PolarField {
  PolarGrid grid;
  Eigen::MatrixXd values;  // (nr, ntheta)
  Eigen::VectorXd edge;    // (ntheta)
  double time = 0.0;

  PolarField() = default;
  explicit PolarField(const PolarGrid& g)
      : grid(g), values(Eigen::MatrixXd::Zero(g.nr, g.ntheta)), edge(Eigen::VectorXd::Zero(g.ntheta)) {}
};

/// One member of a modal/wavenumber ensemble on a 1-D line.
///
/// `values` are the interior nodes; `boundary` is the held value at the
/// controlled end (y = 1 or r = R). `key` is the wavenumber k (strip) or the
/// angular eigenvalue alpha_n (sector).
template <class T>
struct ModeState {
  Eigen::Matrix<T, Eigen::Dynamic, 1> values;
  T boundary{};
  double key = 0.0;
  double extent = 1.0;  // line length: 1 for the strip, R for a sector radius
  double time = 0.0;
};

using StripMode = ModeState<std::complex<double>>;
using RadialMode = ModeState<double>;

/// Time-stamped norms; h1 is empty when not recorded.
struct NormSeries {
  std::vector<double> t;
  std::vector<double> l2;
  std::vector<double> h1;

  void push(double time, double l2v, double h1v = -1.0) {
    if (!t.empty() && !(time > t.back())) throw NumericalError("NormSeries: times must be strictly increasing");
    if (!(l2v >= 0.0) || !std::isfinite(l2v)) throw NumericalError("NormSeries: invalid L2 value");
    t.push_back(time);
    l2.push_back(l2v);
    if (h1v >= 0.0) h1.push_back(h1v);
  }
  [[nodiscard]] bool has_h1() const { return !h1.empty() && h1.size() == t.size(); }
  [[nodiscard]] std::size_t size() const { return t.size(); }
};

}  // namespace pdebs::sim
