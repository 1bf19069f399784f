#pragma once

// Domain extension support: reading the Dirichlet trace of the extended
// solution on the physical/extension interface, and a standalone solver on the
// physical domain alone that is driven by such a trace.

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/sim/grids.hpp"
#include "pdebs/sim/norms.hpp"

namespace pdebs::sim {

/// Extended solution at each interface crossing, by linear interpolation
/// along the grid line between the inside node and its outside neighbour.
/// Ordered like mg.crossings (by arclength s).
inline Eigen::VectorXd interface_trace(const Field2D& f, const MaskedGrid& mg) {
  if (!(f.grid == mg.parent)) throw ConfigError("interface_trace: field grid is not the masked grid's parent");
  const Eigen::MatrixXd P = padded(f);
  Eigen::VectorXd out(static_cast<Eigen::Index>(mg.crossings.size()));
  for (std::size_t c = 0; c < mg.crossings.size(); ++c) {
    const auto& x = mg.crossings[c];
    const double a = P(x.i + 1, x.j + 1);
    const double b = P(x.i + 1 + x.di, x.j + 1 + x.dj);
    out(static_cast<Eigen::Index>(c)) = (1.0 - x.fraction) * a + x.fraction * b;
  }
  return out;
}

/// Crank-Nicolson on the physical domain only. Nodes next to the cut use the
/// Shortley-Weller unequal-arm stencil with the crossing as the boundary
/// point; the boundary data are (trace at the crossings, controlled-edge
/// profile), held over each step.
class OmegaReplay {
public:
  OmegaReplay(const MaskedGrid& mg, const PlantParams& p, double dt) : mg_(mg), dt_(dt) {
    p.validate();
    if (!(dt > 0.0)) throw ConfigError("OmegaReplay: dt must be > 0");
    const RectGrid& g = mg.parent;
    const int nx = g.nx, ny = g.ny;
    index_.assign(static_cast<std::size_t>(nx * ny), -1);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (mg.in_domain(i, j)) {
          index_[static_cast<std::size_t>(i + nx * j)] = static_cast<int>(nodes_.size());
          nodes_.push_back({i, j});
        }
    std::map<std::tuple<int, int, int, int>, int> crossing_at;
    for (std::size_t c = 0; c < mg.crossings.size(); ++c) {
      const auto& x = mg.crossings[c];
      crossing_at[{x.i, x.j, x.di, x.dj}] = static_cast<int>(c);
    }

    const auto n = static_cast<Eigen::Index>(nodes_.size());
    const auto nc = static_cast<Eigen::Index>(mg.crossings.size());
    const Eigen::Index edge_offset = nc;
    const Eigen::Index data_size = nc + g.edge_count();
    std::vector<Eigen::Triplet<double>> a_trip, b_trip;

    for (Eigen::Index k = 0; k < n; ++k) {
      const auto [i, j] = nodes_[static_cast<std::size_t>(k)];
      double diag = p.lambda;
      for (int axis = 0; axis < 2; ++axis) {
        const double h = axis == 0 ? g.hx() : g.hy();
        struct Arm {
          double len;
          Eigen::Index unknown;  // -1 if boundary
          Eigen::Index data;     // -1 if homogeneous
        } arms[2];
        for (int side = 0; side < 2; ++side) {
          const int d = side == 0 ? -1 : 1;
          const int di = axis == 0 ? d : 0, dj = axis == 1 ? d : 0;
          const int ii = i + di, jj = j + dj;
          Arm arm{h, -1, -1};
          if (auto it = crossing_at.find({i, j, di, dj}); it != crossing_at.end()) {
            arm.len = mg.crossings[static_cast<std::size_t>(it->second)].fraction * h;
            arm.data = it->second;
          } else if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) {
            const int u = index_[static_cast<std::size_t>(ii + nx * jj)];
            if (u < 0)
              throw ConfigError("OmegaReplay: node (" + std::to_string(i) + "," + std::to_string(j) +
                                ") has an outside neighbour without an interface crossing");
            arm.unknown = u;
          } else if (g.controlled == Edge::north && jj == ny) {
            arm.data = edge_offset + i;
          } else if (g.controlled == Edge::east && ii == nx) {
            arm.data = edge_offset + j;
          }
          arms[side] = arm;
        }
        const double hl = arms[0].len, hr = arms[1].len;
        const double cl = p.epsilon * 2.0 / (hl * (hl + hr));
        const double cr = p.epsilon * 2.0 / (hr * (hl + hr));
        diag -= cl + cr;
        for (int side = 0; side < 2; ++side) {
          const double cf = side == 0 ? cl : cr;
          if (arms[side].unknown >= 0)
            a_trip.emplace_back(k, arms[side].unknown, cf);
          else if (arms[side].data >= 0)
            b_trip.emplace_back(k, arms[side].data, cf);
        }
      }
      a_trip.emplace_back(k, k, diag);
    }

    A_.resize(n, n);
    A_.setFromTriplets(a_trip.begin(), a_trip.end());
    B_.resize(n, data_size);
    B_.setFromTriplets(b_trip.begin(), b_trip.end());
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    explicit_ = I + 0.5 * dt * A_;
    const Eigen::SparseMatrix<double> implicit = I - 0.5 * dt * A_;
    lu_.analyzePattern(implicit);
    lu_.factorize(implicit);
    if (lu_.info() != Eigen::Success) throw NumericalError("OmegaReplay: sparse LU factorization failed");
  }

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(nodes_.size()); }
  [[nodiscard]] const Eigen::SparseMatrix<double>& operator_matrix() const { return A_; }

  /// Values of `f` at the physical-domain nodes, in solver order.
  [[nodiscard]] Eigen::VectorXd restrict(const Field2D& f) const {
    Eigen::VectorXd v(size());
    for (Eigen::Index k = 0; k < size(); ++k) {
      const auto [i, j] = nodes_[static_cast<std::size_t>(k)];
      v(k) = f.values(i, j);
    }
    return v;
  }

  /// One CN step with boundary data held at (trace, edge profile).
  void step(Eigen::VectorXd& u, const Eigen::VectorXd& trace, const Eigen::VectorXd& edge) const {
    step(u, trace, trace, edge);
  }

  /// One CN step with the trace sampled at both time levels (trapezoidal in
  /// time) and the edge profile held.
  void step(Eigen::VectorXd& u, const Eigen::VectorXd& trace_old, const Eigen::VectorXd& trace_new,
            const Eigen::VectorXd& edge) const {
    if (u.size() != size()) throw ConfigError("OmegaReplay: state size mismatch");
    const auto nc = static_cast<Eigen::Index>(mg_.crossings.size());
    if (trace_old.size() != nc || trace_new.size() != nc || edge.size() != mg_.parent.edge_count())
      throw ConfigError("OmegaReplay: boundary data size mismatch");
    Eigen::VectorXd data(nc + edge.size());
    data << 0.5 * (trace_old + trace_new), edge;
    const Eigen::VectorXd rhs = explicit_ * u + dt_ * (B_ * data);
    u = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !u.allFinite()) throw NumericalError("OmegaReplay: solve failed");
  }

  /// Discrete L2 over the physical nodes, same weights as l2_norm(Field2D, MaskedGrid).
  [[nodiscard]] double l2(const Eigen::VectorXd& v) const {
    return std::sqrt(v.squaredNorm() * mg_.parent.hx() * mg_.parent.hy());
  }

private:
  MaskedGrid mg_;
  double dt_;
  std::vector<int> index_;
  std::vector<std::pair<int, int>> nodes_;
  Eigen::SparseMatrix<double> A_, B_, explicit_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

}  // namespace pdebs::sim
