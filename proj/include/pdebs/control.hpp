#pragma once

// Boundary feedback laws evaluated from the current discrete state.
//
// All laws read U = sum_i w_i g_i u_i over a KernelTable whose abscissae match
// the state's grid. The node at the controlled end carries the currently held
// boundary value, as it does in the simulator.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/actuation.hpp"
#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/modal.hpp"
#include "pdebs/sim/extension.hpp"
#include "pdebs/sim/grids.hpp"

namespace pdebs::control {

enum class LawKind { none, strip_truncated, square_full, square_findim, sector_modal, piano_extended };

inline const char* to_string(LawKind k) {
  switch (k) {
    case LawKind::none: return "none";
    case LawKind::strip_truncated: return "strip_truncated";
    case LawKind::square_full: return "square_full";
    case LawKind::square_findim: return "square_findim";
    case LawKind::sector_modal: return "sector_modal";
    case LawKind::piano_extended: return "piano_extended";
  }
  return "?";
}

inline LawKind law_from_string(const std::string& s) {
  for (LawKind k : {LawKind::none, LawKind::strip_truncated, LawKind::square_full, LawKind::square_findim,
                    LawKind::sector_modal, LawKind::piano_extended})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown law kind '" + s + "'");
}

namespace detail {

inline std::vector<double> uniform_nodes(std::size_t interior, double extent) {
  std::vector<double> a(interior + 2);
  const double h = extent / static_cast<double>(interior + 1);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<double>(i) * h;
  a.back() = extent;
  return a;
}

}  // namespace detail

/// U(k) = int_0^1 K(1, eta) u(k, eta) d eta.
inline std::complex<double> control_strip_mode(const sim::StripMode& mode, const kernels::KernelTable& table) {
  if (table.geometry.kind != kernels::KernelGeometry::Kind::strip)
    throw ConfigError("control_strip_mode: table is not a strip table");
  const auto n = static_cast<std::size_t>(mode.values.size());
  table.require_aligned(detail::uniform_nodes(n, 1.0), "control_strip_mode");
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += table.weights[i + 1] * table.values[i + 1] * mode.values(static_cast<Eigen::Index>(i));
  s += table.weights[n + 1] * table.values[n + 1] * mode.boundary;
  return s;
}

/// Spectral cutoff of the strip law: wavenumbers with |k| >= N receive no control.
inline std::complex<double> control_strip_truncated(const sim::StripMode& mode, const kernels::KernelTable& table, int N) {
  if (N < 1) throw ConfigError("control_strip_truncated: N must be >= 1");
  if (std::abs(mode.key) >= static_cast<double>(N)) return {0.0, 0.0};
  return control_strip_mode(mode, table);
}

/// U(y_j) = int_0^1 K(1, xi) u(xi, y_j) d xi, one row at a time.
inline Eigen::VectorXd control_square_full(const sim::Field2D& state, const kernels::KernelTable& table) {
  const sim::RectGrid& g = state.grid;
  table.require_aligned(g.normal_abscissae(), "control_square_full");
  const int nn = g.normal_count(), nt = g.edge_count();
  Eigen::VectorXd gw(nn);
  for (int i = 0; i < nn; ++i)
    gw(i) = table.weights[static_cast<std::size_t>(i + 1)] * table.values[static_cast<std::size_t>(i + 1)];
  const double gend = table.weights.back() * table.values.back();
  Eigen::VectorXd U(nt);
  if (g.controlled == sim::Edge::east)
    U.noalias() = state.values.transpose() * gw;  // values(i, j): i normal
  else
    U.noalias() = state.values * gw;  // values(i, j): j normal
  if (state.edge.size() == nt) U += gend * state.edge;
  return U;
}

struct FinDimControl {
  Eigen::VectorXd inputs;   // U_1..U_m
  Eigen::VectorXd profile;  // sum_k U_k phi_k(y_j) at the edge nodes
  Eigen::VectorXd modal;    // g_1..g_N
};

/// (U_1..U_m) = Phi^+ (g_1..g_N), g_n = int K(1, xi) u_n(xi) d xi.
inline FinDimControl control_square_findim(const sim::Field2D& state, const actuation::ActuatorBank& bank,
                                           const actuation::DecayBudget& budget, const kernels::KernelTable& table) {
  const sim::RectGrid& g = state.grid;
  const int N = budget.N;
  if (bank.modes() != N)
    throw ConfigError("control_square_findim: actuator bank built for " + std::to_string(bank.modes()) +
                      " modes, budget asks for " + std::to_string(N));
  table.require_aligned(g.normal_abscissae(), "control_square_findim");
  const int nn = g.normal_count(), nt = g.edge_count();

  // rows: normal-direction nodes 1..nn plus the held edge; columns: edge-direction interior nodes
  Eigen::MatrixXd lines(nn + 1, nt);
  if (g.controlled == sim::Edge::east)
    lines.topRows(nn) = state.values;
  else
    lines.topRows(nn) = state.values.transpose();
  if (state.edge.size() == nt)
    lines.row(nn) = state.edge.transpose();
  else
    lines.row(nn).setZero();
  const modal::ModalSeries series = modal::sine_series_by_column(lines, N);

  FinDimControl out;
  out.modal = Eigen::VectorXd::Zero(N);
  for (int i = 0; i <= nn; ++i) {
    const auto t = static_cast<std::size_t>(i + 1);
    out.modal += table.weights[t] * table.values[t] * series.coeffs.col(i);
  }
  out.inputs = bank.phi_pinv * out.modal;
  out.profile = Eigen::VectorXd::Zero(nt);
  const double h = g.edge_spacing();
  for (int j = 0; j < nt; ++j) {
    const double y = (j + 1) * h / g.extent;
    for (int k = 0; k < bank.actuators(); ++k)
      out.profile(j) += out.inputs(k) * bank.shapes[static_cast<std::size_t>(k)](y);
  }
  return out;
}

/// Per-mode radial tables k_n(R, rho_j) on the staggered centres, n = 1..N.
inline std::vector<kernels::KernelTable> sector_tables(const PlantParams& p, const sim::PolarGrid& g, int N) {
  const modal::AngularBasis basis(g.theta1, g.theta2, N);
  std::vector<kernels::KernelTable> out;
  for (int n = 1; n <= N; ++n)
    out.push_back(kernels::build_kernel_table(p, kernels::KernelGeometry::sector(g.R, basis.alpha(n), n), g.nr));
  return out;
}

struct SectorControl {
  Eigen::VectorXd profile;  // U(theta_l)
  Eigen::VectorXd modal;    // U_1..U_N
};

/// U(theta) = sum_{n <= N} U_n Phi_n(theta), U_n = int_0^R k_n(R, rho) u_n(rho) d rho.
inline SectorControl control_sector(const sim::PolarField& state, const modal::AngularBasis& basis,
                                    const actuation::DecayBudget& budget,
                                    const std::vector<kernels::KernelTable>& tables) {
  const sim::PolarGrid& g = state.grid;
  const int N = budget.N;
  if (static_cast<int>(tables.size()) < N)
    throw ConfigError("control_sector: need " + std::to_string(N) + " kernel tables, got " +
                      std::to_string(tables.size()));
  if (basis.n_max < N) throw ConfigError("control_sector: angular basis holds fewer than N modes");
  const auto centres = g.radial_centres();
  for (int n = 0; n < N; ++n) {
    const auto& t = tables[static_cast<std::size_t>(n)];
    if (t.geometry.kind != kernels::KernelGeometry::Kind::sector)
      throw ConfigError("control_sector: table is not a sector table");
    t.require_aligned(centres, "control_sector");
  }
  const modal::AngularBasis trunc(basis.theta1, basis.theta2, N);

  SectorControl out;
  out.modal = Eigen::VectorXd::Zero(N);
  std::vector<double> line(static_cast<std::size_t>(g.ntheta + 2), 0.0);
  for (int j = 0; j < g.nr; ++j) {
    for (int l = 0; l < g.ntheta; ++l) line[static_cast<std::size_t>(l + 1)] = state.values(j, l);
    const auto un = modal::angular_coeffs(line, trunc);
    for (int n = 0; n < N; ++n) {
      const auto& t = tables[static_cast<std::size_t>(n)];
      out.modal(n) += t.weights[static_cast<std::size_t>(j)] * t.values[static_cast<std::size_t>(j)] *
                      un[static_cast<std::size_t>(n)];
    }
  }
  out.profile.resize(g.ntheta);
  for (int l = 0; l < g.ntheta; ++l) {
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += out.modal(n) * trunc.phi(n + 1, g.theta(l));
    out.profile(l) = s;
  }
  return out;
}

struct PianoControl {
  Eigen::VectorXd profile;    // top edge of the extended square
  Eigen::VectorXd trace;      // U_1 at the interface crossings, ordered by s
  std::vector<double> s;      // arclength of each crossing
};

/// Full-boundary law on the extended square plus the interface trace U_1.
inline PianoControl control_piano(const sim::Field2D& state, const sim::MaskedGrid& mg,
                                  const kernels::KernelTable& table) {
  if (!(state.grid == mg.parent)) throw ConfigError("control_piano: state grid is not the extended grid");
  PianoControl out;
  out.profile = control_square_full(state, table);
  out.trace = sim::interface_trace(state, mg);
  out.s.reserve(mg.crossings.size());
  for (const auto& c : mg.crossings) out.s.push_back(c.s);
  return out;
}

}  // namespace pdebs::control
