#pragma once

// Scenario orchestration: closed-loop integration, decay-rate fits and reports.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pdebs/actuation.hpp"
#include "pdebs/control.hpp"
#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/modal.hpp"
#include "pdebs/sim/extension.hpp"
#include "pdebs/sim/grids.hpp"
#include "pdebs/sim/io.hpp"
#include "pdebs/sim/norms.hpp"
#include "pdebs/sim/steppers.hpp"

namespace pdebs::experiments {

using control::LawKind;

enum class Geometry { strip, square, sector, piano };
enum class InitPreset { zero, lowest_mode, two_mode, random_band };
enum class FitNorm { l2, h1 };

inline const char* to_string(Geometry g) {
  switch (g) {
    case Geometry::strip: return "strip";
    case Geometry::square: return "square";
    case Geometry::sector: return "sector";
    case Geometry::piano: return "piano";
  }
  return "?";
}
inline const char* to_string(InitPreset p) {
  switch (p) {
    case InitPreset::zero: return "zero";
    case InitPreset::lowest_mode: return "lowest_mode";
    case InitPreset::two_mode: return "two_mode";
    case InitPreset::random_band: return "random_band";
  }
  return "?";
}
inline const char* to_string(FitNorm f) { return f == FitNorm::l2 ? "l2" : "h1"; }

inline Geometry geometry_from_string(const std::string& s) {
  for (Geometry g : {Geometry::strip, Geometry::square, Geometry::sector, Geometry::piano})
    if (s == to_string(g)) return g;
  throw ConfigError("unknown geometry kind '" + s + "'");
}
inline InitPreset preset_from_string(const std::string& s) {
  for (InitPreset p : {InitPreset::zero, InitPreset::lowest_mode, InitPreset::two_mode, InitPreset::random_band})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown init preset '" + s + "'");
}
inline FitNorm fit_norm_from_string(const std::string& s) {
  if (s == "l2") return FitNorm::l2;
  if (s == "h1") return FitNorm::h1;
  throw ConfigError("unknown fit norm '" + s + "' (expected l2 or h1)");
}

/// Norms below this fraction of the initial norm end a fit (and a run).
inline constexpr double kNormFloor = 1e-14;

struct ActuatorSpec {
  std::string kind = "piecewise";  // piecewise | sinusoidal
  int m = 3;
};

struct Scenario {
  std::string name = "scenario";
  Geometry geometry = Geometry::square;
  PlantParams plant{1.0, 25.0, 2.0};

  // grids
  int nx = 64, ny = 64;          // square / piano (piano uses nx for both), strip line uses ny
  int nr = 64, ntheta = 48;      // sector
  int k_samples = 33;            // strip
  double k_max = 4.0;            // strip
  double L = 1.0;                // piano extended-square side
  double R = 1.0, theta1 = 0.0, theta2 = M_PI / 2.0;  // sector

  LawKind law = LawKind::square_full;
  int N = 0;  // 0: use the budget formula
  ActuatorSpec actuators;

  double dt = 0.0;       // 0: 1e-3 / max(1, lambda)
  double t_final = 0.0;  // 0: 20 / c
  int record_every = 10;
  bool stop_at_floor = true;

  InitPreset init = InitPreset::two_mode;
  std::uint64_t seed = 1;

  FitNorm fit_norm = FitNorm::l2;
  bool open_loop_compare = false;
  bool replay_check = true;  // piano only

  std::string output_dir;  // empty: no files

  [[nodiscard]] double max_dt() const { return 1e-3 / std::max(1.0, plant.lambda); }
  [[nodiscard]] double min_t_final() const { return 20.0 / plant.c; }

  /// Copy with dt / t_final defaults filled in.
  [[nodiscard]] Scenario resolved() const {
    Scenario s = *this;
    if (s.dt <= 0.0) s.dt = s.max_dt();
    if (s.t_final <= 0.0) s.t_final = s.min_t_final();
    return s;
  }

  void validate() const {
    plant.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt: must be > 0");
    if (dt > max_dt() * (1.0 + 1e-12))
      throw ConfigError("time.dt: " + std::to_string(dt) + " exceeds 1e-3/max(1, lambda) = " + std::to_string(max_dt()));
    if (!(t_final >= min_t_final() * (1.0 - 1e-12)) || !std::isfinite(t_final))
      throw ConfigError("time.t_final: must be >= 20/c = " + std::to_string(min_t_final()));
    if (record_every < 1) throw ConfigError("time.record_every: must be >= 1");
    if (N < 0) throw ConfigError("law.N: must be >= 1 when given");
    switch (geometry) {
      case Geometry::square:
        if (law != LawKind::none && law != LawKind::square_full && law != LawKind::square_findim)
          throw ConfigError("law.kind: '" + std::string(control::to_string(law)) + "' does not apply to a square");
        if (nx < 8 || ny < 8) throw ConfigError("grid.nx/ny: must be >= 8");
        if (law == LawKind::square_findim) {
          if (actuators.kind != "piecewise" && actuators.kind != "sinusoidal")
            throw ConfigError("law.actuators.kind: expected piecewise or sinusoidal");
          if (actuators.m < 1) throw ConfigError("law.actuators.m: must be >= 1");
        }
        break;
      case Geometry::strip:
        if (law != LawKind::none && law != LawKind::strip_truncated)
          throw ConfigError("law.kind: '" + std::string(control::to_string(law)) + "' does not apply to a strip");
        if (ny < 8) throw ConfigError("grid.ny: must be >= 8");
        if (k_samples < 2) throw ConfigError("grid.k_samples: must be >= 2");
        if (!(k_max > 0.0)) throw ConfigError("geometry.k_max: must be > 0");
        break;
      case Geometry::sector:
        if (law != LawKind::none && law != LawKind::sector_modal)
          throw ConfigError("law.kind: '" + std::string(control::to_string(law)) + "' does not apply to a sector");
        if (nr < 8 || ntheta < 8) throw ConfigError("grid.nr/ntheta: must be >= 8");
        if (!(R > 0.0)) throw ConfigError("geometry.R: must be > 0");
        if (!(theta2 > theta1) || theta2 - theta1 > 2.0 * M_PI + 1e-12)
          throw ConfigError("geometry.theta1/theta2: need 0 < theta2 - theta1 <= 2 pi");
        break;
      case Geometry::piano:
        if (law != LawKind::none && law != LawKind::piano_extended)
          throw ConfigError("law.kind: '" + std::string(control::to_string(law)) + "' does not apply to the piano domain");
        if (nx < 8) throw ConfigError("grid.nx: must be >= 8");
        if (!(L > 0.0)) throw ConfigError("geometry.L: must be > 0");
        break;
    }
  }
};

struct DecayFit {
  double rate = 0.0;
  double M = 1.0;
  double residual = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t samples = 0;
};

/// Time of the first sample below the floor, or the last time stamp.
inline double floor_time(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.empty()) return 0.0;
  const double floor = kNormFloor * v.front();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < floor) return t[i];
  return t.back();
}

/// Least-squares line through (t, log v) on [t0, first sub-floor sample).
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, double t0) {
  if (t.size() != v.size()) throw FitError("fit_decay: time and value counts differ");
  if (v.empty()) throw FitError("fit_decay: empty series");
  const double v0 = v.front();
  if (!(v0 > 0.0)) throw FitError("fit_decay: initial norm must be positive");
  const double floor = kNormFloor * v0;
  std::size_t end = v.size();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= floor)) {
      end = i;
      break;
    }

  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < end; ++i) {
    if (t[i] < t0) continue;
    const double y = std::log(v[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    ++n;
  }
  if (n < 20)
    throw FitError("fit_decay: only " + std::to_string(n) + " samples in the fit window (need >= 20)");
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  if (!(denom > 0.0)) throw FitError("fit_decay: degenerate time window");
  const double slope = (dn * sty - st * sy) / denom;
  const double icept = (sy - slope * st) / dn;

  DecayFit fit;
  fit.rate = -slope;
  fit.samples = n;
  fit.t1 = 0.0;
  fit.t0 = std::numeric_limits<double>::infinity();
  double ss = 0.0;
  for (std::size_t i = 0; i < end; ++i) {
    if (t[i] < t0) continue;
    const double r = std::log(v[i]) - (icept + slope * t[i]);
    ss += r * r;
    fit.t0 = std::min(fit.t0, t[i]);
    fit.t1 = std::max(fit.t1, t[i]);
  }
  fit.residual = std::sqrt(ss / dn);
  fit.M = 1.0;
  for (std::size_t i = 0; i < end; ++i)
    fit.M = std::max(fit.M, v[i] / (v0 * std::exp(-fit.rate * (t[i] - t.front()))));
  return fit;
}

inline DecayFit fit_decay(const sim::NormSeries& s, double t0, FitNorm which = FitNorm::l2) {
  if (which == FitNorm::h1) {
    if (!s.has_h1()) throw FitError("fit_decay: series has no H1 values");
    return fit_decay(s.t, s.h1, t0);
  }
  return fit_decay(s.t, s.l2, t0);
}

/// Default window start: skip the transient, but keep at least half the
/// usable record for series that reach the floor early.
inline double default_t0(const std::vector<double>& t, const std::vector<double>& v, double c) {
  return std::min(1.0 / c, 0.5 * floor_time(t, v));
}

struct ModeFit {
  double k = 0.0;
  bool controlled = false;
  double rate = 0.0;
};

struct ScenarioReport {
  std::string name;
  Geometry geometry = Geometry::square;
  LawKind law = LawKind::square_full;
  PlantParams plant;
  double dt = 0.0;
  double t_final = 0.0;
  double t_end = 0.0;  // last simulated time
  long steps = 0;
  double N0 = 0.0;
  int N = 0;
  bool trivial = false;
  double target = 0.0;  // pass threshold on the fitted rate
  FitNorm fit_norm = FitNorm::l2;

  sim::NormSeries series;
  std::optional<DecayFit> fit;
  std::optional<DecayFit> open_loop;
  std::optional<DecayFit> restricted;     // piano: physical-domain L2
  sim::NormSeries restricted_series;
  std::optional<double> replay_discrepancy;
  double replay_tolerance = 0.0;
  std::vector<ModeFit> modes;             // strip
  std::vector<std::string> files;
  bool pass = false;
};

inline nlohmann::json fit_json(const DecayFit& f) {
  return {{"rate", f.rate}, {"M", f.M}, {"residual", f.residual}, {"t0", f.t0}, {"t1", f.t1}, {"samples", f.samples}};
}

inline nlohmann::json report_json(const ScenarioReport& r) {
  nlohmann::json j;
  j["scenario"] = r.name;
  j["rate"] = r.fit ? nlohmann::json(r.fit->rate) : nlohmann::json(nullptr);
  j["M"] = r.fit ? nlohmann::json(r.fit->M) : nlohmann::json(nullptr);
  j["residual"] = r.fit ? nlohmann::json(r.fit->residual) : nlohmann::json(nullptr);
  j["pass"] = r.pass;
  j["geometry"] = to_string(r.geometry);
  j["law"] = control::to_string(r.law);
  j["plant"] = {{"epsilon", r.plant.epsilon}, {"lambda", r.plant.lambda}, {"c", r.plant.c}};
  j["target_rate"] = r.target;
  j["fit_norm"] = to_string(r.fit_norm);
  j["N0"] = r.N0;
  j["N"] = r.N;
  j["dt"] = r.dt;
  j["t_final"] = r.t_final;
  j["t_end"] = r.t_end;
  j["steps"] = r.steps;
  j["trivial"] = r.trivial;
  if (r.trivial) j["note"] = "zero initial condition: norms are identically zero, fit skipped";
  if (r.fit) j["fit"] = fit_json(*r.fit);
  if (r.open_loop) j["open_loop"] = fit_json(*r.open_loop);
  if (r.restricted) j["restricted"] = fit_json(*r.restricted);
  if (r.replay_discrepancy) {
    j["replay_discrepancy"] = *r.replay_discrepancy;
    j["replay_tolerance"] = r.replay_tolerance;
  }
  if (!r.modes.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& m : r.modes) arr.push_back({{"k", m.k}, {"controlled", m.controlled}, {"rate", m.rate}});
    j["modes"] = arr;
  }
  j["files"] = r.files;
  return j;
}

namespace detail {

/// Seeded coefficients in [-1, 1] for the random band-limited preset.
inline std::vector<double> band_coefficients(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<double> c(count);
  // bit-level mapping instead of a std distribution keeps the preset identical across standard libraries
  for (auto& x : c) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return c;
}

inline double square_init(InitPreset p, const std::vector<double>& band, double x, double y) {
  switch (p) {
    case InitPreset::zero: return 0.0;
    case InitPreset::lowest_mode: return std::sin(M_PI * x) * std::sin(M_PI * y);
    case InitPreset::two_mode:
      return std::sin(M_PI * x) * std::sin(M_PI * y) + 0.5 * std::sin(2.0 * M_PI * x) * std::sin(M_PI * y);
    case InitPreset::random_band: {
      double s = 0.0;
      for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
          s += band[static_cast<std::size_t>((a - 1) * 4 + (b - 1))] * std::sin(a * M_PI * x) * std::sin(b * M_PI * y);
      return s;
    }
  }
  return 0.0;
}

struct Files {
  std::filesystem::path dir;
  std::string name;
  std::vector<std::string>* list = nullptr;

  [[nodiscard]] bool enabled() const { return !dir.empty(); }
  std::filesystem::path path(const std::string& suffix) const {
    auto p = dir / (name + "_" + suffix);
    list->push_back(p.string());
    return p;
  }
};

/// Drives a run: records at step 0 and every record_every steps, stops at the
/// floor when requested. `step(k)` advances from step k-1 to k; `record(k, t)`
/// returns the L2 norm used for the floor test.
template <class StepFn, class RecordFn>
void integrate(const Scenario& s, ScenarioReport& rep, StepFn&& step, RecordFn&& record) {
  const long steps = std::lround(s.t_final / s.dt);
  const double n0 = record(0L, 0.0);
  rep.steps = 0;
  rep.t_end = 0.0;
  if (n0 == 0.0) {
    rep.trivial = true;
    return;
  }
  for (long k = 1; k <= steps; ++k) {
    step(k);
    rep.steps = k;
    rep.t_end = static_cast<double>(k) * s.dt;
    if (k % s.record_every == 0 || k == steps) {
      const double v = record(k, rep.t_end);
      if (s.stop_at_floor && v < kNormFloor * n0) break;
    }
  }
}

}  // namespace detail

ScenarioReport run_scenario(const Scenario& in);

namespace detail {

inline void finish_fit(const Scenario& s, ScenarioReport& rep) {
  if (rep.trivial) return;
  const auto& v = s.fit_norm == FitNorm::h1 ? rep.series.h1 : rep.series.l2;
  rep.fit = fit_decay(rep.series, default_t0(rep.series.t, v, s.plant.c), s.fit_norm);
}

inline ScenarioReport run_square(const Scenario& s, const Files& files) {
  ScenarioReport rep;
  const sim::RectGrid grid(s.nx, s.ny, 1.0, sim::Edge::east);
  sim::Field2D f(grid);
  const auto band = band_coefficients(s.seed, 16);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.values(i, j) = square_init(s.init, band, grid.x(i), grid.y(j));

  const sim::RectStepper stepper(grid, s.plant, s.dt);
  const auto table = kernels::build_kernel_table(s.plant, kernels::KernelGeometry::square(1.0), grid.nx + 2);
  const auto budget = actuation::min_modes_square(s.plant);
  rep.N0 = budget.N0;
  rep.N = s.N > 0 ? s.N : budget.N;
  std::unique_ptr<actuation::ActuatorBank> bank;
  actuation::DecayBudget used = budget;
  used.N = rep.N;
  if (s.law == LawKind::square_findim) {
    auto shapes = s.actuators.kind == "sinusoidal" ? actuation::ActuatorBank::sinusoidal_bank(s.actuators.m)
                                                   : actuation::ActuatorBank::piecewise_bank(s.actuators.m);
    bank = std::make_unique<actuation::ActuatorBank>(std::move(shapes), rep.N);
  }

  std::optional<sim::CsvWriter> prof;
  if (files.enabled() && s.law != LawKind::none) prof.emplace(files.path("profile.csv"), "t,y,U");
  if (files.enabled()) sim::write_snapshot(files.path("initial.csv"), f);

  Eigen::VectorXd U = Eigen::VectorXd::Zero(grid.edge_count());
  auto step = [&](long k) {
    if (s.law == LawKind::square_full)
      U = control::control_square_full(f, table);
    else if (s.law == LawKind::square_findim)
      U = control::control_square_findim(f, *bank, used, table).profile;
    if (prof && (k - 1) % s.record_every == 0)
      for (int j = 0; j < grid.ny; ++j) prof->row(static_cast<double>(k - 1) * s.dt, grid.y(j), U(j));
    stepper.step(f, std::span<const double>(U.data(), static_cast<std::size_t>(U.size())));
  };
  auto record = [&](long, double t) {
    const double l2 = sim::l2_norm(f);
    rep.series.push(t, l2, sim::h1_norm(f));
    return l2;
  };
  integrate(s, rep, step, record);
  if (files.enabled()) sim::write_snapshot(files.path("final.csv"), f);
  finish_fit(s, rep);
  return rep;
}

inline ScenarioReport run_strip(const Scenario& s, const Files& files) {
  ScenarioReport rep;
  const int n = s.ny;
  const double h = 1.0 / (n + 1);
  const auto budget = actuation::min_modes_strip(s.plant);
  rep.N0 = budget.N0;
  rep.N = s.N > 0 ? s.N : budget.N;
  const auto table = kernels::build_kernel_table(s.plant, kernels::KernelGeometry::strip(), n + 2);
  const auto band = band_coefficients(s.seed, 4);

  std::vector<sim::StripMode> modes(static_cast<std::size_t>(s.k_samples));
  std::vector<sim::LineCN> lines;
  for (int q = 0; q < s.k_samples; ++q) {
    const double k = -s.k_max + 2.0 * s.k_max * q / (s.k_samples - 1);
    auto& m = modes[static_cast<std::size_t>(q)];
    m.key = k;
    m.values.resize(n);
    // Hermitian in k, so the physical-space field is real
    const std::complex<double> A = std::exp(-0.25 * k * k) * std::polar(1.0, -2.0 * M_PI * k * 0.3);
    for (int j = 0; j < n; ++j) {
      const double y = (j + 1) * h;
      double shape = 0.0;
      switch (s.init) {
        case InitPreset::zero: break;
        case InitPreset::lowest_mode: shape = std::sin(M_PI * y); break;
        case InitPreset::two_mode: shape = std::sin(M_PI * y) + 0.5 * std::sin(2.0 * M_PI * y); break;
        case InitPreset::random_band:
          for (int b = 1; b <= 4; ++b) shape += band[static_cast<std::size_t>(b - 1)] * std::sin(b * M_PI * y);
          break;
      }
      m.values(j) = A * shape;
    }
    lines.push_back(sim::strip_line(static_cast<std::size_t>(n), s.plant, k, s.dt));
  }
  std::vector<sim::NormSeries> per_mode(modes.size());

  std::optional<sim::CsvWriter> prof;
  if (files.enabled() && s.law != LawKind::none) prof.emplace(files.path("profile.csv"), "t,k,U_re,U_im");

  std::vector<std::complex<double>> work(static_cast<std::size_t>(n));
  auto step = [&](long k) {
    for (std::size_t q = 0; q < modes.size(); ++q) {
      auto& m = modes[q];
      std::complex<double> U = 0.0;
      if (s.law == LawKind::strip_truncated) U = control::control_strip_truncated(m, table, rep.N);
      if (prof && (k - 1) % s.record_every == 0) prof->row(static_cast<double>(k - 1) * s.dt, m.key, U.real(), U.imag());
      std::span<std::complex<double>> v(m.values.data(), static_cast<std::size_t>(n));
      lines[q].step<std::complex<double>>(v, U, U, v);
      m.boundary = U;
      m.time = static_cast<double>(k) * s.dt;
    }
  };
  auto record = [&](long, double t) {
    for (std::size_t q = 0; q < modes.size(); ++q) per_mode[q].push(t, sim::l2_norm(modes[q]));
    const double l2 = sim::l2_norm(std::span<const sim::StripMode>(modes));
    rep.series.push(t, l2);
    return l2;
  };
  integrate(s, rep, step, record);
  for (const auto& m : modes)
    if (!m.values.allFinite()) throw NumericalError("strip ensemble: non-finite state");
  if (!rep.trivial) {
    for (std::size_t q = 0; q < modes.size(); ++q) {
      const auto& ser = per_mode[q];
      ModeFit mf;
      mf.k = modes[q].key;
      mf.controlled = s.law == LawKind::strip_truncated && std::abs(mf.k) < static_cast<double>(rep.N);
      if (ser.l2.front() > 0.0) mf.rate = fit_decay(ser, default_t0(ser.t, ser.l2, s.plant.c)).rate;
      rep.modes.push_back(mf);
    }
  }
  if (files.enabled()) {
    sim::CsvWriter w(files.path("modes.csv"), "k,controlled,rate");
    for (const auto& m : rep.modes) w.row(m.k, m.controlled ? 1 : 0, m.rate);
  }
  finish_fit(s, rep);
  return rep;
}

inline ScenarioReport run_sector(const Scenario& s, const Files& files) {
  ScenarioReport rep;
  const sim::PolarGrid grid(s.nr, s.ntheta, s.R, s.theta1, s.theta2);
  const auto budget = actuation::min_modes_sector(s.plant, s.theta1, s.theta2, s.R);
  rep.N0 = budget.N0;
  rep.N = s.N > 0 ? s.N : budget.N;
  actuation::DecayBudget used = budget;
  used.N = rep.N;
  const modal::AngularBasis basis(s.theta1, s.theta2, rep.N);
  const auto tables = control::sector_tables(s.plant, grid, rep.N);
  const auto band = band_coefficients(s.seed, 4);
  const modal::AngularBasis init_basis(s.theta1, s.theta2, 4);

  sim::PolarField f(grid);
  for (int j = 0; j < grid.nr; ++j) {
    const double r = grid.r(j) / s.R;
    const double bump = r * r * (1.0 - r);
    for (int l = 0; l < grid.ntheta; ++l) {
      const double th = grid.theta(l);
      double a = 0.0;
      switch (s.init) {
        case InitPreset::zero: break;
        case InitPreset::lowest_mode: a = init_basis.phi(1, th); break;
        case InitPreset::two_mode: a = init_basis.phi(1, th) + init_basis.phi(2, th); break;
        case InitPreset::random_band:
          for (int n = 1; n <= 4; ++n) a += band[static_cast<std::size_t>(n - 1)] * init_basis.phi(n, th);
          break;
      }
      f.values(j, l) = bump * a;
    }
  }
  const sim::PolarStepper stepper(grid, s.plant, s.dt);

  std::optional<sim::CsvWriter> prof;
  if (files.enabled() && s.law != LawKind::none) prof.emplace(files.path("profile.csv"), "t,theta,U");
  if (files.enabled()) sim::write_snapshot(files.path("initial.csv"), f);

  Eigen::VectorXd U = Eigen::VectorXd::Zero(grid.ntheta);
  auto step = [&](long k) {
    if (s.law == LawKind::sector_modal) U = control::control_sector(f, basis, used, tables).profile;
    if (prof && (k - 1) % s.record_every == 0)
      for (int l = 0; l < grid.ntheta; ++l) prof->row(static_cast<double>(k - 1) * s.dt, grid.theta(l), U(l));
    stepper.step(f, std::span<const double>(U.data(), static_cast<std::size_t>(U.size())));
  };
  auto record = [&](long, double t) {
    const double l2 = sim::l2_norm(f);
    rep.series.push(t, l2);
    return l2;
  };
  integrate(s, rep, step, record);
  if (files.enabled()) sim::write_snapshot(files.path("final.csv"), f);
  finish_fit(s, rep);
  return rep;
}

inline ScenarioReport run_piano(const Scenario& s, const Files& files) {
  ScenarioReport rep;
  const sim::MaskedGrid mg = sim::piano_grid(s.nx, s.L);
  const sim::RectGrid& grid = mg.parent;
  const auto budget = actuation::min_modes_square(s.plant);
  rep.N0 = budget.N0;
  rep.N = budget.N;

  sim::Field2D f(grid);
  const auto band = band_coefficients(s.seed, 16);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (!mg.in_domain(i, j)) continue;
      const double x = grid.x(i) / s.L, y = grid.y(j) / s.L;
      const double cut = x - y + 0.5;  // vanishes on the interface
      const InitPreset base = s.init == InitPreset::two_mode ? InitPreset::lowest_mode : s.init;
      f.values(i, j) = square_init(base, band, x, y) * cut * cut;
    }

  const sim::RectStepper stepper(grid, s.plant, s.dt);
  const auto table = kernels::build_kernel_table(s.plant, kernels::KernelGeometry::square(s.L), grid.ny + 2);
  std::optional<sim::OmegaReplay> replay;
  Eigen::VectorXd u_r;
  double replay_scale = 0.0;
  double worst = 0.0;
  const bool do_replay = s.replay_check && s.law == LawKind::piano_extended;
  if (do_replay) {
    replay.emplace(mg, s.plant, s.dt);
    u_r = replay->restrict(f);
    replay_scale = replay->l2(u_r);
  }
  const double h = s.L / (s.nx + 1);
  rep.replay_tolerance = 5.0 * (h * h + s.dt);

  std::optional<sim::CsvWriter> prof, trace;
  if (files.enabled() && s.law != LawKind::none) {
    prof.emplace(files.path("profile.csv"), "t,x,U");
    trace.emplace(files.path("trace.csv"), "t,s,U1");
  }
  if (files.enabled()) sim::write_snapshot(files.path("initial.csv"), f);

  Eigen::VectorXd U = Eigen::VectorXd::Zero(grid.edge_count());
  auto step = [&](long k) {
    control::PianoControl pc;
    if (s.law == LawKind::piano_extended) {
      pc = control::control_piano(f, mg, table);
      U = pc.profile;
      if (prof && (k - 1) % s.record_every == 0) {
        const double t = static_cast<double>(k - 1) * s.dt;
        for (int i = 0; i < grid.nx; ++i) prof->row(t, grid.x(i), U(i));
        for (std::size_t c = 0; c < pc.s.size(); ++c) trace->row(t, pc.s[c], pc.trace(static_cast<Eigen::Index>(c)));
      }
    }
    stepper.step(f, std::span<const double>(U.data(), static_cast<std::size_t>(U.size())));
    if (replay) replay->step(u_r, pc.trace, sim::interface_trace(f, mg), U);
  };
  auto record = [&](long, double t) {
    const double l2 = sim::l2_norm(f);
    rep.series.push(t, l2, sim::h1_norm(f));
    rep.restricted_series.push(t, sim::l2_norm(f, mg));
    if (replay && replay_scale > 0.0) worst = std::max(worst, replay->l2(replay->restrict(f) - u_r) / replay_scale);
    return l2;
  };
  integrate(s, rep, step, record);
  if (files.enabled()) {
    sim::write_snapshot(files.path("final.csv"), f);
    sim::write_norms(files.path("restricted_norms.csv"), rep.restricted_series);
  }
  finish_fit(s, rep);
  if (!rep.trivial) {
    const auto& rs = rep.restricted_series;
    rep.restricted = fit_decay(rs, default_t0(rs.t, rs.l2, s.plant.c));
    if (replay) rep.replay_discrepancy = worst;
  }
  return rep;
}

}  // namespace detail

/// Integrates the scenario's closed loop (plus the open loop when requested),
/// fits the decay rate and writes CSV/JSON outputs when output_dir is set.
inline ScenarioReport run_scenario(const Scenario& in) {
  const Scenario s = in.resolved();
  s.validate();
  ScenarioReport rep;
  std::vector<std::string> listed;
  detail::Files files{s.output_dir.empty() ? std::filesystem::path{} : std::filesystem::path(s.output_dir), s.name,
                      &listed};
  try {
    switch (s.geometry) {
      case Geometry::square: rep = detail::run_square(s, files); break;
      case Geometry::strip: rep = detail::run_strip(s, files); break;
      case Geometry::sector: rep = detail::run_sector(s, files); break;
      case Geometry::piano: rep = detail::run_piano(s, files); break;
    }
  } catch (const NumericalError& e) {
    throw NumericalError("scenario '" + s.name + "': " + e.what());
  } catch (const FitError& e) {
    throw FitError("scenario '" + s.name + "': " + e.what());
  }
  rep.name = s.name;
  rep.geometry = s.geometry;
  rep.law = s.law;
  rep.plant = s.plant;
  rep.dt = s.dt;
  rep.t_final = s.t_final;
  rep.fit_norm = s.fit_norm;
  rep.target = 0.9 * s.plant.c;

  if (s.open_loop_compare && s.law != LawKind::none) {
    Scenario ol = s;
    ol.law = LawKind::none;
    ol.open_loop_compare = false;
    ol.replay_check = false;
    ol.output_dir.clear();
    const ScenarioReport olr = run_scenario(ol);
    rep.open_loop = olr.fit;
    if (files.enabled()) sim::write_norms(files.path("open_loop_norms.csv"), olr.series);
  }

  if (rep.trivial) {
    rep.pass = true;
  } else {
    bool ok = rep.fit && rep.fit->rate >= rep.target;
    if (rep.restricted) ok = ok && rep.restricted->rate >= rep.target;
    if (rep.replay_discrepancy) ok = ok && *rep.replay_discrepancy <= rep.replay_tolerance;
    for (const auto& m : rep.modes) ok = ok && m.rate >= rep.target;
    rep.pass = s.law == LawKind::none ? true : ok;
  }

  if (files.enabled()) {
    sim::write_norms(files.path("norms.csv"), rep.series);
    const auto rp = files.path("report.json");
    rep.files = listed;
    std::ofstream out(rp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file " + rp.string());
    out << report_json(rep).dump(2) << '\n';
  }
  return rep;
}

}  // namespace pdebs::experiments
