// Acceptance runner: one PASS/FAIL line per criterion, with the measured
// numbers and wall time. Pass criterion ids (AC-1 .. AC-9) to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pdebs/actuation.hpp"
#include "pdebs/experiments.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/modal.hpp"

using namespace pdebs;
using namespace pdebs::experiments;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

Outcome ac1() {
  const PlantParams p(1.0, 7.0, 1.0);  // lambda0 = 8
  const double r8 = kernels::kernel_residual_1d(p, std::ldexp(1.0, -8));
  const double r9 = kernels::kernel_residual_1d(p, std::ldexp(1.0, -9));
  const double ratio = r9 / r8;
  double diag = 0.0, edge = 0.0;
  for (double l0 : {0.5, 2.0, 8.0, 30.0}) {
    const PlantParams q(1.0, l0 - 1.0, 1.0);
    for (int i = 0; i <= 100; ++i) {
      const double x = 0.02 * i;
      diag = std::max(diag, std::abs(kernels::kernel_1d(q, x, x) + 0.5 * l0 * x));
      edge = std::max(edge, std::abs(kernels::kernel_1d(q, x, 0.0)));
    }
  }
  const bool ok = ratio >= 0.2 && ratio <= 0.35 && r9 < r8 && diag <= 1e-12 && edge <= 1e-12;
  return {ok, fmt("r8=%.6g r9=%.6g ratio=%.5f (need [0.2,0.35]); diagonal err=%.2g edge err=%.2g (need <=1e-12)", r8,
                  r9, ratio, diag, edge)};
}

Outcome ac2() {
  Scenario s;
  s.name = "ac2";
  s.plant = PlantParams(1.0, 25.0, 2.0);
  s.law = LawKind::square_full;
  s.open_loop_compare = true;
  const auto r = run_scenario(s);
  const double expect_growth = 25.0 - 2.0 * M_PI * M_PI;
  const double growth = r.open_loop ? -r.open_loop->rate : 0.0;
  const bool growth_ok = std::abs(growth - expect_growth) <= 0.1 * expect_growth;
  const bool ok = r.fit && r.fit->rate >= 1.8 && r.fit->M >= 1.0 && growth_ok;
  return {ok, fmt("closed-loop rate=%.4f (need >=1.8) M=%.3f; open-loop growth=%.4f vs %.4f (need within 10%%)",
                  r.fit ? r.fit->rate : NAN, r.fit ? r.fit->M : NAN, growth, expect_growth)};
}

Outcome ac3() {
  const PlantParams p(1.0, 25.0, 1.0);
  const auto budget = actuation::min_modes_square(p);
  const actuation::ActuatorBank bank(actuation::ActuatorBank::piecewise_bank(3), budget.N);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bank.phi.entries);
  const auto rank = svd.setThreshold(actuation::kRankTolerance).rank();

  bool rejected = false;
  try {
    actuation::ActuatorBank single(actuation::ActuatorBank::piecewise_bank(1), budget.N);
  } catch (const StabilizabilityError&) {
    rejected = true;
  }
  const double phi12 = actuation::shape_coeff_piecewise(1, 1, 2);

  Scenario s;
  s.name = "ac3";
  s.plant = p;
  s.law = LawKind::square_findim;
  s.actuators = {"piecewise", 3};
  s.fit_norm = FitNorm::h1;
  const auto r = run_scenario(s);
  const bool ok = budget.N == 2 && std::abs(budget.N0 - 1.623) < 5e-4 && rank == 2 && rejected &&
                  std::abs(phi12) < 1e-15 && r.fit && r.fit->rate >= 0.9;
  return {ok, fmt("N0=%.4f N=%d rank(Phi)=%d; m=1 rejected=%s (phi_12=%.1g); H1 rate=%.4f (need >=0.9)", budget.N0,
                  budget.N, static_cast<int>(rank), rejected ? "yes" : "no", phi12, r.fit ? r.fit->rate : NAN)};
}

Outcome ac4() {
  Scenario s;
  s.name = "ac4";
  s.geometry = Geometry::strip;
  s.plant = PlantParams(1.0, 30.0, 2.0);
  s.law = LawKind::strip_truncated;
  const auto budget = actuation::min_modes_strip(s.plant);
  const auto r = run_scenario(s);
  double worst_ctl = INFINITY, worst_free = INFINITY;
  int n_ctl = 0, n_free = 0;
  for (const auto& m : r.modes) {
    if (std::abs(m.k) < 1.0) {
      worst_ctl = std::min(worst_ctl, m.rate);
      n_ctl += m.controlled;
    } else {
      worst_free = std::min(worst_free, m.rate);
      n_free += !m.controlled;
    }
  }
  const bool ok = std::abs(budget.N0 - 0.9) < 1e-3 && budget.N == 1 && worst_ctl >= 1.8 && worst_free >= 1.8 &&
                  r.fit && r.fit->rate >= 1.8;
  return {ok, fmt("N0=%.4f N=%d; controlled |k|<1 (%d modes) min rate=%.4f; uncontrolled |k|>=1 (%d modes) min "
                  "rate=%.4f; ensemble rate=%.4f (all need >=1.8)",
                  budget.N0, budget.N, n_ctl, worst_ctl, n_free, worst_free, r.fit ? r.fit->rate : NAN)};
}

Outcome ac5() {
  Scenario s;
  s.name = "ac5";
  s.geometry = Geometry::sector;
  s.plant = PlantParams(1.0, 3.0, 1.0);
  s.law = LawKind::sector_modal;
  s.nr = 64;
  s.ntheta = 48;
  s.open_loop_compare = true;
  const auto budget = actuation::min_modes_sector(s.plant, 0.0, M_PI / 2.0, 1.0);
  const auto r = run_scenario(s);
  const double open = r.open_loop ? r.open_loop->rate : NAN;
  const bool ok = std::abs(budget.N0 - 1.0) < 1e-12 && budget.N == 2 && r.fit && r.fit->rate >= 0.9 && open < r.fit->rate;
  return {ok, fmt("threshold=%.4f N=%d; closed-loop rate=%.4f (need >=0.9); open-loop rate=%.4f (slower)", budget.N0,
                  budget.N, r.fit ? r.fit->rate : NAN, open)};
}

Outcome ac6() {
  Scenario s;
  s.name = "ac6";
  s.geometry = Geometry::piano;
  s.plant = PlantParams(1.0, 25.0, 2.0);
  s.law = LawKind::piano_extended;
  const auto r = run_scenario(s);
  const double disc = r.replay_discrepancy ? *r.replay_discrepancy : NAN;
  const bool ok = r.fit && r.fit->rate >= 1.8 && r.restricted && r.restricted->rate >= 1.8 &&
                  disc <= r.replay_tolerance;
  return {ok, fmt("extended rate=%.4f restricted rate=%.4f (need >=1.8); replay discrepancy=%.4g vs 5(h^2+dt)=%.4g",
                  r.fit ? r.fit->rate : NAN, r.restricted ? r.restricted->rate : NAN, disc, r.replay_tolerance)};
}

Outcome ac7() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int tested = 0;
  double worst = 0.0;
  while (tested < 50) {
    const int N = 1 + static_cast<int>(rng() % 6);
    const int m = N + static_cast<int>(rng() % static_cast<std::uint64_t>(13 - N));
    Eigen::MatrixXd A(N, m);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < m; ++k) A(i, k) = U(rng);
    const auto phi = actuation::make_phi(A);
    if (!phi.full_row_rank) continue;
    worst = std::max(worst, (A * actuation::pseudoinverse(phi) - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff());
    ++tested;
  }
  bool identity = true;
  for (int N = 1; N <= 6; ++N)
    identity = identity && actuation::build_phi(actuation::ActuatorBank::sinusoidal_bank(N), N).entries ==
                               Eigen::MatrixXd::Identity(N, N);
  bool mono = true;
  std::string kappas;
  double prev = 0.0;
  for (int N = 2; N <= 6; ++N) {
    const double k = actuation::condition_number(actuation::build_phi(actuation::ActuatorBank::piecewise_bank(N), N));
    mono = mono && k > prev;
    prev = k;
    kappas += fmt("%s%.4g", N == 2 ? "" : ",", k);
  }
  return {worst <= 1e-10 && identity && mono,
          fmt("max|Phi Phi^+ - I|=%.2g over %d matrices (need <=1e-10); sinusoidal identity=%s; cond N=2..6: %s", worst,
              tested, identity ? "yes" : "no", kappas.c_str())};
}

Outcome ac8() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double sine_rt = 0.0, ang_rt = 0.0;
  for (int P : {33, 65, 129, 257}) {
    const int nmax = (P - 1) / 4;
    std::vector<double> a(static_cast<std::size_t>(nmax));
    for (auto& v : a) v = U(rng);
    std::vector<double> u(static_cast<std::size_t>(P)), w(static_cast<std::size_t>(P));
    const modal::AngularBasis basis(0.3, 2.1, nmax);
    for (int j = 0; j < P; ++j) {
      u[static_cast<std::size_t>(j)] = modal::sine_reconstruct(a, static_cast<double>(j) / (P - 1));
      w[static_cast<std::size_t>(j)] = modal::angular_reconstruct(a, basis, basis.theta1 + basis.span() * j / (P - 1));
    }
    u.front() = u.back() = w.front() = w.back() = 0.0;
    const auto cu = modal::sine_coeffs(u, nmax);
    const auto cw = modal::angular_coeffs(w, basis);
    for (int j = 0; j < P; ++j) {
      sine_rt = std::max(sine_rt, std::abs(modal::sine_reconstruct(cu, static_cast<double>(j) / (P - 1)) - u[static_cast<std::size_t>(j)]));
      ang_rt = std::max(ang_rt, std::abs(modal::angular_reconstruct(cw, basis, basis.theta1 + basis.span() * j / (P - 1)) -
                                         w[static_cast<std::size_t>(j)]));
    }
  }
  // Parseval on a smooth, non-band-limited profile: gap / h^2 stays bounded
  std::string gaps;
  bool parseval = true;
  double prev = 0.0;
  for (int P : {33, 65, 129, 257}) {
    const double h = 1.0 / (P - 1);
    std::vector<double> u(static_cast<std::size_t>(P));
    for (int j = 0; j < P; ++j) {
      const double y = j * h;
      u[static_cast<std::size_t>(j)] = y * (1.0 - y) * std::exp(y);
    }
    const auto c = modal::sine_coeffs(u, (P - 1) / 2 - 1);
    double lhs = 0.0, rhs = 0.0;
    for (double v : u) lhs += v * v * h;
    for (double v : c) rhs += 0.5 * v * v;
    const double gap = std::abs(lhs - rhs);
    parseval = parseval && gap <= 10.0 * h * h && (prev == 0.0 || gap < prev);
    prev = gap;
    gaps += fmt("%s%.3g", P == 33 ? "" : ",", gap / (h * h));
  }
  return {sine_rt <= 1e-10 && ang_rt <= 1e-10 && parseval,
          fmt("sine round trip=%.2g angular round trip=%.2g (need <=1e-10); Parseval gap/h^2 at P=33..257: %s", sine_rt,
              ang_rt, gaps.c_str())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac9() {
  const auto base = std::filesystem::temp_directory_path() / ("pdebs_ac9_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::vector<Scenario> cases;
  {
    Scenario s;
    s.name = "square_random";
    s.plant = PlantParams(1.0, 25.0, 1.0);
    s.law = LawKind::square_findim;
    s.nx = s.ny = 32;
    s.init = InitPreset::random_band;
    s.seed = 7;
    cases.push_back(s);
  }
  {
    Scenario s;
    s.name = "strip_random";
    s.geometry = Geometry::strip;
    s.plant = PlantParams(1.0, 30.0, 2.0);
    s.law = LawKind::strip_truncated;
    s.init = InitPreset::random_band;
    s.seed = 11;
    cases.push_back(s);
  }
  std::size_t compared = 0, identical = 0;
  for (auto s : cases) {
    s.output_dir = (base / "a").string();
    const auto ra = run_scenario(s);
    s.output_dir = (base / "b").string();
    run_scenario(s);
    for (const auto& f : ra.files) {
      const auto name = std::filesystem::path(f).filename();
      if (name.extension() != ".csv") continue;
      ++compared;
      identical += slurp(base / "a" / name) == slurp(base / "b" / name) && !slurp(base / "a" / name).empty();
    }
  }
  std::filesystem::remove_all(base);
  return {compared > 0 && identical == compared, fmt("%zu/%zu CSV outputs byte-identical across repeated runs",
                                                     identical, compared)};
}

struct Criterion {
  const char* id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{{"AC-1", 5, ac1},   {"AC-2", 60, ac2}, {"AC-3", 90, ac3},
                                   {"AC-4", 60, ac4},  {"AC-5", 90, ac5}, {"AC-6", 120, ac6},
                                   {"AC-7", 60, ac7},  {"AC-8", 60, ac8}, {"AC-9", 120, ac9}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %s [%.1fs / %.0fs budget] %s\n", c.id, pass ? "PASS" : "FAIL", secs, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
