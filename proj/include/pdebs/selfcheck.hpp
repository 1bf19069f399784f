#pragma once

// Fast invariant suite behind `pdebs selfcheck`: special-function identities,
// kernel identities and residual convergence, Phi Phi^+ = I, and transform
// round-trip / Parseval.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdebs/actuation.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/modal.hpp"
#include "pdebs/specfun.hpp"

namespace pdebs::selfcheck {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;  // the measured quantity compared against the bound
  double bound = 0.0;
};

inline std::vector<Check> run() {
  std::vector<Check> out;

  {
    double worst = 0.0;
    for (int i = 0; i <= 5000; ++i) {
      const double z = 0.01 * i;
      const double a = z * specfun::i1_ratio(z), b = specfun::bessel_i1(z);
      if (b != 0.0) worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    out.push_back({"i1_ratio_identity", worst <= 1e-12, worst, 1e-12});
  }
  {
    bool mono = true;
    double prev = specfun::bessel_i1(0.0);
    for (int i = 1; i <= 5000; ++i) {
      const double v = specfun::bessel_i1(0.01 * i);
      mono = mono && v > prev;
      prev = v;
    }
    out.push_back({"i1_monotone", mono, mono ? 0.0 : 1.0, 0.0});
  }
  {
    const PlantParams p(1.0, 7.0, 1.0);  // lambda0 = 8
    double worst = 0.0;
    bool edge = true;
    for (int i = 1; i <= 10; ++i) {
      const double x = 0.1 * i;
      worst = std::max(worst, std::abs(kernels::kernel_1d(p, x, x) + 4.0 * x) / (4.0 * x));
      edge = edge && kernels::kernel_1d(p, x, 0.0) == 0.0;
    }
    out.push_back({"kernel_diagonal", worst <= 1e-12, worst, 1e-12});
    out.push_back({"kernel_edge", edge, edge ? 0.0 : 1.0, 0.0});
    const double r8 = kernels::kernel_residual_1d(p, std::ldexp(1.0, -8));
    const double r9 = kernels::kernel_residual_1d(p, std::ldexp(1.0, -9));
    const double ratio = r9 / r8;
    out.push_back({"kernel_residual_ratio", ratio >= 0.2 && ratio <= 0.35, ratio, 0.35});
  }
  {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    int tested = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int N = 1 + static_cast<int>(rng() % 6);
      const int m = N + static_cast<int>(rng() % static_cast<std::uint64_t>(13 - N));
      Eigen::MatrixXd A(N, m);
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < m; ++k) A(i, k) = U(rng);
      const auto phi = actuation::make_phi(A);
      if (!phi.full_row_rank) continue;
      const Eigen::MatrixXd P = actuation::pseudoinverse(phi);
      worst = std::max(worst, (A * P - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff());
      ++tested;
    }
    out.push_back({"phi_pinv_identity", tested == 50 && worst <= 1e-10, worst, 1e-10});
  }
  {
    const int P = 257;
    const double h = 1.0 / (P - 1);
    std::vector<double> u(P);
    const double c[4] = {0.7, -0.2, 0.45, 0.1};
    for (int j = 0; j < P; ++j) {
      double s = 0.0;
      for (int n = 0; n < 4; ++n) s += c[n] * std::sin((n + 1) * M_PI * j * h);
      u[static_cast<std::size_t>(j)] = s;
    }
    u.front() = 0.0;
    u.back() = 0.0;
    const int nmax = (P - 1) / 4;
    const auto co = modal::sine_coeffs(u, nmax);
    double rt = 0.0;
    for (int j = 0; j < P; ++j) rt = std::max(rt, std::abs(modal::sine_reconstruct(co, j * h) - u[static_cast<std::size_t>(j)]));
    out.push_back({"sine_round_trip", rt <= 1e-10, rt, 1e-10});
    double lhs = 0.0, rhs = 0.0;
    for (double v : u) lhs += v * v * h;
    for (double v : co) rhs += 0.5 * v * v;
    const double err = std::abs(lhs - rhs);
    out.push_back({"parseval", err <= 10.0 * h * h, err, 10.0 * h * h});
  }
  return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace pdebs::selfcheck
