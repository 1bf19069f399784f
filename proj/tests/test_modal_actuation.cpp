#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pdebs/actuation.hpp"
#include "pdebs/modal.hpp"

using namespace pdebs;

namespace {

std::vector<double> sample(int P, auto&& f) {
  std::vector<double> u(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) u[static_cast<std::size_t>(j)] = f(static_cast<double>(j) / (P - 1));
  u.front() = 0.0;
  u.back() = 0.0;
  return u;
}

}  // namespace

TEST(SineCoeffs, SingleMode) {
  const auto c = modal::sine_coeffs(sample(129, [](double y) { return std::sin(M_PI * y); }), 3);
  EXPECT_NEAR(c[0], 1.0, 1e-10);
  EXPECT_NEAR(c[1], 0.0, 1e-10);
  EXPECT_NEAR(c[2], 0.0, 1e-10);
}

TEST(SineCoeffs, ZeroInput) {
  for (double v : modal::sine_coeffs(std::vector<double>(65, 0.0), 3)) EXPECT_EQ(v, 0.0);
}

TEST(SineCoeffs, TwoModes) {
  const auto c = modal::sine_coeffs(
      sample(129, [](double y) { return std::sin(2 * M_PI * y) + 0.5 * std::sin(3 * M_PI * y); }), 3);
  EXPECT_NEAR(c[0], 0.0, 1e-10);
  EXPECT_NEAR(c[1], 1.0, 1e-10);
  EXPECT_NEAR(c[2], 0.5, 1e-10);
}

TEST(SineCoeffs, RejectsAliasingAndNonzeroEnds) {
  EXPECT_THROW(modal::sine_coeffs(std::vector<double>(9, 0.0), 5), ConfigError);
  std::vector<double> u(17, 0.0);
  u.back() = 1.0;
  EXPECT_THROW(modal::sine_coeffs(u, 2), DomainError);
}

TEST(SineReconstruct, Trivial) {
  const std::vector<double> c{1.0, 0.0, 0.0};
  EXPECT_NEAR(modal::sine_reconstruct(c, 0.5), 1.0, 1e-15);
  EXPECT_EQ(modal::sine_reconstruct(std::vector<double>(4, 0.0), 0.37), 0.0);
}

TEST(SineTransform, PropertyRoundTripBandLimited) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int P = 33 + 16 * (trial % 8);
    const int nmax = (P - 1) / 4;
    std::vector<double> a(static_cast<std::size_t>(nmax));
    for (auto& v : a) v = U(rng);
    const auto u = sample(P, [&](double y) { return modal::sine_reconstruct(a, y); });
    const auto c = modal::sine_coeffs(u, nmax);
    for (int j = 0; j < P; ++j)
      EXPECT_NEAR(modal::sine_reconstruct(c, static_cast<double>(j) / (P - 1)), u[static_cast<std::size_t>(j)], 1e-10);
  }
}

TEST(SineTransform, PropertyParsevalSecondOrder) {
  // smooth but not band-limited: the discrete Parseval gap shrinks like h^2
  auto f = [](double y) { return y * (1.0 - y) * std::exp(y); };
  double prev = 0.0;
  for (int P : {33, 65, 129}) {
    const double h = 1.0 / (P - 1);
    const auto u = sample(P, f);
    const auto c = modal::sine_coeffs(u, (P - 1) / 2 - 1);
    double lhs = 0.0, rhs = 0.0;
    for (double v : u) lhs += v * v * h;
    for (double v : c) rhs += 0.5 * v * v;
    const double err = std::abs(lhs - rhs);
    EXPECT_LE(err, 10.0 * h * h);
    if (prev > 0.0) EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(AngularCoeffs, OrthogonalityAndScaling) {
  const modal::AngularBasis b(0.0, M_PI / 2.0, 3);
  const int P = 97;
  auto on_grid = [&](auto&& f) {
    std::vector<double> u(P);
    for (int j = 0; j < P; ++j) u[static_cast<std::size_t>(j)] = f(b.theta1 + b.span() * j / (P - 1));
    u.front() = u.back() = 0.0;
    return u;
  };
  const auto c1 = modal::angular_coeffs(on_grid([&](double t) { return b.phi(1, t); }), b);
  EXPECT_NEAR(c1[0], 1.0, 1e-10);
  EXPECT_NEAR(c1[1], 0.0, 1e-10);
  const auto c2 = modal::angular_coeffs(on_grid([&](double t) { return 0.3 * b.phi(2, t); }), b);
  EXPECT_NEAR(c2[1], 0.3, 1e-10);
  for (double v : modal::angular_coeffs(std::vector<double>(P, 0.0), b)) EXPECT_EQ(v, 0.0);
}

TEST(AngularReconstruct, MidpointAndRoundTrip) {
  const modal::AngularBasis b(0.2, 1.7, 1);
  EXPECT_NEAR(modal::angular_reconstruct(std::vector<double>{1.0}, b, 0.95), 1.0, 1e-15);
  EXPECT_EQ(modal::angular_reconstruct(std::vector<double>{0.0}, b, 0.95), 0.0);

  const modal::AngularBasis b4(0.2, 1.7, 4);
  const std::vector<double> a{0.4, -0.7, 0.1, 0.25};
  const int P = 65;
  std::vector<double> u(P);
  for (int j = 0; j < P; ++j) u[static_cast<std::size_t>(j)] = modal::angular_reconstruct(a, b4, b4.theta1 + b4.span() * j / (P - 1));
  u.front() = u.back() = 0.0;
  const auto c = modal::angular_coeffs(u, b4);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(c[static_cast<std::size_t>(n)], a[static_cast<std::size_t>(n)], 1e-10);
}

TEST(AngularBasis, Invariants) {
  EXPECT_THROW(modal::AngularBasis(1.0, 1.0, 1), DomainError);
  EXPECT_THROW(modal::AngularBasis(0.0, 7.0, 1), DomainError);
  EXPECT_THROW(modal::AngularBasis(0.0, 1.0, 0), DomainError);
}

TEST(ShapeCoeff, Piecewise) {
  EXPECT_NEAR(actuation::shape_coeff_piecewise(1, 1, 1), 4.0 / M_PI, 1e-15);
  EXPECT_NEAR(actuation::shape_coeff_piecewise(1, 1, 2), 0.0, 1e-15);
  EXPECT_NEAR(actuation::shape_coeff_piecewise(2, 1, 1), 2.0 / M_PI, 1e-15);
  EXPECT_THROW(actuation::shape_coeff_piecewise(2, 3, 1), DomainError);
}

TEST(Phi, SinusoidalBankIsIdentity) {
  for (int N = 1; N <= 6; ++N) {
    const auto phi = actuation::build_phi(actuation::ActuatorBank::sinusoidal_bank(N), N);
    EXPECT_EQ(phi.entries, Eigen::MatrixXd::Identity(N, N));
  }
}

TEST(Phi, ZeroSampledShapesGiveZeroMatrix) {
  std::vector<actuation::ShapeFunction> s{actuation::ShapeFunction::sampled(std::vector<double>(33, 0.0)),
                                          actuation::ShapeFunction::sampled(std::vector<double>(33, 0.0))};
  const auto phi = actuation::build_phi(s, 2);
  EXPECT_EQ(phi.entries, Eigen::MatrixXd::Zero(2, 2));
  EXPECT_FALSE(phi.full_row_rank);
}

TEST(Phi, SampledSinusoidMatchesAnalytic) {
  const auto s = actuation::ShapeFunction::sampled(sample(257, [](double y) { return std::sin(2 * M_PI * y); }));
  EXPECT_NEAR(s.coeff(2), 1.0, 1e-10);
  EXPECT_NEAR(s.coeff(1), 0.0, 1e-10);
}

TEST(Phi, PiecewiseEntriesElementwise) {
  const auto phi = actuation::build_phi(actuation::ActuatorBank::piecewise_bank(3), 2);
  for (int n = 1; n <= 2; ++n)
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(phi.entries(n - 1, k - 1), actuation::shape_coeff_piecewise(3, k, n));
  EXPECT_TRUE(phi.full_row_rank);
}

TEST(Pseudoinverse, TrivialCases) {
  EXPECT_TRUE(actuation::pseudoinverse(actuation::make_phi(Eigen::MatrixXd::Identity(2, 2)))
                  .isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 3);
  A(0, 0) = A(1, 1) = 1.0;
  EXPECT_TRUE(actuation::pseudoinverse(actuation::make_phi(A)).isApprox(A.transpose(), 1e-15));
}

TEST(Pseudoinverse, PropertyRightInverseOnRandom2x4) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> G;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd A(2, 4);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 4; ++k) A(i, k) = G(rng);
    const auto phi = actuation::make_phi(A);
    ASSERT_TRUE(phi.full_row_rank);
    EXPECT_LE((A * actuation::pseudoinverse(phi) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Pseudoinverse, SingleFullEdgeActuatorCannotReachModeTwo) {
  const auto bank = actuation::ActuatorBank::piecewise_bank(1);
  EXPECT_THROW(actuation::ActuatorBank(bank, 2), StabilizabilityError);
  EXPECT_NO_THROW(actuation::ActuatorBank(bank, 1));
}

TEST(Budget, Square) {
  const auto a = actuation::min_modes_square(PlantParams(1.0, 3 * M_PI * M_PI, M_PI * M_PI));
  EXPECT_NEAR(a.N0, 2.0, 1e-14);
  EXPECT_EQ(a.N, 3);
  const auto b = actuation::min_modes_square(PlantParams(1.0, 25.0, 1.0));
  EXPECT_NEAR(b.N0, std::sqrt(26.0) / M_PI, 1e-15);
  EXPECT_NEAR(b.N0, 1.623, 5e-4);
  EXPECT_EQ(b.N, 2);
  EXPECT_EQ(actuation::min_modes_square(PlantParams(1.0, -1.0, 0.5)).N, 1);
}

TEST(Budget, Strip) {
  const auto b = actuation::min_modes_strip(PlantParams(1.0, 30.0, 2.0));
  EXPECT_NEAR(b.N0, 0.9003163161571061, 1e-15);
  EXPECT_EQ(b.N, 1);
}

TEST(Budget, Sector) {
  const auto a = actuation::min_modes_sector(PlantParams(1.0, 3.0, 1.0), 0.0, M_PI / 2.0, 1.0);
  EXPECT_NEAR(a.N0, 1.0, 1e-15);
  EXPECT_EQ(a.N, 2);
  EXPECT_EQ(actuation::min_modes_sector(PlantParams(1.0, -1.0, 1.0), 0.0, 1.0, 1.0).N, 1);
  const auto c = actuation::min_modes_sector(PlantParams(1.0, M_PI * M_PI - 1.0, 1.0), 0.0, M_PI, 1.0);
  EXPECT_NEAR(c.N0, M_PI, 1e-14);
  EXPECT_EQ(c.N, 4);
}

TEST(Budget, PropertyStrictExceedance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.0, 200.0);
  for (int i = 0; i < 200; ++i) {
    const auto b = actuation::min_modes_square(PlantParams(1.0 + U(rng) / 100.0, U(rng), 0.1 + U(rng) / 50.0));
    EXPECT_GT(b.N, b.N0);
    EXPECT_LE(b.N - 1, b.N0 * (1.0 + 1e-12));
  }
}

TEST(ConditionNumber, TrivialAndMonotone) {
  EXPECT_NEAR(actuation::condition_number(actuation::make_phi(Eigen::MatrixXd::Identity(3, 3))), 1.0, 1e-14);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 3);
  D(0, 0) = 2.0;
  D(1, 1) = 1.0;
  EXPECT_NEAR(actuation::condition_number(actuation::make_phi(D)), 2.0, 1e-14);
  double prev = 0.0;
  for (int N = 2; N <= 6; ++N) {
    const double k = actuation::condition_number(actuation::build_phi(actuation::ActuatorBank::piecewise_bank(N), N));
    EXPECT_GT(k, prev) << "N=" << N;
    prev = k;
  }
}
