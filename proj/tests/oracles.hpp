#pragma once

// Test-only reference implementations, written independently of the library
// code paths they check.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// I1(z) from its power series in long double with Kahan summation; 200 terms.
inline long double bessel_i1(long double z) {
  const long double h = z / 2.0L;
  long double term = h, sum = 0.0L, comp = 0.0L;
  for (int k = 0; k < 200; ++k) {
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    term *= h * h / (static_cast<long double>(k + 1) * static_cast<long double>(k + 2));
    if (term == 0.0L) break;
  }
  return sum;
}

/// K(x, xi) = -l0 xi I1(z)/z through the oracle series.
inline double kernel_1d(double l0, double x, double xi) {
  const long double z = std::sqrt(static_cast<long double>(l0) * (x * x - xi * xi));
  const long double ratio = z == 0.0L ? 0.5L : bessel_i1(z) / z;
  return static_cast<double>(-l0 * xi * ratio);
}

/// Dense 5-point CN step on an nx x ny interior grid of [0, L]^2, zero Dirichlet
/// except one edge held at `edge` (east: x = L indexed by j; north: y = L by i).
/// Values are column-major with i fastest.
inline Eigen::MatrixXd cn_rect(const Eigen::MatrixXd& u0, const Eigen::VectorXd& edge, bool east, double eps,
                               double lambda, double L, double dt) {
  const int nx = static_cast<int>(u0.rows()), ny = static_cast<int>(u0.cols());
  const double hx = L / (nx + 1), hy = L / (ny + 1);
  const int n = nx * ny;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto id = [nx](int i, int j) { return i + nx * j; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = id(i, j);
      A(k, k) = -2.0 * eps / (hx * hx) - 2.0 * eps / (hy * hy) + lambda;
      if (i > 0) A(k, id(i - 1, j)) = eps / (hx * hx);
      if (i + 1 < nx) A(k, id(i + 1, j)) = eps / (hx * hx);
      else if (east) b(k) = eps / (hx * hx) * edge(j);
      if (j > 0) A(k, id(i, j - 1)) = eps / (hy * hy);
      if (j + 1 < ny) A(k, id(i, j + 1)) = eps / (hy * hy);
      else if (!east) b(k) = eps / (hy * hy) * edge(i);
    }
  const Eigen::Map<const Eigen::VectorXd> v0(u0.data(), n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = (I + 0.5 * dt * A) * v0 + dt * b;
  const Eigen::VectorXd v1 = (I - 0.5 * dt * A).partialPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(v1.data(), nx, ny);
}

/// Dense CN step for the sector: conservative radial flux on staggered centres
/// (zero flux at r = 0, u(R) = edge imposed half a cell out) plus the 3-point
/// angular difference with zero ends. u0 is (nr, ntheta).
inline Eigen::MatrixXd cn_polar(const Eigen::MatrixXd& u0, const Eigen::VectorXd& edge, double eps, double lambda,
                                double R, double span, double dt) {
  const int nr = static_cast<int>(u0.rows()), nt = static_cast<int>(u0.cols());
  const double dr = R / nr, dth = span / (nt + 1);
  const int n = nr * nt;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto id = [nr](int j, int l) { return j + nr * l; };
  for (int l = 0; l < nt; ++l)
    for (int j = 0; j < nr; ++j) {
      const int k = id(j, l);
      const double r = (j + 0.5) * dr;
      const double lo_face = j * dr;
      const double wl = eps * lo_face / (r * dr * dr);
      A(k, k) += lambda;
      if (j > 0) {
        A(k, id(j - 1, l)) += wl;
        A(k, k) -= wl;
      }
      if (j + 1 < nr) {
        const double wh = eps * (j + 1) * dr / (r * dr * dr);
        A(k, id(j + 1, l)) += wh;
        A(k, k) -= wh;
      } else {
        const double wh = eps * R / (r * dr * 0.5 * dr);
        b(k) += wh * edge(l);
        A(k, k) -= wh;
      }
      const double wa = eps / (r * r * dth * dth);
      A(k, k) -= 2.0 * wa;
      if (l > 0) A(k, id(j, l - 1)) += wa;
      if (l + 1 < nt) A(k, id(j, l + 1)) += wa;
    }
  const Eigen::Map<const Eigen::VectorXd> v0(u0.data(), n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = (I + 0.5 * dt * A) * v0 + dt * b;
  const Eigen::VectorXd v1 = (I - 0.5 * dt * A).partialPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(v1.data(), nr, nt);
}

/// Composite Simpson on [a, b] with an even panel count.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
