#pragma once

// Finite-dimensional boundary actuation: shape functions, the mode/actuator
// matrix Phi, its pseudoinverse, and the mode budgets that say how many modes
// need active control.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/modal.hpp"

namespace pdebs::actuation {

/// phi_{k,n} = (2/(n pi)) [cos(n pi (k-1)/m) - cos(n pi k/m)].
inline double shape_coeff_piecewise(int m, int k, int n) {
  if (m < 1 || k < 1 || k > m) throw DomainError("shape_coeff_piecewise: need 1 <= k <= m");
  if (n < 1) throw DomainError("shape_coeff_piecewise: need n >= 1");
  const double a = n * M_PI * static_cast<double>(k - 1) / m;
  const double b = n * M_PI * static_cast<double>(k) / m;
  return 2.0 / (n * M_PI) * (std::cos(a) - std::cos(b));
}

struct PiecewiseConstant {
  int m = 1;
  int k = 1;
};
struct Sinusoidal {
  int k = 1;
};
/// Samples on y_j = j/(P-1), endpoints included.
struct Sampled {
  std::vector<double> values;
};

class ShapeFunction {
public:
  using Kind = std::variant<PiecewiseConstant, Sinusoidal, Sampled>;

  explicit ShapeFunction(Kind kind) : kind_(std::move(kind)) { validate(); }

  static ShapeFunction piecewise(int m, int k) { return ShapeFunction(PiecewiseConstant{m, k}); }
  static ShapeFunction sinusoidal(int k) { return ShapeFunction(Sinusoidal{k}); }
  static ShapeFunction sampled(std::vector<double> v) { return ShapeFunction(Sampled{std::move(v)}); }

  [[nodiscard]] const Kind& kind() const { return kind_; }

  /// Shape value at y in [0, 1]. Piecewise actuators own [(k-1)/m, k/m), the last one is closed.
  [[nodiscard]] double operator()(double y) const {
    if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_)) {
      const double lo = static_cast<double>(pc->k - 1) / pc->m;
      const double hi = static_cast<double>(pc->k) / pc->m;
      return (y >= lo && (y < hi || (pc->k == pc->m && y <= hi))) ? 1.0 : 0.0;
    }
    if (const auto* s = std::get_if<Sinusoidal>(&kind_)) return std::sin(s->k * M_PI * y);
    const auto& v = std::get<Sampled>(kind_).values;
    const double pos = std::clamp(y, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto j = std::min(static_cast<std::size_t>(pos), v.size() - 2);
    const double f = pos - static_cast<double>(j);
    return (1.0 - f) * v[j] + f * v[j + 1];
  }

  /// Sine coefficient phi_{k,n}.
  [[nodiscard]] double coeff(int n) const {
    if (n < 1) throw DomainError("ShapeFunction::coeff: n must be >= 1");
    if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_)) return shape_coeff_piecewise(pc->m, pc->k, n);
    if (const auto* s = std::get_if<Sinusoidal>(&kind_)) return s->k == n ? 1.0 : 0.0;
    const auto& v = std::get<Sampled>(kind_).values;
    if (2 * static_cast<std::size_t>(n) >= v.size())
      throw ConfigError("ShapeFunction::coeff: mode " + std::to_string(n) + " aliases on " +
                        std::to_string(v.size()) + " samples");
    // endpoint values are multiplied by sin(0) = sin(n pi) = 0 and drop out
    std::vector<double> interior(v);
    interior.front() = 0.0;
    interior.back() = 0.0;
    return modal::sine_coeffs(interior, n).back();
  }

private:
  void validate() const {
    if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_)) {
      if (pc->m < 1 || pc->k < 1 || pc->k > pc->m) throw DomainError("piecewise shape: need 1 <= k <= m");
    } else if (const auto* s = std::get_if<Sinusoidal>(&kind_)) {
      if (s->k < 1) throw DomainError("sinusoidal shape: k must be >= 1");
    } else {
      const auto& v = std::get<Sampled>(kind_).values;
      if (v.size() < 3) throw DomainError("sampled shape: need at least 3 samples");
      for (double x : v)
        if (!std::isfinite(x)) throw DomainError("sampled shape: non-finite value");
    }
  }

  Kind kind_;
};

/// N x m matrix, entry (n-1, k-1) = phi_{k,n}.
struct PhiMatrix {
  Eigen::MatrixXd entries;
  Eigen::VectorXd singular_values;
  bool full_row_rank = false;

  [[nodiscard]] Eigen::Index modes() const { return entries.rows(); }
  [[nodiscard]] Eigen::Index actuators() const { return entries.cols(); }
};

inline constexpr double kRankTolerance = 1e-10;

inline PhiMatrix make_phi(Eigen::MatrixXd entries) {
  PhiMatrix phi;
  phi.entries = std::move(entries);
  if (phi.entries.rows() < 1 || phi.entries.cols() < 1) throw DomainError("PhiMatrix: need N >= 1 and m >= 1");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi.entries);
  phi.singular_values = svd.singularValues();
  const double smax = phi.singular_values.size() ? phi.singular_values(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < phi.singular_values.size(); ++i)
    if (phi.singular_values(i) > kRankTolerance * smax) ++rank;
  phi.full_row_rank = smax > 0.0 && rank == phi.entries.rows();
  return phi;
}

inline PhiMatrix build_phi(const std::vector<ShapeFunction>& shapes, int N) {
  if (N < 1) throw DomainError("build_phi: N must be >= 1");
  if (shapes.empty()) throw DomainError("build_phi: no shape functions");
  Eigen::MatrixXd e(N, static_cast<Eigen::Index>(shapes.size()));
  for (Eigen::Index k = 0; k < e.cols(); ++k)
    for (int n = 1; n <= N; ++n) e(n - 1, k) = shapes[static_cast<std::size_t>(k)].coeff(n);
  return make_phi(std::move(e));
}

/// Phi^T (Phi Phi^T)^{-1}; requires full row rank at 1e-10 relative to sigma_max.
inline Eigen::MatrixXd pseudoinverse(const PhiMatrix& phi) {
  const Eigen::MatrixXd& A = phi.entries;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTolerance * smax) ++rank;
  if (smax == 0.0 || rank < A.rows()) {
    std::ostringstream msg;
    msg << "Phi has rank " << rank << " < N = " << A.rows()
        << "; the actuators cannot independently move the mode subspace spanned by";
    const Eigen::MatrixXd& U = svd.matrixU();
    for (Eigen::Index c = rank; c < A.rows(); ++c) {
      msg << " (";
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        const double v = std::abs(U(r, c)) < 1e-12 ? 0.0 : U(r, c);
        msg << (r ? ", " : "") << v;
      }
      msg << ")";
    }
    throw StabilizabilityError(msg.str());
  }
  const Eigen::MatrixXd gram = A * A.transpose();
  const Eigen::MatrixXd X = gram.ldlt().solve(A);  // (Phi Phi^T)^{-1} Phi
  return X.transpose();
}

/// sigma_max / sigma_min from the eigenvalues of Phi Phi^T; +inf when rank deficient.
inline double condition_number(const PhiMatrix& phi) {
  const Eigen::MatrixXd gram = phi.entries * phi.entries.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  const double smax = std::sqrt(std::max(0.0, ev(ev.size() - 1)));
  const double smin = std::sqrt(std::max(0.0, ev(0)));
  if (smax == 0.0 || smin <= kRankTolerance * smax) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

/// Shape functions together with Phi and its pseudoinverse for the first N modes.
struct ActuatorBank {
  std::vector<ShapeFunction> shapes;
  PhiMatrix phi;
  Eigen::MatrixXd phi_pinv;

  ActuatorBank(std::vector<ShapeFunction> s, int N)
      : shapes(std::move(s)), phi(build_phi(shapes, N)), phi_pinv(pseudoinverse(phi)) {}

  [[nodiscard]] int modes() const { return static_cast<int>(phi.modes()); }
  [[nodiscard]] int actuators() const { return static_cast<int>(shapes.size()); }

  static std::vector<ShapeFunction> piecewise_bank(int m) {
    std::vector<ShapeFunction> out;
    for (int k = 1; k <= m; ++k) out.push_back(ShapeFunction::piecewise(m, k));
    return out;
  }
  static std::vector<ShapeFunction> sinusoidal_bank(int m) {
    std::vector<ShapeFunction> out;
    for (int k = 1; k <= m; ++k) out.push_back(ShapeFunction::sinusoidal(k));
    return out;
  }
};

struct DecayBudget {
  PlantParams params;
  double N0 = 0.0;
  int N = 1;
};

namespace detail {

// Strict exceedance N > N0. The relative nudge keeps an exactly-integer N0
// from rounding down to N0 itself.
inline DecayBudget budget_from_threshold(const PlantParams& p, double threshold) {
  DecayBudget b;
  b.params = p;
  b.N0 = threshold;
  b.N = static_cast<int>(std::floor(threshold * (1.0 + 1e-12))) + 1;
  return b;
}

inline double rate_budget(const PlantParams& p) { return std::max(0.0, (p.c + p.lambda) / p.epsilon); }

}  // namespace detail

/// Square: N0 = sqrt((c + lambda)/(pi^2 epsilon)).
inline DecayBudget min_modes_square(const PlantParams& p) {
  p.validate();
  return detail::budget_from_threshold(p, std::sqrt(detail::rate_budget(p)) / M_PI);
}

/// Strip wavenumber cutoff: N0 = sqrt((c + lambda)/(4 pi^2 epsilon)).
inline DecayBudget min_modes_strip(const PlantParams& p) {
  p.validate();
  return detail::budget_from_threshold(p, std::sqrt(detail::rate_budget(p)) / (2.0 * M_PI));
}

/// Sector: threshold = sqrt((c + lambda)/epsilon) (theta2 - theta1) R / pi.
inline DecayBudget min_modes_sector(const PlantParams& p, double theta1, double theta2, double R) {
  p.validate();
  if (!(theta2 > theta1)) throw DomainError("min_modes_sector: need theta1 < theta2");
  if (!(R > 0.0)) throw DomainError("min_modes_sector: R must be > 0");
  return detail::budget_from_threshold(p, std::sqrt(detail::rate_budget(p)) * (theta2 - theta1) * R / M_PI);
}

}  // namespace pdebs::actuation
