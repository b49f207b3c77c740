#pragma once

// Bundle metric, musical isomorphisms and the Levi-Civita connection of a
// skew-symmetric algebroid.

#include "skalg/algebroid.hpp"

#include <optional>
#include <stdexcept>

namespace skalg {

class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BundleMetric {
 public:
  using Fn = std::function<Matrix(const BasePoint&)>;

  BundleMetric() = default;
  BundleMetric(std::size_t rank, Fn fn, DiffLevel level = 0) : rank_(rank), fn_(std::move(fn)), level_(level) {}

  /// Reads the upper triangle of `entries` (m x m). Lower-triangle entries
  /// are ignored.
  static BundleMetric from_expressions(const std::vector<std::vector<Expr>>& entries,
                                       const std::vector<std::string>& coordinates, const Bindings& parameters);
  static BundleMetric constant(Matrix g);

  Matrix operator()(const BasePoint& x) const { return fn_(x); }
  std::size_t rank() const { return rank_; }
  DiffLevel level() const { return level_; }

 private:
  std::size_t rank_ = 0;
  Fn fn_;
  DiffLevel level_ = 0;
};

double metric_eval(const BundleMetric& g, const Section& x, const Section& y, const BasePoint& p);
double metric_eval(const BundleMetric& g, const Vector& x, const Vector& y, const BasePoint& p);
Vector flat(const BundleMetric& g, const Vector& x, const BasePoint& p);
/// Throws SingularMetricError when G(p) is numerically singular.
Vector sharp(const BundleMetric& g, const Vector& kappa, const BasePoint& p);
/// Solves G(p) Z = B column by column; throws SingularMetricError.
Matrix solve_metric(const Matrix& gp, const Matrix& rhs);

struct MetricDiagnostic {
  bool ok = true;
  double worst_eigenvalue = 0.0;
  std::optional<BasePoint> witness;
};

/// Smallest eigenvalue over the points (or smallest |eigenvalue| when only
/// nondegeneracy is required). ok is false if some point fails.
MetricDiagnostic check_metric(const BundleMetric& g, const std::vector<BasePoint>& points,
                              bool require_positive = true);

/// Gamma^A_BC at a point, with nabla_{e_B} e_C = Gamma^A_BC e_A.
struct ChristoffelTensor {
  Tensor3 gamma;
  BasePoint point;

  double operator()(std::size_t a, std::size_t b, std::size_t c) const { return gamma(a, b, c); }
  std::size_t rank() const { return gamma.dim(); }
  /// Gamma^A_BC u^B v^C.
  Vector contract(const Vector& u, const Vector& v) const;
};

/// Right side of the Koszul formula for basis sections, R(E, B, C) =
/// 2 G(nabla_{e_B} e_C, e_E).
Tensor3 koszul_rhs(const Algebroid& s, const BundleMetric& g, const BasePoint& p);

ChristoffelTensor christoffel(const Algebroid& s, const BundleMetric& g, const BasePoint& p);

/// (nabla_X Y)^A = rho(X)(Y^A) + Gamma^A_BC X^B Y^C.
Vector covariant_derivative(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                            const BasePoint& p);
Section covariant_derivative_section(const Algebroid& s, const BundleMetric& g, const Section& x,
                                     const Section& y);

/// Covariant derivative along gamma of the samples w (one per trajectory
/// sample) at sample index k. The time derivative is a second-order finite
/// difference, one-sided at the ends.
Vector covariant_derivative_along(const Algebroid& s, const BundleMetric& g, const Trajectory& gamma,
                                  const std::vector<Vector>& w, std::size_t k);

/// <X:Y> = nabla_X Y + nabla_Y X.
Vector symmetric_product(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                         const BasePoint& p);
Section symmetric_product_section(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y);

/// <X:Y> computed as the fiber part of [X^v, [xi, Y^v]] on the total space,
/// with xi the geodesic spray and ^v the vertical lift, evaluated at (p, y0).
Vector symprod_via_lifts(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                         const BasePoint& p, const FiberPoint& y0);

/// sharp(d^D V).
Vector gradient(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const BasePoint& p);
Section gradient_section(const Algebroid& s, const BundleMetric& g, const ScalarField& v);

}  // namespace skalg
