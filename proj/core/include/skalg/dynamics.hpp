#pragma once

// Vector fields on the total space of D and fixed-step integration.

#include "skalg/geometry.hpp"

#include <iosfwd>
#include <optional>

namespace skalg {

/// Fiber-preserving force F^A(x, y).
class ForceField {
 public:
  using Fn = std::function<Vector(const BasePoint&, const FiberPoint&)>;

  ForceField() = default;
  ForceField(std::size_t rank, Fn fn, DiffLevel level = 0) : rank_(rank), fn_(std::move(fn)), level_(level) {}

  static ForceField zero(std::size_t rank) { return ForceField(rank, {}, 0); }
  /// Components over the coordinates and the fiber names (y1..ym by default).
  static ForceField from_expressions(const std::vector<Expr>& components, const std::vector<std::string>& coordinates,
                                     const Bindings& parameters, std::vector<std::string> fiber_names = {});
  /// F = -grad V, independent of y.
  static ForceField from_potential(const Algebroid& s, const BundleMetric& g, const ScalarField& v);

  Vector operator()(const BasePoint& x, const FiberPoint& y) const {
    return fn_ ? fn_(x, y) : Vector::Zero(static_cast<Eigen::Index>(rank_)).eval();
  }
  bool is_zero() const { return !fn_; }
  std::size_t rank() const { return rank_; }
  DiffLevel level() const { return level_; }

 private:
  std::size_t rank_ = 0;
  Fn fn_;
  DiffLevel level_ = 0;
};

ForceField operator+(const ForceField& a, const ForceField& b);

/// Default fiber coordinate names y1..ym.
std::vector<std::string> fiber_names(std::size_t rank);

/// Control coefficients u^l as expressions in t (time-driven) or in the base
/// coordinates (state feedback).
class ControlSignal {
 public:
  enum class Mode { TimeDriven, StateFeedback };

  ControlSignal() = default;
  /// Throws std::invalid_argument if an expression uses a variable the mode
  /// does not provide.
  ControlSignal(std::vector<Expr> coefficients, Mode mode, const std::vector<std::string>& coordinates,
                const Bindings& parameters);

  static ControlSignal zero(std::size_t count);

  Vector operator()(double t, const BasePoint& x) const;
  std::size_t size() const { return size_; }
  Mode mode() const { return mode_; }

 private:
  std::size_t size_ = 0;
  Mode mode_ = Mode::TimeDriven;
  std::vector<BoundExpr> bound_;
};

/// xi(x, y) = (rho(x) y, -Gamma(x)(y, y)), stacked base then fiber.
Vector geodesic_spray(const Algebroid& s, const BundleMetric& g, const TotalPoint& q);

/// Spray plus the vertical force term F(x, y).
Vector forced_field(const Algebroid& s, const BundleMetric& g, const ForceField& f, const TotalPoint& q);

/// Forced field plus sum_l u^l(t, x) Y_l(x).
Vector controlled_field(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                        const std::vector<Section>& inputs, const ControlSignal& u, double t, const TotalPoint& q);

/// Time-dependent vector field on the stacked total-space coordinates.
using TotalField = std::function<Vector(double, const TotalPoint&)>;

/// Classical RK4 with n = round((t1 - t0) / step) equal steps. Stops early
/// and flags the trajectory truncated when a sample leaves the chart (if
/// given) or the field throws; the diagnostic names the cause.
Trajectory integrate(const TotalField& field, const TotalPoint& q0, double t0, double t1, double step,
                     const Chart* chart = nullptr);

/// Geodesic of (s, g) with the potential/force folded into `f`.
Trajectory integrate_forced(const Algebroid& s, const BundleMetric& g, const ForceField& f, const TotalPoint& q0,
                            double t0, double t1, double step, const Chart* chart = nullptr);

/// Integral curve of rho(X) from p0. Fiber samples have size zero.
Trajectory base_flow(const Algebroid& s, const Section& x, const BasePoint& p0, double t0, double t1, double step,
                     const Chart* chart = nullptr);

/// Same times and base samples as `sigma`, fiber X(sigma(t_k)).
Trajectory lift(const Section& x, const Trajectory& sigma);

/// 1/2 G(y, y) + V(x).
double energy(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const TotalPoint& q);

/// Writes `t,x1..xn,y1..ym` rows with 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& gamma);

}  // namespace skalg
