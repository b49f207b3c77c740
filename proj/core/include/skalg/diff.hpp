#pragma once

// Central finite differences shared by every module.

#include "skalg/types.hpp"

#include <cmath>
#include <functional>
#include <type_traits>

namespace skalg {

/// Process-wide finite-difference configuration. Set before starting any
/// concurrent work; reads are not synchronized.
struct FdSettings {
  /// Step for functions evaluated directly from expressions, before the
  /// max(1, |x|) scaling.
  double base_step = 1e-6;
};

FdSettings& fd_settings();

/// Unscaled step used to differentiate a function of the given level.
/// Level 0 uses the configured base step; nested levels use progressively
/// larger steps so truncation and round-off stay balanced.
double fd_step(DiffLevel level);

/// Step for differentiating at point x: fd_step(level) * max(1, |x|_inf).
double scaled_step(DiffLevel level, const Vector& x);

/// d/ds f(x + s v) at s = 0 by a central difference whose largest coordinate
/// displacement equals scaled_step(level, x). Returns zero for v = 0.
template <class F>
auto directional(const F& f, const Vector& x, const Vector& v, DiffLevel level) -> decltype(f(x)) {
  using Out = decltype(f(x));
  const double vmax = max_abs(v);
  if (vmax == 0.0) {
    Out zero = f(x);
    if constexpr (std::is_same_v<Out, double>) {
      return 0.0;
    } else {
      zero.setZero();
      return zero;
    }
  }
  const double h = scaled_step(level, x) / vmax;
  const Vector hi = x + h * v;
  const Vector lo = x - h * v;
  if constexpr (std::is_same_v<Out, double>) {
    return (f(hi) - f(lo)) / (2.0 * h);
  } else {
    Out d = (f(hi) - f(lo)) / (2.0 * h);
    return d;
  }
}

/// Partial derivative along coordinate i.
template <class F>
auto coordinate_partial(const F& f, const Vector& x, Eigen::Index i, DiffLevel level) -> decltype(f(x)) {
  Vector e = Vector::Zero(x.size());
  e(i) = 1.0;
  return directional(f, x, e, level);
}

/// Jacobian of a vector function R^n -> R^k by central differences.
Matrix jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, DiffLevel level);

/// Lie bracket [U, W] = DW.U - DU.W of vector fields on a coordinate space.
/// Returns the value at x.
Vector lie_bracket(const std::function<Vector(const Vector&)>& u, DiffLevel u_level,
                   const std::function<Vector(const Vector&)>& w, DiffLevel w_level, const Vector& x);

}  // namespace skalg
