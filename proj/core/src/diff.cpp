#include "skalg/diff.hpp"

#include <algorithm>
#include <array>

namespace skalg {

Vector TotalPoint::stacked() const {
  Vector q(base.size() + fiber.size());
  q << base, fiber;
  return q;
}

TotalPoint TotalPoint::split(const Vector& q, std::size_t base_dim) {
  const auto n = static_cast<Eigen::Index>(base_dim);
  return TotalPoint{q.head(n), q.tail(q.size() - n)};
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

FdSettings& fd_settings() {
  static FdSettings settings;
  return settings;
}

double fd_step(DiffLevel level) {
  // Optimal central-difference step for a function carrying noise delta is
  // about cbrt(delta); the noise after k differentiations grows accordingly.
  static constexpr std::array<double, 4> kNested = {0.0, 5e-4, 5e-3, 2e-2};
  if (level <= 0) return fd_settings().base_step;
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(level), kNested.size() - 1);
  return std::max(kNested[k], fd_settings().base_step);
}

double scaled_step(DiffLevel level, const Vector& x) { return fd_step(level) * std::max(1.0, max_abs(x)); }

Matrix jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, DiffLevel level) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    jac.col(i) = coordinate_partial(f, x, i, level);
  }
  return jac;
}

Vector lie_bracket(const std::function<Vector(const Vector&)>& u, DiffLevel u_level,
                   const std::function<Vector(const Vector&)>& w, DiffLevel w_level, const Vector& x) {
  const Vector ux = u(x);
  const Vector wx = w(x);
  return directional(w, x, ux, w_level) - directional(u, x, wx, u_level);
}

}  // namespace skalg
