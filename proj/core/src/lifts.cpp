#include "skalg/diff.hpp"
#include "skalg/dynamics.hpp"
#include "skalg/geometry.hpp"

namespace skalg {

Vector symprod_via_lifts(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                         const BasePoint& p, const FiberPoint& y0) {
  const std::size_t n = s.base_dim();
  const auto nn = static_cast<Eigen::Index>(n);
  const auto m = static_cast<Eigen::Index>(s.rank());

  auto vertical = [nn, m](const Section& z) {
    return [z, nn, m](const Vector& q) {
      Vector v = Vector::Zero(nn + m);
      v.tail(m) = z(q.head(nn));
      return v;
    };
  };
  const auto xv = vertical(x);
  const auto yv = vertical(y);
  auto spray = [&s, &g, n](const Vector& q) { return geodesic_spray(s, g, TotalPoint::split(q, n)); };
  const DiffLevel spray_level = std::max({g.level() + 1, s.anchor_level(), s.structure_level()});

  // The spray is quadratic and the lifts constant along the fibers, so the
  // fiber-direction differences below are exact up to round-off.
  auto inner = [&](const Vector& q) { return lie_bracket(spray, spray_level, yv, y.level(), q); };
  const DiffLevel inner_level = std::max(spray_level, y.level()) + 1;

  TotalPoint q0{p, y0};
  const Vector outer = lie_bracket(xv, x.level(), inner, inner_level, q0.stacked());
  return outer.tail(m);
}

}  // namespace skalg
