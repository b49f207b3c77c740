#include "skalg/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace skalg {

namespace {

std::span<const double> as_span(const Vector& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

}  // namespace

std::vector<std::string> fiber_names(std::size_t rank) {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < rank; ++a) out.push_back("y" + std::to_string(a + 1));
  return out;
}

ForceField ForceField::from_expressions(const std::vector<Expr>& components, const std::vector<std::string>& coordinates,
                                        const Bindings& parameters, std::vector<std::string> fiber) {
  const std::size_t m = components.size();
  if (fiber.empty()) fiber = fiber_names(m);
  if (fiber.size() != m) throw std::invalid_argument("force: one fiber name per component");
  std::vector<std::string> slots = coordinates;
  slots.insert(slots.end(), fiber.begin(), fiber.end());
  auto bound = std::make_shared<std::vector<BoundExpr>>();
  for (const auto& e : components) bound->emplace_back(e, slots, parameters);
  const std::size_t n = coordinates.size();
  return ForceField(
      m,
      [bound, n, m](const BasePoint& x, const FiberPoint& y) {
        std::vector<double> values(n + m);
        for (std::size_t i = 0; i < n; ++i) values[i] = x(static_cast<Eigen::Index>(i));
        for (std::size_t a = 0; a < m; ++a) values[n + a] = y(static_cast<Eigen::Index>(a));
        Vector out(static_cast<Eigen::Index>(m));
        for (std::size_t a = 0; a < m; ++a) out(static_cast<Eigen::Index>(a)) = (*bound)[a](values);
        return out;
      },
      0);
}

ForceField ForceField::from_potential(const Algebroid& s, const BundleMetric& g, const ScalarField& v) {
  return ForceField(
      s.rank(), [s, g, v](const BasePoint& x, const FiberPoint&) { return (-gradient(s, g, v, x)).eval(); },
      std::max(v.level() + 1, g.level()));
}

ForceField operator+(const ForceField& a, const ForceField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return ForceField(
      a.rank(), [a, b](const BasePoint& x, const FiberPoint& y) { return (a(x, y) + b(x, y)).eval(); },
      std::max(a.level(), b.level()));
}

ControlSignal::ControlSignal(std::vector<Expr> coefficients, Mode mode, const std::vector<std::string>& coordinates,
                             const Bindings& parameters)
    : size_(coefficients.size()), mode_(mode) {
  const std::vector<std::string> slots = mode == Mode::TimeDriven ? std::vector<std::string>{"t"} : coordinates;
  for (const auto& e : coefficients) {
    for (const auto& v : e.free_variables()) {
      const bool is_slot = std::find(slots.begin(), slots.end(), v) != slots.end();
      if (!is_slot && parameters.find(v) == parameters.end()) {
        throw std::invalid_argument("control '" + e.to_string() + "': variable '" + v + "' is not available in " +
                                    (mode == Mode::TimeDriven ? "time-driven" : "state-feedback") + " mode");
      }
    }
    bound_.emplace_back(e, slots, parameters);
  }
}

ControlSignal ControlSignal::zero(std::size_t count) {
  ControlSignal u;
  u.size_ = count;
  return u;
}

Vector ControlSignal::operator()(double t, const BasePoint& x) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(size_));
  if (bound_.empty()) return out;
  const double time[] = {t};
  const std::span<const double> values = mode_ == Mode::TimeDriven ? std::span<const double>(time) : as_span(x);
  for (std::size_t l = 0; l < size_; ++l) out(static_cast<Eigen::Index>(l)) = bound_[l](values);
  return out;
}

Vector geodesic_spray(const Algebroid& s, const BundleMetric& g, const TotalPoint& q) {
  const ChristoffelTensor gamma = christoffel(s, g, q.base);
  TotalPoint d{s.anchor(q.base) * q.fiber, -gamma.contract(q.fiber, q.fiber)};
  return d.stacked();
}

Vector forced_field(const Algebroid& s, const BundleMetric& g, const ForceField& f, const TotalPoint& q) {
  Vector d = geodesic_spray(s, g, q);
  if (!f.is_zero()) d.tail(static_cast<Eigen::Index>(s.rank())) += f(q.base, q.fiber);
  return d;
}

Vector controlled_field(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                        const std::vector<Section>& inputs, const ControlSignal& u, double t, const TotalPoint& q) {
  if (inputs.size() != u.size()) throw std::invalid_argument("controlled_field: one control per input section");
  Vector d = forced_field(s, g, f, q);
  const Vector uv = u(t, q.base);
  auto fiber = d.tail(static_cast<Eigen::Index>(s.rank()));
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    const double ul = uv(static_cast<Eigen::Index>(l));
    if (ul != 0.0) fiber += ul * inputs[l](q.base);
  }
  return d;
}

Trajectory integrate(const TotalField& field, const TotalPoint& q0, double t0, double t1, double step,
                     const Chart* chart) {
  if (!(step > 0.0)) throw std::invalid_argument("integrate: step must be positive");
  if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");
  const auto steps = std::max<long long>(1, std::llround((t1 - t0) / step));
  const double h = (t1 - t0) / static_cast<double>(steps);
  const std::size_t n = static_cast<std::size_t>(q0.base.size());

  Trajectory out;
  out.step = h;
  out.integrator = "rk4";
  out.append(t0, q0.base, q0.fiber);
  if (chart != nullptr && !chart->admissible(q0.base)) {
    out.truncated = true;
    out.diagnostic = "initial point outside the chart domain";
    return out;
  }

  auto eval = [&](double t, const Vector& q) { return field(t, TotalPoint::split(q, n)); };
  Vector q = q0.stacked();
  for (long long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    Vector next;
    try {
      const Vector k1 = eval(t, q);
      const Vector k2 = eval(t + 0.5 * h, q + 0.5 * h * k1);
      const Vector k3 = eval(t + 0.5 * h, q + 0.5 * h * k2);
      const Vector k4 = eval(t + h, q + h * k3);
      next = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const std::exception& e) {
      out.truncated = true;
      out.diagnostic = "field evaluation failed at t=" + std::to_string(t) + ": " + e.what();
      return out;
    }
    if (!next.allFinite()) {
      out.truncated = true;
      out.diagnostic = "non-finite state at t=" + std::to_string(t + h);
      return out;
    }
    TotalPoint p = TotalPoint::split(next, n);
    if (chart != nullptr && !chart->admissible(p.base)) {
      out.truncated = true;
      out.diagnostic = "left the chart domain at t=" + std::to_string(t + h);
      return out;
    }
    const double tn = (k + 1 == steps) ? t1 : t0 + static_cast<double>(k + 1) * h;
    out.append(tn, std::move(p.base), std::move(p.fiber));
    q = std::move(next);
  }
  return out;
}

Trajectory integrate_forced(const Algebroid& s, const BundleMetric& g, const ForceField& f, const TotalPoint& q0,
                            double t0, double t1, double step, const Chart* chart) {
  return integrate([&](double, const TotalPoint& q) { return forced_field(s, g, f, q); }, q0, t0, t1, step, chart);
}

Trajectory base_flow(const Algebroid& s, const Section& x, const BasePoint& p0, double t0, double t1, double step,
                     const Chart* chart) {
  TotalPoint q0{p0, FiberPoint(0)};
  Trajectory out = integrate(
      [&](double, const TotalPoint& q) { return anchor_apply(s, x, q.base); }, q0, t0, t1, step, chart);
  out.integrator = "rk4-base-flow";
  return out;
}

Trajectory lift(const Section& x, const Trajectory& sigma) {
  Trajectory out;
  out.step = sigma.step;
  out.integrator = sigma.integrator;
  out.truncated = sigma.truncated;
  out.diagnostic = sigma.diagnostic;
  out.times = sigma.times;
  out.base = sigma.base;
  out.fiber.reserve(sigma.size());
  for (const auto& p : sigma.base) out.fiber.push_back(x(p));
  return out;
}

double energy(const Algebroid&, const BundleMetric& g, const ScalarField& v, const TotalPoint& q) {
  return 0.5 * metric_eval(g, q.fiber, q.fiber, q.base) + v(q.base);
}

void write_csv(std::ostream& os, const Trajectory& gamma) {
  const auto n = gamma.empty() ? 0 : gamma.base.front().size();
  const auto m = gamma.empty() ? 0 : gamma.fiber.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  for (Eigen::Index a = 0; a < m; ++a) os << ",y" << a + 1;
  os << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    put(gamma.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ",";
      put(gamma.base[k](i));
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      os << ",";
      put(gamma.fiber[k](a));
    }
    os << "\n";
  }
}

}  // namespace skalg
