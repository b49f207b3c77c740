#include "skalg/geometry.hpp"

#include "skalg/diff.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace skalg {

namespace {

std::span<const double> as_span(const Vector& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

}  // namespace

BundleMetric BundleMetric::from_expressions(const std::vector<std::vector<Expr>>& entries,
                                            const std::vector<std::string>& coordinates,
                                            const Bindings& parameters) {
  const std::size_t m = entries.size();
  auto bound = std::make_shared<std::vector<BoundExpr>>();
  for (std::size_t a = 0; a < m; ++a) {
    if (entries[a].size() != m) throw std::invalid_argument("metric: expected a square matrix");
    for (std::size_t b = a; b < m; ++b) bound->emplace_back(entries[a][b], coordinates, parameters);
  }
  return BundleMetric(
      m,
      [bound, m](const BasePoint& x) {
        Matrix g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        std::size_t k = 0;
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = a; b < m; ++b) {
            const double v = (*bound)[k++](as_span(x));
            g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            g(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
          }
        }
        return g;
      },
      0);
}

BundleMetric BundleMetric::constant(Matrix g) {
  const auto m = static_cast<std::size_t>(g.rows());
  return BundleMetric(m, [g = std::move(g)](const BasePoint&) { return g; }, 0);
}

double metric_eval(const BundleMetric& g, const Vector& x, const Vector& y, const BasePoint& p) {
  return x.dot(g(p) * y);
}

double metric_eval(const BundleMetric& g, const Section& x, const Section& y, const BasePoint& p) {
  return metric_eval(g, x(p), y(p), p);
}

Vector flat(const BundleMetric& g, const Vector& x, const BasePoint& p) { return g(p) * x; }

Matrix solve_metric(const Matrix& gp, const Matrix& rhs) {
  Eigen::FullPivLU<Matrix> lu(gp);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "bundle metric is singular (rank " << lu.rank() << " of " << gp.rows() << ")";
    throw SingularMetricError(os.str());
  }
  return lu.solve(rhs);
}

Vector sharp(const BundleMetric& g, const Vector& kappa, const BasePoint& p) { return solve_metric(g(p), kappa); }

MetricDiagnostic check_metric(const BundleMetric& g, const std::vector<BasePoint>& points, bool require_positive) {
  MetricDiagnostic out;
  out.worst_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const Matrix gp = g(p);
    if (gp.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gp, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const double value = require_positive ? ev.minCoeff() : ev.cwiseAbs().minCoeff();
    if (value < out.worst_eigenvalue) {
      out.worst_eigenvalue = value;
      if (value <= 1e-12 * scale) {
        out.ok = false;
        out.witness = p;
      }
    }
  }
  return out;
}

Vector ChristoffelTensor::contract(const Vector& u, const Vector& v) const {
  const std::size_t m = rank();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      if (u(b) == 0.0) continue;
      for (std::size_t c = 0; c < m; ++c) acc += gamma(a, b, c) * u(b) * v(c);
    }
    out(static_cast<Eigen::Index>(a)) = acc;
  }
  return out;
}

Tensor3 koszul_rhs(const Algebroid& s, const BundleMetric& g, const BasePoint& p) {
  const std::size_t m = s.rank();
  const Matrix gp = g(p);
  const Tensor3 c = s.structure(p);

  // dg[B] = rho(e_B)(G)
  std::vector<Matrix> dg(m, Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
  if (s.base_dim() > 0) {
    const Matrix rho = s.anchor(p);
    for (std::size_t b = 0; b < m; ++b) {
      dg[b] = directional(g, p, rho.col(static_cast<Eigen::Index>(b)), g.level());
    }
  }

  Tensor3 rhs(m);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t cc = 0; cc < m; ++cc) {
        double v = dg[b](cc, e) + dg[cc](b, e) - dg[e](b, cc);
        for (std::size_t a = 0; a < m; ++a) {
          v += c(a, b, cc) * gp(a, e) - c(a, b, e) * gp(a, cc) - c(a, cc, e) * gp(a, b);
        }
        rhs(e, b, cc) = v;
      }
    }
  }
  return rhs;
}

ChristoffelTensor christoffel(const Algebroid& s, const BundleMetric& g, const BasePoint& p) {
  const std::size_t m = s.rank();
  const auto mi = static_cast<Eigen::Index>(m);
  const Tensor3 rhs = koszul_rhs(s, g, p);
  Matrix r(mi, mi * mi);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t c = 0; c < m; ++c) r(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(b * m + c)) = rhs(e, b, c);
    }
  }
  const Matrix sol = 0.5 * solve_metric(g(p), r);
  ChristoffelTensor out{Tensor3(m), p};
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t c = 0; c < m; ++c) out.gamma(a, b, c) = sol(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b * m + c));
    }
  }
  return out;
}

Vector covariant_derivative(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                            const BasePoint& p) {
  const Vector xv = x(p);
  Vector out = christoffel(s, g, p).contract(xv, y(p));
  if (s.base_dim() > 0) out += directional(y, p, s.anchor(p) * xv, y.level());
  return out;
}

namespace {

DiffLevel connection_level(const Algebroid& s, const BundleMetric& g, DiffLevel x, DiffLevel y) {
  return std::max({x, y + 1, g.level() + 1, s.anchor_level() + 1, s.structure_level()});
}

}  // namespace

Section covariant_derivative_section(const Algebroid& s, const BundleMetric& g, const Section& x,
                                     const Section& y) {
  return Section(
      s.rank(), [s, g, x, y](const BasePoint& p) { return covariant_derivative(s, g, x, y, p); },
      connection_level(s, g, x.level(), y.level()), "D_" + x.label() + y.label());
}

Vector covariant_derivative_along(const Algebroid& s, const BundleMetric& g, const Trajectory& gamma,
                                  const std::vector<Vector>& w, std::size_t k) {
  const std::size_t n = gamma.size();
  if (w.size() != n) throw std::invalid_argument("covariant_derivative_along: one sample of w per curve sample");
  if (n < 3) throw std::invalid_argument("covariant_derivative_along: need at least three samples");
  if (k >= n) throw std::out_of_range("covariant_derivative_along: sample index");
  const auto& t = gamma.times;
  Vector dw;
  if (k == 0) {
    dw = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (t[2] - t[0]);
  } else if (k + 1 == n) {
    dw = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (t[n - 1] - t[n - 3]);
  } else {
    // Second-order for non-uniform spacing.
    const double h0 = t[k] - t[k - 1];
    const double h1 = t[k + 1] - t[k];
    dw = (-h1 / (h0 * (h0 + h1))) * w[k - 1] + ((h1 - h0) / (h0 * h1)) * w[k] + (h0 / (h1 * (h0 + h1))) * w[k + 1];
  }
  return dw + christoffel(s, g, gamma.base[k]).contract(gamma.fiber[k], w[k]);
}

Vector symmetric_product(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y,
                         const BasePoint& p) {
  const Vector xv = x(p);
  const Vector yv = y(p);
  const ChristoffelTensor gamma = christoffel(s, g, p);
  Vector out = gamma.contract(xv, yv) + gamma.contract(yv, xv);
  if (s.base_dim() > 0) {
    const Matrix rho = s.anchor(p);
    out += directional(y, p, rho * xv, y.level());
    out += directional(x, p, rho * yv, x.level());
  }
  return out;
}

Section symmetric_product_section(const Algebroid& s, const BundleMetric& g, const Section& x, const Section& y) {
  const DiffLevel level =
      std::max(connection_level(s, g, x.level(), y.level()), connection_level(s, g, y.level(), x.level()));
  return Section(
      s.rank(), [s, g, x, y](const BasePoint& p) { return symmetric_product(s, g, x, y, p); }, level,
      "<" + x.label() + ":" + y.label() + ">");
}

Vector gradient(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const BasePoint& p) {
  return sharp(g, d_function(s, v, p), p);
}

Section gradient_section(const Algebroid& s, const BundleMetric& g, const ScalarField& v) {
  return Section(
      s.rank(), [s, g, v](const BasePoint& p) { return gradient(s, g, v, p); },
      std::max({v.level() + 1, g.level(), s.anchor_level()}), "grad");
}

}  // namespace skalg
