#include "skalg/algebroid.hpp"

#include "skalg/diff.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace skalg {

namespace {

std::span<const double> as_span(const Vector& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

struct BoundStructure {
  std::size_t upper;
  std::size_t a;
  std::size_t b;
  BoundExpr value;
};

std::string entry_name(std::size_t c, std::size_t a, std::size_t b) {
  std::ostringstream os;
  os << "C^" << c + 1 << "_" << a + 1 << b + 1;
  return os.str();
}

}  // namespace

Algebroid::Algebroid()
    : Algebroid({}, 0, [](const BasePoint&) { return Matrix(0, 0); }, 0, [](const BasePoint&) { return Tensor3(0); },
                0) {}

Algebroid::Algebroid(std::vector<std::string> coordinates, std::size_t rank, AnchorFn anchor, DiffLevel anchor_level,
                     StructureFn structure, DiffLevel structure_level)
    : coordinates_(std::move(coordinates)),
      rank_(rank),
      anchor_(std::move(anchor)),
      anchor_level_(anchor_level),
      structure_(std::move(structure)),
      structure_level_(structure_level) {}

Algebroid Algebroid::from_expressions(std::vector<std::string> coordinates, std::size_t rank,
                                      const std::vector<std::vector<Expr>>& anchor,
                                      const std::vector<StructureEntry>& structure, const Bindings& parameters,
                                      const std::vector<BasePoint>& check_points) {
  const std::size_t n = coordinates.size();
  if (anchor.size() != rank) throw std::invalid_argument("anchor: expected one row per basis section");
  auto bound_anchor = std::make_shared<std::vector<BoundExpr>>();
  bound_anchor->reserve(rank * n);
  for (std::size_t a = 0; a < rank; ++a) {
    if (anchor[a].size() != n) throw std::invalid_argument("anchor: row length must equal the base dimension");
    for (std::size_t i = 0; i < n; ++i) bound_anchor->emplace_back(anchor[a][i], coordinates, parameters);
  }

  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, const StructureEntry*> seen;
  for (const auto& e : structure) {
    if (e.upper >= rank || e.a >= rank || e.b >= rank) throw std::invalid_argument("structure: index out of range");
    if (e.a == e.b) throw std::invalid_argument(entry_name(e.upper, e.a, e.b) + ": diagonal entries are zero");
    if (!seen.emplace(std::make_tuple(e.upper, e.a, e.b), &e).second) {
      throw std::invalid_argument(entry_name(e.upper, e.a, e.b) + ": given twice");
    }
  }

  auto lower = std::make_shared<std::vector<BoundStructure>>();
  std::vector<std::pair<BoundExpr, BoundExpr>> paired;
  std::vector<std::string> paired_names;
  for (const auto& [key, e] : seen) {
    const auto [c, a, b] = key;
    if (a < b) {
      lower->push_back({c, a, b, BoundExpr(e->value, coordinates, parameters)});
      continue;
    }
    auto partner = seen.find(std::make_tuple(c, b, a));
    if (partner == seen.end()) {
      // Only the upper triangle was given: store its negative.
      lower->push_back({c, b, a, BoundExpr(Expr::parse("-(" + e->value.to_string() + ")"), coordinates, parameters)});
    } else {
      paired.emplace_back(BoundExpr(partner->second->value, coordinates, parameters),
                          BoundExpr(e->value, coordinates, parameters));
      paired_names.push_back(entry_name(c, b, a));
    }
  }

  if (!paired.empty()) {
    std::vector<BasePoint> points = check_points;
    if (points.empty()) points = sample_points(Chart::unit_box(coordinates), 16, 0);
    for (std::size_t k = 0; k < paired.size(); ++k) {
      for (const auto& p : points) {
        double lhs = 0.0;
        double rhs = 0.0;
        try {
          lhs = paired[k].first(as_span(p));
          rhs = paired[k].second(as_span(p));
        } catch (const EvalError&) {
          continue;
        }
        if (lhs != -rhs) {
          std::ostringstream os;
          os << paired_names[k] << ": both triangles supplied and not antisymmetric (" << lhs << " vs " << rhs
             << ")";
          throw std::invalid_argument(os.str());
        }
      }
    }
  }

  AnchorFn anchor_fn = [bound_anchor, n, rank](const BasePoint& x) {
    Matrix rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
    const auto values = as_span(x);
    for (std::size_t a = 0; a < rank; ++a) {
      for (std::size_t i = 0; i < n; ++i) {
        rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = (*bound_anchor)[a * n + i](values);
      }
    }
    return rho;
  };
  StructureFn structure_fn = [lower, rank](const BasePoint& x) {
    Tensor3 c(rank);
    const auto values = as_span(x);
    for (const auto& e : *lower) {
      const double v = e.value(values);
      c(e.upper, e.a, e.b) = v;
      c(e.upper, e.b, e.a) = -v;
    }
    return c;
  };
  return Algebroid(std::move(coordinates), rank, std::move(anchor_fn), 0, std::move(structure_fn), 0);
}

Algebroid Algebroid::tangent_bundle(std::vector<std::string> coordinates) {
  const std::size_t n = coordinates.size();
  return Algebroid(
      std::move(coordinates), n,
      [n](const BasePoint&) { return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)); },
      0, [n](const BasePoint&) { return Tensor3(n); }, 0);
}

void Trajectory::append(double t, BasePoint x, FiberPoint y) {
  if (!times.empty()) {
    if (!(t > times.back())) throw std::invalid_argument("trajectory: times must increase strictly");
    if (x.size() != base.front().size() || y.size() != fiber.front().size()) {
      throw std::invalid_argument("trajectory: sample dimensions changed");
    }
  }
  times.push_back(t);
  base.push_back(std::move(x));
  fiber.push_back(std::move(y));
}

Vector anchor_apply(const Algebroid& s, const Section& x, const BasePoint& p) { return s.anchor(p) * x(p); }

BaseVectorField anchored(const Algebroid& s, const Section& x) {
  return BaseVectorField(
      s.base_dim(), [s, x](const BasePoint& p) { return anchor_apply(s, x, p); },
      std::max(s.anchor_level(), x.level()), x.label());
}

Vector bracket(const Algebroid& s, const Section& x, const Section& y, const BasePoint& p) {
  const std::size_t m = s.rank();
  const Vector xv = x(p);
  const Vector yv = y(p);
  const Tensor3 c = s.structure(p);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t up = 0; up < m; ++up) {
    double acc = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) acc += xv(a) * yv(b) * c(up, a, b);
    }
    out(static_cast<Eigen::Index>(up)) = acc;
  }
  if (s.base_dim() > 0) {
    const Matrix rho = s.anchor(p);
    out += directional(y, p, rho * xv, y.level());
    out -= directional(x, p, rho * yv, x.level());
  }
  return out;
}

Section bracket_section(const Algebroid& s, const Section& x, const Section& y) {
  const DiffLevel level = std::max({x.level() + 1, y.level() + 1, s.anchor_level(), s.structure_level()});
  return Section(
      s.rank(), [s, x, y](const BasePoint& p) { return bracket(s, x, y, p); }, level,
      "[" + x.label() + "," + y.label() + "]");
}

Vector d_function(const Algebroid& s, const ScalarField& f, const BasePoint& p) {
  const Eigen::Index n = p.size();
  Vector grad(n);
  for (Eigen::Index i = 0; i < n; ++i) grad(i) = coordinate_partial(f, p, i, f.level());
  return s.anchor(p).transpose() * grad;
}

double anchor_derivative(const Algebroid& s, const Section& x, const ScalarField& f, const BasePoint& p) {
  if (s.base_dim() == 0) return 0.0;
  return directional(f, p, anchor_apply(s, x, p), f.level());
}

namespace {

ScalarField pairing(const OneForm& kappa, const Section& x) {
  return ScalarField([kappa, x](const BasePoint& p) { return kappa(p).dot(x(p)); },
                     std::max(kappa.level(), x.level()));
}

}  // namespace

double d_oneform(const Algebroid& s, const OneForm& kappa, const Section& x, const Section& y, const BasePoint& p) {
  const double xy = anchor_derivative(s, x, pairing(kappa, y), p);
  const double yx = anchor_derivative(s, y, pairing(kappa, x), p);
  return xy - yx - kappa(p).dot(bracket(s, x, y, p));
}

Vector jacobiator(const Algebroid& s, const Section& x, const Section& y, const Section& z, const BasePoint& p) {
  return bracket(s, x, bracket_section(s, y, z), p) + bracket(s, y, bracket_section(s, z, x), p) +
         bracket(s, z, bracket_section(s, x, y), p);
}

double admissibility_residual(const Algebroid& s, const Trajectory& gamma) {
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < gamma.size(); ++k) {
    const Vector velocity =
        (gamma.base[k + 1] - gamma.base[k - 1]) / (gamma.times[k + 1] - gamma.times[k - 1]);
    const Vector anchored_fiber = s.anchor(gamma.base[k]) * gamma.fiber[k];
    worst = std::max(worst, max_abs(velocity - anchored_fiber));
  }
  return worst;
}

std::size_t numerical_rank(const Matrix& m, double relative_threshold) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sigma = svd.singularValues();
  const double threshold = relative_threshold * std::max(sigma(0), 1.0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > threshold) ++r;
  }
  return r;
}

std::size_t lie_closure_rank(std::span<const BaseVectorField> fields, const BasePoint& p, int depth) {
  if (depth < 1) throw std::invalid_argument("lie_closure_rank: depth must be at least 1");
  if (p.size() == 0 || fields.empty()) return 0;

  std::vector<BaseVectorField> all(fields.begin(), fields.end());
  std::vector<BaseVectorField> previous = all;
  for (int d = 2; d <= depth; ++d) {
    std::vector<BaseVectorField> next;
    for (const auto& u : fields) {
      for (const auto& w : previous) {
        next.emplace_back(
            u.dim(),
            [u, w](const BasePoint& x) {
              return lie_bracket([&u](const Vector& q) { return u(q); }, u.level(),
                                 [&w](const Vector& q) { return w(q); }, w.level(), x);
            },
            std::max(u.level(), w.level()) + 1, "[" + u.label() + "," + w.label() + "]");
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    previous = std::move(next);
  }

  Matrix span(p.size(), static_cast<Eigen::Index>(all.size()));
  for (std::size_t k = 0; k < all.size(); ++k) span.col(static_cast<Eigen::Index>(k)) = all[k](p);
  return numerical_rank(span);
}

std::size_t lie_closure_rank(const Algebroid& s, const BasePoint& p, int depth) {
  std::vector<BaseVectorField> fields;
  for (const auto& e : basis_sections(s.rank())) fields.push_back(anchored(s, e));
  return lie_closure_rank(fields, p, depth);
}

std::vector<Section> basis_sections(std::size_t rank) {
  std::vector<Section> out;
  out.reserve(rank);
  for (std::size_t a = 0; a < rank; ++a) out.push_back(Section::basis(rank, a));
  return out;
}

Section expression_section(const std::vector<Expr>& coefficients, const std::vector<std::string>& coordinates,
                           const Bindings& parameters, std::string label) {
  auto bound = std::make_shared<std::vector<BoundExpr>>();
  for (const auto& e : coefficients) bound->emplace_back(e, coordinates, parameters);
  return Section(
      coefficients.size(),
      [bound](const BasePoint& x) {
        Vector v(static_cast<Eigen::Index>(bound->size()));
        for (std::size_t a = 0; a < bound->size(); ++a) v(static_cast<Eigen::Index>(a)) = (*bound)[a](as_span(x));
        return v;
      },
      0, std::move(label));
}

ScalarField expression_field(const Expr& e, const std::vector<std::string>& coordinates, const Bindings& parameters) {
  auto bound = std::make_shared<BoundExpr>(e, coordinates, parameters);
  return ScalarField([bound](const BasePoint& x) { return (*bound)(as_span(x)); }, 0);
}

}  // namespace skalg
