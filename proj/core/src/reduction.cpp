#include "skalg/reduction.hpp"

#include "skalg/diff.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace skalg {

namespace {

double g_norm(const Matrix& g, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

/// Runs f(i) for i in [0, count) on a small pool; rethrows the first error.
template <class F>
void parallel_for(std::size_t count, const F& f) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>({hw, count, 8});
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// values[sample][component]
using SampleTable = std::vector<std::vector<double>>;

void reduce_components(std::vector<ComponentResidual>& out, const std::vector<std::string>& names,
                       const SampleTable& values, const std::vector<BasePoint>& samples, double tol) {
  for (std::size_t c = 0; c < names.size(); ++c) {
    ComponentResidual r{names[c], 0.0, std::nullopt, tol};
    double worst = -1.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double v = std::isnan(values[k][c]) ? std::numeric_limits<double>::infinity() : values[k][c];
      if (v > worst) {
        worst = v;
        r.where = samples[k];
      }
    }
    r.worst = std::max(worst, 0.0);
    out.push_back(std::move(r));
  }
}

/// Sets verdict, worst residual and witness from the components.
void finish(VerificationReport& r) {
  r.worst_residual = 0.0;
  double worst_ratio = -1.0;
  bool ok = true;
  for (const auto& c : r.components) {
    r.worst_residual = std::max(r.worst_residual, c.worst);
    if (!(c.worst <= c.tolerance)) ok = false;
    const double ratio = c.tolerance > 0.0 ? c.worst / c.tolerance : c.worst;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      r.witness_point = c.where;
    }
  }
  r.verdict = ok ? Verdict::Pass : Verdict::Fail;
}

/// Registered residual names and per-sample values for Q(X_a) and
/// Q(<X_b:X_c>/2), normalized by the sizes of the inputs.
struct FamilyResiduals {
  std::vector<std::string> names;
  SampleTable values;
};

FamilyResiduals family_residuals(const Algebroid& s, const BundleMetric& g, const Projector& target,
                                 const std::vector<Section>& family, const std::vector<BasePoint>& samples,
                                 bool single_section_names) {
  FamilyResiduals out;
  const std::size_t k = family.size();
  for (std::size_t a = 0; a < k; ++a) out.names.push_back("Q(" + family[a].label() + ")");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t b = 0; b < k; ++b) {
    for (std::size_t c = b; c < k; ++c) {
      pairs.emplace_back(b, c);
      const auto& lb = family[b].label();
      const auto& lc = family[c].label();
      out.names.push_back(single_section_names ? "Q(nabla_" + lb + " " + lb + ")"
                                               : "Q(<" + lb + ":" + lc + ">)");
    }
  }
  out.values.assign(samples.size(), std::vector<double>(out.names.size(), 0.0));
  parallel_for(samples.size(), [&](std::size_t i) {
    const BasePoint& p = samples[i];
    const auto frame = target.frame(p);
    std::vector<Vector> xv;
    std::vector<double> xn;
    for (std::size_t a = 0; a < k; ++a) {
      xv.push_back(family[a](p));
      xn.push_back(g_norm(frame.g, xv.back()));
      out.values[i][a] = g_norm(frame.g, frame.q * xv.back()) / std::max(1.0, xn.back());
    }
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const auto [b, c] = pairs[j];
      const Vector v = 0.5 * symmetric_product(s, g, family[b], family[c], p);
      const double scale = std::max({1.0, xn[b] * xn[c], g_norm(frame.g, v)});
      out.values[i][k + j] = g_norm(frame.g, frame.q * v) / scale;
    }
  });
  return out;
}

bool force_precheck(VerificationReport& r, const Projector& controls, const ForceField& f,
                    const std::vector<BasePoint>& samples, double tol) {
  if (f.is_zero()) return true;
  const double residual = force_in_distribution_residual(controls, f, samples, 0);
  r.components.push_back({"Q(F)", residual, samples.empty() ? std::nullopt : std::optional(samples.front()), tol});
  if (residual <= tol) return true;
  r.verdict = Verdict::Inconclusive;
  r.worst_residual = residual;
  r.note = "force has a component outside the control distribution";
  return false;
}

Vector nabla_along(const Algebroid& s, const ChristoffelTensor& gamma, const Section& x, const Vector& direction,
                   const Vector& xp, const BasePoint& p) {
  Vector out = gamma.contract(direction, xp);
  if (s.base_dim() > 0) out += directional(x, p, s.anchor(p) * direction, x.level());
  return out;
}

HjResidual hj_over(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const Section& x,
                   const BasePoint& p, const Matrix& directions) {
  HjResidual out;
  const Matrix gp = g(p);
  const ChristoffelTensor gamma = christoffel(s, g, p);
  const Vector xp = x(p);
  const Vector nabla_xx = nabla_along(s, gamma, x, xp, xp, p);
  const ScalarField e(
      [g, x, v](const BasePoint& q) {
        const Vector xq = x(q);
        return 0.5 * xq.dot(g(q) * xq) + v(q);
      },
      std::max({x.level(), g.level(), v.level()}));
  const Matrix rho = s.anchor(p);
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    const Vector y = directions.col(j);
    const Vector nabla_yx = nabla_along(s, gamma, x, y, xp, p);
    const double closed = y.dot(gp * nabla_xx) - nabla_yx.dot(gp * xp);
    out.closedness = std::max(out.closedness, std::abs(closed));
    if (s.base_dim() > 0) out.hj = std::max(out.hj, std::abs(directional(e, p, rho * y, e.level())));
  }
  return out;
}

}  // namespace

Subbundle::Subbundle(std::vector<Section> sections, std::string name)
    : spanning(std::move(sections)), rank(spanning.size()), label(std::move(name)) {}

Subbundle Subbundle::full(std::size_t bundle_rank, std::string name) {
  return Subbundle(basis_sections(bundle_rank), std::move(name));
}

Matrix Subbundle::evaluate(const BasePoint& p) const {
  const auto m = static_cast<Eigen::Index>(bundle_rank());
  Matrix b(m, static_cast<Eigen::Index>(spanning.size()));
  for (std::size_t a = 0; a < spanning.size(); ++a) b.col(static_cast<Eigen::Index>(a)) = spanning[a](p);
  return b;
}

RankDiagnostic check_subbundle(const Subbundle& sub, const BundleMetric& g, const std::vector<BasePoint>& points) {
  RankDiagnostic out;
  out.worst = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const Matrix b = sub.evaluate(p);
    if (b.cols() == 0) continue;
    Eigen::LLT<Matrix> llt(g(p));
    const Matrix w = llt.matrixU() * b;
    Eigen::JacobiSVD<Matrix> svd(w);
    const Vector& sv = svd.singularValues();
    const double smallest = sv.size() < b.cols() ? 0.0 : sv(sv.size() - 1);
    const bool rank_ok = numerical_rank(w) == sub.rank && static_cast<std::size_t>(b.cols()) == sub.rank;
    if (smallest < out.worst) out.worst = smallest;
    if (!rank_ok && out.ok) {
      out.ok = false;
      out.witness = p;
    }
  }
  return out;
}

Projector::Frame Projector::frame(const BasePoint& p) const {
  Frame f;
  f.g = g_(p);
  const Eigen::Index m = f.g.rows();
  const Matrix b = sub_.evaluate(p);

  std::vector<Vector> basis;
  auto orthonormalize = [&](Vector v) -> bool {
    const double initial = g_norm(f.g, v);
    if (initial == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) v -= e.dot(f.g * v) * e;
    }
    const double norm = g_norm(f.g, v);
    if (norm <= 1e-10 * std::max(1.0, initial)) return false;
    basis.push_back(v / norm);
    return true;
  };
  for (Eigen::Index j = 0; j < b.cols(); ++j) orthonormalize(b.col(j));
  const std::size_t inside = basis.size();
  for (Eigen::Index i = 0; i < m && static_cast<Eigen::Index>(basis.size()) < m; ++i) {
    orthonormalize(Vector::Unit(m, i));
  }

  f.inside.resize(m, static_cast<Eigen::Index>(inside));
  f.complement.resize(m, static_cast<Eigen::Index>(basis.size() - inside));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (j < inside) {
      f.inside.col(static_cast<Eigen::Index>(j)) = basis[j];
    } else {
      f.complement.col(static_cast<Eigen::Index>(j - inside)) = basis[j];
    }
  }
  f.p = f.inside * f.inside.transpose() * f.g;
  f.q = Matrix::Identity(m, m) - f.p;
  return f;
}

ComplementCheck check_declared_complement(const Projector& proj, const Subbundle& declared,
                                          const std::vector<BasePoint>& points) {
  ComplementCheck out;
  for (const auto& p : points) {
    const auto frame = proj.frame(p);
    const Matrix d = declared.evaluate(p);
    if (static_cast<Eigen::Index>(frame.inside.cols() + d.cols()) != frame.g.rows() ||
        numerical_rank(d) != static_cast<std::size_t>(d.cols())) {
      if (out.rank_ok) out.witness = p;
      out.rank_ok = false;
    }
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const double norm = g_norm(frame.g, d.col(j));
      const double r = norm > 0.0 ? g_norm(frame.g, frame.p * d.col(j)) / norm : 1.0;
      if (r > out.worst_residual) {
        out.worst_residual = r;
        if (out.rank_ok) out.witness = p;
      }
    }
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const VerificationReport& r) {
  auto point = [](const std::optional<BasePoint>& p) {
    if (!p) return nlohmann::json(nullptr);
    return nlohmann::json(std::vector<double>(p->data(), p->data() + p->size()));
  };
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j = nlohmann::json{{"predicate", r.predicate},
                     {"verdict", to_string(r.verdict)},
                     {"worst_residual", number(r.worst_residual)},
                     {"witness_point", point(r.witness_point)},
                     {"samples", r.samples},
                     {"tolerance", r.tolerance}};
  if (!r.subject.empty()) j["subject"] = r.subject;
  if (r.seed) j["seed"] = *r.seed;
  if (!r.note.empty()) j["note"] = r.note;
  auto components = nlohmann::json::array();
  for (const auto& c : r.components) {
    components.push_back(
        {{"name", c.name}, {"worst", number(c.worst)}, {"where", point(c.where)}, {"tolerance", c.tolerance}});
  }
  j["components"] = std::move(components);
}

double force_in_distribution_residual(const Projector& controls, const ForceField& f,
                                      const std::vector<BasePoint>& samples, std::uint64_t seed) {
  if (f.is_zero()) return 0.0;
  const auto fibers = sample_fibers(f.rank(), 3, seed);
  double worst = 0.0;
  for (const auto& p : samples) {
    const auto frame = controls.frame(p);
    auto check = [&](const FiberPoint& y) {
      const Vector fv = f(p, y);
      worst = std::max(worst, g_norm(frame.g, frame.q * fv) / std::max(1.0, g_norm(frame.g, fv)));
    };
    check(FiberPoint::Zero(static_cast<Eigen::Index>(f.rank())));
    for (const auto& y : fibers) check(y);
  }
  return worst;
}

VerificationReport is_decoupling(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                 const Subbundle& controls, const Section& x, const std::vector<BasePoint>& samples,
                                 double tol) {
  VerificationReport r;
  r.predicate = "decoupling";
  r.subject = x.label();
  r.samples = samples.size();
  r.tolerance = tol;
  const Projector proj(controls, g);
  if (!force_precheck(r, proj, f, samples, tol)) return r;
  const auto fam = family_residuals(s, g, proj, {x}, samples, true);
  reduce_components(r.components, fam.names, fam.values, samples, tol);
  finish(r);
  return r;
}

VerificationReport kinematic_reduction_check(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                             const Subbundle& controls, const Subbundle& candidate,
                                             const std::vector<BasePoint>& samples, double tol) {
  VerificationReport r;
  r.predicate = "kinematic_reduction";
  r.subject = candidate.label;
  r.samples = samples.size();
  r.tolerance = tol;
  const Projector proj(controls, g);
  if (!force_precheck(r, proj, f, samples, tol)) return r;
  const auto fam = family_residuals(s, g, proj, candidate.spanning, samples, false);
  reduce_components(r.components, fam.names, fam.values, samples, tol);
  finish(r);
  return r;
}

ClosureResult symmetric_closure(const Algebroid& s, const BundleMetric& g, const Subbundle& sub, int max_depth,
                                const BasePoint& p, double independence) {
  ClosureResult out;
  out.generators = sub.spanning;
  const Matrix gp = g(p);

  std::vector<Vector> basis;  // G-orthonormal span of accepted generators at p
  auto accept = [&](const Vector& v) {
    const double norm = g_norm(gp, v);
    if (norm == 0.0) return false;
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) w -= e.dot(gp * w) * e;
    }
    const double rest = g_norm(gp, w);
    if (rest <= independence * std::max(1.0, norm)) return false;
    basis.push_back(w / rest);
    return true;
  };

  std::vector<Section> accepted;
  for (const auto& x : sub.spanning) {
    if (accept(x(p))) accepted.push_back(x);
  }
  out.generators = accepted;
  out.ranks.push_back(basis.size());
  const std::size_t m = s.rank();

  std::size_t fresh_begin = 0;
  for (int depth = 1; depth <= max_depth && basis.size() < m; ++depth) {
    const std::size_t count = out.generators.size();
    std::vector<Section> added;
    for (std::size_t i = 0; i < count && basis.size() < m; ++i) {
      for (std::size_t j = std::max(i, fresh_begin); j < count && basis.size() < m; ++j) {
        Section prod = symmetric_product_section(s, g, out.generators[i], out.generators[j]);
        if (accept(prod(p))) added.push_back(std::move(prod));
      }
    }
    fresh_begin = count;
    out.ranks.push_back(basis.size());
    if (added.empty()) break;
    out.generators.insert(out.generators.end(), added.begin(), added.end());
  }
  return out;
}

VerificationReport geodesic_invariance_check(const Algebroid& s, const BundleMetric& g, const Subbundle& sub,
                                             const std::vector<BasePoint>& samples, const CheckSettings& settings) {
  VerificationReport r;
  r.predicate = "geodesic_invariance";
  r.subject = sub.label;
  r.samples = samples.size();
  r.tolerance = settings.tolerance;
  r.seed = settings.seed;
  const Projector proj(sub, g);

  // Algebraic: Q(<X_a:X_b>) = 0 for the spanning sections.
  const auto fam = family_residuals(s, g, proj, sub.spanning, samples, false);
  SampleTable algebraic(samples.size(), std::vector<double>(1, 0.0));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t c = sub.spanning.size(); c < fam.names.size(); ++c) {
      algebraic[k][0] = std::max(algebraic[k][0], fam.values[k][c]);
    }
  }
  reduce_components(r.components, {"symmetric closure"}, algebraic, samples, settings.tolerance);

  // Empirical: geodesics seeded in the subbundle keep no complement part.
  const std::size_t count = std::min(settings.trajectories, samples.size());
  const auto coefficients = sample_fibers(sub.spanning.size(), count, settings.seed);
  SampleTable empirical(count, std::vector<double>(1, 0.0));
  std::vector<BasePoint> starts(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<int> truncated(count, 0);
  parallel_for(count, [&](std::size_t i) {
    const BasePoint& p = starts[i];
    const auto frame = proj.frame(p);
    Vector y0 = sub.evaluate(p) * coefficients[i];
    const double norm = g_norm(frame.g, y0);
    if (norm > 0.0) y0 /= norm;
    const Trajectory gamma =
        integrate_forced(s, g, ForceField::zero(s.rank()), {p, y0}, 0.0, settings.horizon, settings.step, settings.chart);
    truncated[i] = gamma.truncated ? 1 : 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const auto fk = proj.frame(gamma.base[k]);
      const Vector& y = gamma.fiber[k];
      worst = std::max(worst, g_norm(fk.g, fk.q * y) / std::max(1.0, g_norm(fk.g, y)));
    }
    empirical[i][0] = worst;
  });
  reduce_components(r.components, {"geodesic confinement"}, empirical, starts, settings.trajectory_tolerance);
  finish(r);

  const bool algebraic_ok = r.components[0].worst <= r.components[0].tolerance;
  const bool empirical_ok = r.components[1].worst <= r.components[1].tolerance;
  std::ostringstream note;
  if (algebraic_ok != empirical_ok) note << "algebraic and trajectory criteria disagree";
  const auto cut = std::count(truncated.begin(), truncated.end(), 1);
  if (cut > 0) {
    if (note.tellp() > 0) note << "; ";
    note << cut << " of " << count << " geodesics left the chart early";
  }
  r.note = note.str();
  return r;
}

VerificationReport maximal_reducibility_check(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                              const Subbundle& controls, const Subbundle& candidate,
                                              const std::vector<BasePoint>& samples, const CheckSettings& settings) {
  VerificationReport r;
  r.predicate = "maximal_reducibility";
  r.subject = candidate.label;
  r.samples = samples.size();
  r.tolerance = settings.tolerance;
  r.seed = settings.seed;
  if (!f.is_zero()) {
    const auto fibers = sample_fibers(s.rank(), 3, settings.seed);
    double worst = 0.0;
    for (const auto& p : samples) {
      for (const auto& y : fibers) worst = std::max(worst, max_abs(f(p, y)));
    }
    if (worst > settings.tolerance) {
      r.verdict = Verdict::Inconclusive;
      r.worst_residual = worst;
      r.note = "requires a vanishing force";
      return r;
    }
  }

  const Projector pc(controls, g);
  const Projector pd(candidate, g);
  SampleTable mutual(samples.size(), std::vector<double>(2, 0.0));
  parallel_for(samples.size(), [&](std::size_t i) {
    const BasePoint& p = samples[i];
    const auto fc = pc.frame(p);
    const auto fd = pd.frame(p);
    for (const auto& x : candidate.spanning) {
      const Vector v = x(p);
      mutual[i][0] = std::max(mutual[i][0], g_norm(fc.g, fc.q * v) / std::max(1.0, g_norm(fc.g, v)));
    }
    for (const auto& y : controls.spanning) {
      const Vector v = y(p);
      mutual[i][1] = std::max(mutual[i][1], g_norm(fd.g, fd.q * v) / std::max(1.0, g_norm(fd.g, v)));
    }
  });
  reduce_components(r.components, {"candidate inside D_c", "D_c inside candidate"}, mutual, samples,
                    settings.tolerance);

  const auto inv = geodesic_invariance_check(s, g, controls, samples, settings);
  for (auto c : inv.components) {
    c.name = "D_c " + c.name;
    r.components.push_back(std::move(c));
  }
  finish(r);
  r.note = inv.note;
  return r;
}

HjResidual hj_residual(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const Subbundle& controls,
                       const Section& x, const BasePoint& p) {
  return hj_over(s, g, v, x, p, Projector(controls, g).complement_basis(p));
}

HjResidual hj_residual_unconstrained(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                     const Section& x, const BasePoint& p) {
  const auto m = static_cast<Eigen::Index>(s.rank());
  return hj_over(s, g, v, x, p, Matrix::Identity(m, m));
}

VerificationReport hj_check(const Algebroid& s, const BundleMetric& g, const ScalarField& v, const Subbundle& controls,
                            const Section& x, const std::vector<BasePoint>& samples, double tol) {
  VerificationReport r;
  r.predicate = "hamilton_jacobi";
  r.subject = x.label();
  r.samples = samples.size();
  r.tolerance = tol;
  SampleTable values(samples.size(), std::vector<double>(2, 0.0));
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto h = hj_residual(s, g, v, controls, x, samples[i]);
    values[i] = {h.closedness, h.hj};
  });
  reduce_components(r.components, {"closedness", "hj"}, values, samples, tol);
  finish(r);
  return r;
}

VerificationReport hj_check_unconstrained(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                          const Section& x, const std::vector<BasePoint>& samples, double tol) {
  VerificationReport r;
  r.predicate = "hamilton_jacobi_unconstrained";
  r.subject = x.label();
  r.samples = samples.size();
  r.tolerance = tol;
  SampleTable values(samples.size(), std::vector<double>(2, 0.0));
  std::vector<double> energies(samples.size(), 0.0);
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto h = hj_residual_unconstrained(s, g, v, x, samples[i]);
    values[i] = {h.closedness, h.hj};
    const Vector xp = x(samples[i]);
    energies[i] = 0.5 * metric_eval(g, xp, xp, samples[i]) + v(samples[i]);
  });
  reduce_components(r.components, {"closedness", "hj"}, values, samples, tol);
  if (!samples.empty()) {
    const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
    r.components.push_back({"energy spread", *hi - *lo, samples[static_cast<std::size_t>(hi - energies.begin())], tol});
  }
  finish(r);
  return r;
}

VerificationReport hj_trajectory_equivalence(const Algebroid& s, const BundleMetric& g, const ScalarField& v,
                                             const Subbundle& controls, const Section& x, const BasePoint& p0,
                                             double horizon, double step, double tol, double closedness_tol,
                                             const Chart* chart) {
  VerificationReport r;
  r.predicate = "hj_trajectory";
  r.subject = x.label();
  r.tolerance = tol;
  const Trajectory gamma = lift(x, base_flow(s, x, p0, 0.0, horizon, step, chart));
  r.samples = gamma.size();
  if (gamma.size() < 3) {
    r.verdict = Verdict::Inconclusive;
    r.witness_point = p0;
    r.note = "curve too short: " + gamma.diagnostic;
    return r;
  }

  const Projector proj(controls, g);
  const std::size_t n = gamma.size();
  SampleTable residual(n, std::vector<double>(1, 0.0));
  parallel_for(n, [&](std::size_t k) {
    const BasePoint& p = gamma.base[k];
    const auto frame = proj.frame(p);
    const Vector a = covariant_derivative_along(s, g, gamma, gamma.fiber, k) + gradient(s, g, v, p);
    residual[k][0] = g_norm(frame.g, frame.q * a);
  });

  const std::size_t stride = std::max<std::size_t>(1, n / 50);
  std::vector<BasePoint> probes;
  for (std::size_t k = 0; k < n; k += stride) probes.push_back(gamma.base[k]);
  SampleTable closed(probes.size(), std::vector<double>(1, 0.0));
  parallel_for(probes.size(),
               [&](std::size_t i) { closed[i][0] = hj_residual(s, g, v, controls, x, probes[i]).closedness; });

  reduce_components(r.components, {"Q_c(nabla_gamma gamma + grad V)"}, residual, gamma.base, tol);
  reduce_components(r.components, {"closedness"}, closed, probes, closedness_tol);
  finish(r);
  if (r.components[1].worst > closedness_tol) {
    r.verdict = Verdict::Inconclusive;
    r.note = "closedness condition fails along the curve; the trajectory criterion does not apply";
  }
  if (gamma.truncated) {
    r.note += (r.note.empty() ? "" : "; ") + std::string("curve truncated: ") + gamma.diagnostic;
  }
  return r;
}

VerificationReport reparam_admissible(const Algebroid& s, const BundleMetric& g, const Subbundle& controls,
                                      const ScalarField& f, const std::vector<BasePoint>& samples, double tol) {
  VerificationReport r;
  r.predicate = "reparametrization";
  r.samples = samples.size();
  r.tolerance = tol;
  const Projector proj(controls, g);
  SampleTable values(samples.size(), std::vector<double>(1, 0.0));
  parallel_for(samples.size(), [&](std::size_t i) {
    const BasePoint& p = samples[i];
    if (s.base_dim() == 0) return;
    const Matrix y = proj.complement_basis(p);
    const Matrix rho = s.anchor(p);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      values[i][0] = std::max(values[i][0], std::abs(directional(f, p, rho * y.col(j), f.level())));
    }
  });
  reduce_components(r.components, {"rho(Y)(f)"}, values, samples, tol);
  finish(r);
  return r;
}

double forced_equation_residual(const Algebroid& s, const BundleMetric& g, const ForceField& f,
                                const Trajectory& gamma) {
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < gamma.size(); ++k) {
    const Vector a = covariant_derivative_along(s, g, gamma, gamma.fiber, k);
    worst = std::max(worst, max_abs(a - f(gamma.base[k], gamma.fiber[k])));
  }
  return worst;
}

double section_equation_residual(const Algebroid& s, const BundleMetric& g, const ForceField& f, const Section& x,
                                 const std::vector<BasePoint>& samples) {
  double worst = 0.0;
  for (const auto& p : samples) {
    worst = std::max(worst, max_abs(covariant_derivative(s, g, x, x, p) - f(p, x(p))));
  }
  return worst;
}

ControlRecovery recover_controls(const BundleMetric& g, const Subbundle& driftless, const Trajectory& gamma) {
  ControlRecovery out;
  out.controls.reserve(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const Matrix gp = g(gamma.base[k]);
    const Matrix b = driftless.evaluate(gamma.base[k]);
    const Matrix normal = b.transpose() * gp * b;
    const Vector u = normal.ldlt().solve(b.transpose() * gp * gamma.fiber[k]);
    out.worst_residual = std::max(out.worst_residual, g_norm(gp, b * u - gamma.fiber[k]));
    out.controls.push_back(u);
  }
  return out;
}

}  // namespace skalg
