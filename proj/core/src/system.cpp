#include "skalg/system.hpp"

#include "skalg/diff.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace skalg {

using nlohmann::json;

SpecError::SpecError(std::string path, const std::string& message)
    : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}

namespace {

std::string index_path(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- JSON reading helpers -------------------------------------------------

const json& member(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SpecError(path, "missing required key '" + key + "'");
  return *it;
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SpecError(path, "expected a string");
  return v.get<std::string>();
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SpecError(path, "expected a number");
  return v.get<double>();
}

std::string read_expr_text(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_number(v.get<double>());
  throw SpecError(path, "expected an expression string or a number");
}

const json& read_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw SpecError(path, "expected an array");
  return v;
}

std::vector<std::string> read_expr_row(const json& v, const std::string& path) {
  std::vector<std::string> out;
  const auto& arr = read_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read_expr_text(arr[i], index_path(path, i)));
  return out;
}

std::vector<std::vector<std::string>> read_expr_matrix(const json& v, const std::string& path) {
  std::vector<std::vector<std::string>> out;
  const auto& arr = read_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read_expr_row(arr[i], index_path(path, i)));
  return out;
}

std::vector<std::string> read_names(const json& v, const std::string& path) {
  std::vector<std::string> out;
  const auto& arr = read_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read_string(arr[i], index_path(path, i)));
  return out;
}

std::vector<NamedSection> read_named_sections(const json& v, const std::string& path, const char* coefficient_key) {
  std::vector<NamedSection> out;
  const auto& arr = read_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = index_path(path, i);
    if (!arr[i].is_object()) throw SpecError(p, "expected an object with 'name' and '" + std::string(coefficient_key) + "'");
    NamedSection s;
    s.name = read_string(member(arr[i], "name", p), p + "/name");
    s.coefficients = read_expr_row(member(arr[i], coefficient_key, p), p + "/" + coefficient_key);
    out.push_back(std::move(s));
  }
  return out;
}

json named_sections_json(const std::vector<NamedSection>& v, const char* key) {
  json arr = json::array();
  for (const auto& s : v) arr.push_back({{"name", s.name}, {key, s.coefficients}});
  return arr;
}

// ---- loading helpers ------------------------------------------------------

std::span<const double> as_span(const Vector& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

class ExprContext {
 public:
  ExprContext(const std::vector<std::string>& coordinates, const Bindings& parameters)
      : coordinates_(coordinates), parameters_(parameters) {}

  /// Parses and checks that every free variable is a coordinate, a parameter
  /// or one of `extra`.
  Expr parse(const std::string& text, const std::string& path, const std::vector<std::string>& extra = {}) const {
    Expr e;
    try {
      e = Expr::parse(text);
    } catch (const ParseError& err) {
      throw SpecError(path, std::string(err.what()) + " in '" + text + "'");
    }
    for (const auto& v : e.free_variables()) {
      const bool known = std::find(coordinates_.begin(), coordinates_.end(), v) != coordinates_.end() ||
                         parameters_.count(v) > 0 || std::find(extra.begin(), extra.end(), v) != extra.end();
      if (!known) throw SpecError(path, "unknown variable '" + v + "' in '" + text + "'");
    }
    return e;
  }

  std::vector<Expr> parse_row(const std::vector<std::string>& row, const std::string& path, std::size_t expected,
                              const std::vector<std::string>& extra = {}) const {
    if (row.size() != expected) {
      throw SpecError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(row.size()));
    }
    std::vector<Expr> out;
    for (std::size_t i = 0; i < row.size(); ++i) out.push_back(parse(row[i], index_path(path, i), extra));
    return out;
  }

  std::vector<std::vector<Expr>> parse_matrix(const std::vector<std::vector<std::string>>& rows,
                                              const std::string& path, std::size_t nrows, std::size_t ncols) const {
    if (rows.size() != nrows) {
      throw SpecError(path, "expected " + std::to_string(nrows) + " rows, got " + std::to_string(rows.size()));
    }
    std::vector<std::vector<Expr>> out;
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(parse_row(rows[i], index_path(path, i), ncols));
    return out;
  }

 private:
  const std::vector<std::string>& coordinates_;
  const Bindings& parameters_;
};

BaseVectorField expression_vector_field(const std::vector<Expr>& components, const std::vector<std::string>& coords,
                                        const Bindings& parameters, std::string label) {
  const Section s = expression_section(components, coords, parameters, label);
  return BaseVectorField(s.dim(), [s](const BasePoint& x) { return s(x); }, 0, std::move(label));
}

std::string point_text(const BasePoint& p) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
  os << ")";
  return os.str();
}

}  // namespace

// ---- JSON <-> SystemSpec --------------------------------------------------

json spec_to_json(const SystemSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["parameters"] = spec.parameters;
  j["base"] = spec.base;
  j["fiber"] = spec.fiber;
  j["mode"] = spec.mode;
  if (spec.mode == "intrinsic") {
    j["anchor"] = spec.anchor;
    json structure = json::array();
    for (const auto& s : spec.structure) structure.push_back({{"C", {s.upper, s.a, s.b}}, {"value", s.value}});
    j["structure"] = std::move(structure);
    j["metric"] = spec.metric;
  } else {
    j["ambient"] = spec.ambient;
    j["distribution"] = spec.distribution;
    if (!spec.complement.empty()) j["complement"] = spec.complement;
  }
  j["potential"] = spec.potential;
  if (!spec.force.empty()) j["force"] = spec.force;

  json controls;
  if (!spec.controls.sections.empty()) controls["sections"] = named_sections_json(spec.controls.sections, "coefficients");
  if (!spec.controls.covectors.empty()) controls["covectors"] = named_sections_json(spec.controls.covectors, "coefficients");
  if (!spec.controls.complement.empty()) {
    controls["complement"] = named_sections_json(spec.controls.complement, "coefficients");
  }
  j["controls"] = std::move(controls);

  json chart;
  chart["lower"] = spec.chart.lower;
  chart["upper"] = spec.chart.upper;
  json exclusions = json::array();
  for (const auto& e : spec.chart.exclusions) {
    exclusions.push_back({{"coordinate", e.coordinate}, {"value", e.value}, {"margin", e.margin}});
  }
  chart["exclusions"] = std::move(exclusions);
  j["chart"] = std::move(chart);

  json candidates;
  candidates["sections"] = named_sections_json(spec.candidates.sections, "coefficients");
  json functions = json::array();
  for (const auto& f : spec.candidates.functions) functions.push_back({{"name", f.name}, {"expr", f.expr}});
  candidates["functions"] = std::move(functions);
  json distributions = json::array();
  for (const auto& d : spec.candidates.distributions) {
    distributions.push_back({{"name", d.name}, {"sections", d.sections}});
  }
  candidates["distributions"] = std::move(distributions);
  j["candidates"] = std::move(candidates);
  return j;
}

SystemSpec spec_from_json(const json& doc) {
  static const std::set<std::string> kKeys = {"name",     "parameters",   "base",       "fiber",     "mode",
                                              "anchor",   "structure",    "metric",     "potential", "ambient",
                                              "distribution", "complement", "controls", "chart",     "candidates",
                                              "force"};
  if (!doc.is_object()) throw SpecError("", "the document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (kKeys.count(key) == 0) throw SpecError("/" + key, "unknown key");
  }

  SystemSpec s;
  s.name = read_string(member(doc, "name", ""), "/name");
  if (auto it = doc.find("parameters"); it != doc.end()) {
    if (!it->is_object()) throw SpecError("/parameters", "expected an object of name: number");
    for (const auto& [k, v] : it->items()) s.parameters[k] = read_number(v, "/parameters/" + k);
  }
  s.base = read_names(member(doc, "base", ""), "/base");

  const json& fiber = member(doc, "fiber", "");
  if (fiber.is_number_unsigned() || fiber.is_number_integer()) {
    const auto m = fiber.get<long long>();
    if (m < 1) throw SpecError("/fiber", "rank must be positive");
    for (long long a = 0; a < m; ++a) s.fiber.push_back("e" + std::to_string(a + 1));
  } else {
    s.fiber = read_names(fiber, "/fiber");
    if (s.fiber.empty()) throw SpecError("/fiber", "rank must be positive");
  }

  s.mode = read_string(member(doc, "mode", ""), "/mode");
  if (s.mode != "intrinsic" && s.mode != "embedded") throw SpecError("/mode", "expected 'intrinsic' or 'embedded'");

  auto forbid = [&](const char* key) {
    if (doc.contains(key)) throw SpecError(std::string("/") + key, "not allowed in " + s.mode + " mode");
  };
  if (s.mode == "intrinsic") {
    forbid("ambient");
    forbid("distribution");
    forbid("complement");
    if (auto it = doc.find("anchor"); it != doc.end()) s.anchor = read_expr_matrix(*it, "/anchor");
    if (auto it = doc.find("structure"); it != doc.end()) {
      const auto& arr = read_array(*it, "/structure");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index_path("/structure", i);
        if (!arr[i].is_object()) throw SpecError(p, "expected {\"C\": [upper, a, b], \"value\": expr}");
        const json& idx = member(arr[i], "C", p);
        if (!idx.is_array() || idx.size() != 3) throw SpecError(p + "/C", "expected three one-based indices");
        StructureSpec e;
        std::size_t* slots[] = {&e.upper, &e.a, &e.b};
        for (std::size_t k = 0; k < 3; ++k) {
          if (!idx[k].is_number_integer() || idx[k].get<long long>() < 1) {
            throw SpecError(index_path(p + "/C", k), "expected a positive integer");
          }
          *slots[k] = idx[k].get<std::size_t>();
        }
        e.value = read_expr_text(member(arr[i], "value", p), p + "/value");
        s.structure.push_back(std::move(e));
      }
    }
    s.metric = read_expr_matrix(member(doc, "metric", ""), "/metric");
  } else {
    forbid("anchor");
    forbid("structure");
    forbid("metric");
    s.ambient = read_expr_matrix(member(doc, "ambient", ""), "/ambient");
    s.distribution = read_expr_matrix(member(doc, "distribution", ""), "/distribution");
    if (auto it = doc.find("complement"); it != doc.end()) s.complement = read_expr_matrix(*it, "/complement");
  }

  if (auto it = doc.find("potential"); it != doc.end()) s.potential = read_expr_text(*it, "/potential");
  if (auto it = doc.find("force"); it != doc.end()) s.force = read_expr_row(*it, "/force");

  if (auto it = doc.find("controls"); it != doc.end()) {
    if (!it->is_object()) throw SpecError("/controls", "expected an object");
    for (const auto& [k, v] : it->items()) {
      if (k != "sections" && k != "covectors" && k != "complement") throw SpecError("/controls/" + k, "unknown key");
    }
    if (auto c = it->find("sections"); c != it->end()) {
      s.controls.sections = read_named_sections(*c, "/controls/sections", "coefficients");
    }
    if (auto c = it->find("covectors"); c != it->end()) {
      s.controls.covectors = read_named_sections(*c, "/controls/covectors", "coefficients");
    }
    if (auto c = it->find("complement"); c != it->end()) {
      s.controls.complement = read_named_sections(*c, "/controls/complement", "coefficients");
    }
    if (!s.controls.sections.empty() && !s.controls.covectors.empty()) {
      throw SpecError("/controls", "give either 'sections' or 'covectors', not both");
    }
  }

  if (auto it = doc.find("chart"); it != doc.end()) {
    if (!it->is_object()) throw SpecError("/chart", "expected an object");
    const json& lo = member(*it, "lower", "/chart");
    const json& hi = member(*it, "upper", "/chart");
    for (std::size_t i = 0; i < read_array(lo, "/chart/lower").size(); ++i) {
      s.chart.lower.push_back(read_number(lo[i], index_path("/chart/lower", i)));
    }
    for (std::size_t i = 0; i < read_array(hi, "/chart/upper").size(); ++i) {
      s.chart.upper.push_back(read_number(hi[i], index_path("/chart/upper", i)));
    }
    if (auto ex = it->find("exclusions"); ex != it->end()) {
      const auto& arr = read_array(*ex, "/chart/exclusions");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index_path("/chart/exclusions", i);
        ExclusionSpec e;
        e.coordinate = read_string(member(arr[i], "coordinate", p), p + "/coordinate");
        e.value = read_number(member(arr[i], "value", p), p + "/value");
        if (arr[i].contains("margin")) e.margin = read_number(arr[i]["margin"], p + "/margin");
        s.chart.exclusions.push_back(std::move(e));
      }
    }
  }

  if (auto it = doc.find("candidates"); it != doc.end()) {
    if (!it->is_object()) throw SpecError("/candidates", "expected an object");
    if (auto c = it->find("sections"); c != it->end()) {
      s.candidates.sections = read_named_sections(*c, "/candidates/sections", "coefficients");
    }
    if (auto c = it->find("functions"); c != it->end()) {
      const auto& arr = read_array(*c, "/candidates/functions");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index_path("/candidates/functions", i);
        s.candidates.functions.push_back({read_string(member(arr[i], "name", p), p + "/name"),
                                          read_expr_text(member(arr[i], "expr", p), p + "/expr")});
      }
    }
    if (auto c = it->find("distributions"); c != it->end()) {
      const auto& arr = read_array(*c, "/candidates/distributions");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index_path("/candidates/distributions", i);
        s.candidates.distributions.push_back({read_string(member(arr[i], "name", p), p + "/name"),
                                              read_names(member(arr[i], "sections", p), p + "/sections")});
      }
    }
  }
  return s;
}

void override_parameters(SystemSpec& spec, const std::map<std::string, double>& values) {
  for (const auto& [k, v] : values) {
    auto it = spec.parameters.find(k);
    if (it == spec.parameters.end()) throw SpecError("/parameters/" + k, "unknown parameter");
    it->second = v;
  }
}

// ---- induced algebroid ----------------------------------------------------

InducedAlgebroid induced_algebroid(const std::vector<std::string>& coordinates, const BundleMetric& ambient,
                                   const std::vector<BaseVectorField>& basis) {
  const std::size_t n = coordinates.size();
  const std::size_t m = basis.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  for (const auto& b : basis) {
    if (b.dim() != n) throw std::invalid_argument("induced_algebroid: basis fields must have n components");
  }
  auto frame = [basis, ni, mi](const BasePoint& x) {
    Matrix b(ni, mi);
    for (Eigen::Index a = 0; a < mi; ++a) b.col(a) = basis[static_cast<std::size_t>(a)](x);
    return b;
  };
  DiffLevel level = 0;
  for (const auto& b : basis) level = std::max(level, b.level());

  Algebroid::StructureFn structure = [basis, ambient, frame, m](const BasePoint& x) {
    const Matrix b = frame(x);
    const Matrix gm = ambient(x);
    const Matrix gram = b.transpose() * gm * b;
    const auto ldlt = gram.ldlt();
    Tensor3 c(m);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t bb = a + 1; bb < m; ++bb) {
        const auto& u = basis[a];
        const auto& w = basis[bb];
        const Vector lie = lie_bracket([&u](const Vector& q) { return u(q); }, u.level(),
                                       [&w](const Vector& q) { return w(q); }, w.level(), x);
        const Vector coeff = ldlt.solve(b.transpose() * gm * lie);
        for (std::size_t up = 0; up < m; ++up) {
          c(up, a, bb) = coeff(static_cast<Eigen::Index>(up));
          c(up, bb, a) = -coeff(static_cast<Eigen::Index>(up));
        }
      }
    }
    return c;
  };
  BundleMetric metric(
      m,
      [ambient, frame](const BasePoint& x) {
        const Matrix b = frame(x);
        return Matrix(b.transpose() * ambient(x) * b);
      },
      std::max(level, ambient.level()));
  return {Algebroid(coordinates, m, frame, level, std::move(structure), level + 1), std::move(metric)};
}

OrthogonalityCheck check_orthogonal_complement(const BundleMetric& ambient, const std::vector<BaseVectorField>& basis,
                                               const std::vector<BaseVectorField>& complement,
                                               const std::vector<BasePoint>& points) {
  OrthogonalityCheck out;
  for (const auto& p : points) {
    const Matrix gm = ambient(p);
    Matrix all(p.size(), static_cast<Eigen::Index>(basis.size() + complement.size()));
    Eigen::Index col = 0;
    for (const auto& b : basis) all.col(col++) = b(p);
    for (const auto& z : complement) all.col(col++) = z(p);
    if (numerical_rank(all) != static_cast<std::size_t>(p.size()) || all.cols() != p.size()) {
      if (out.spans) out.witness = p;
      out.spans = false;
    }
    for (const auto& z : complement) {
      const Vector zv = z(p);
      const double zn = std::sqrt(zv.dot(gm * zv));
      for (const auto& b : basis) {
        const Vector bv = b(p);
        const double bn = std::sqrt(bv.dot(gm * bv));
        const double r = (zn > 0 && bn > 0) ? std::abs(zv.dot(gm * bv)) / (zn * bn) : 1.0;
        if (r > out.worst) {
          out.worst = r;
          if (out.spans) out.witness = p;
        }
      }
    }
  }
  return out;
}

// ---- SystemDefinition -----------------------------------------------------

ForceField SystemDefinition::total_force() const {
  if (!has_potential) return force;
  return force + ForceField::from_potential(algebroid, metric, potential);
}

std::vector<BasePoint> SystemDefinition::samples(std::size_t count, std::uint64_t seed) const {
  if (base_dim() == 0) return {BasePoint(0)};
  return sample_points(chart, count, seed);
}

const Section& SystemDefinition::section(const std::string& name) const {
  auto it = sections.find(name);
  if (it == sections.end()) throw SpecError("/candidates/sections", "no section named '" + name + "'");
  return it->second;
}

const Subbundle& SystemDefinition::distribution(const std::string& name) const {
  auto it = distributions.find(name);
  if (it == distributions.end()) throw SpecError("/candidates/distributions", "no distribution named '" + name + "'");
  return it->second;
}

const ScalarField& SystemDefinition::function(const std::string& name) const {
  auto it = functions.find(name);
  if (it == functions.end()) throw SpecError("/candidates/functions", "no function named '" + name + "'");
  return it->second;
}

SystemDefinition load_spec(const SystemSpec& spec, const LoadOptions& options) {
  SystemDefinition def;
  def.spec = spec;
  const auto& coords = spec.base;
  const std::size_t n = coords.size();
  const std::size_t m = spec.fiber.size();
  if (m == 0) throw SpecError("/fiber", "rank must be positive");

  {
    std::set<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
      if (!names.insert(coords[i]).second) throw SpecError(index_path("/base", i), "duplicate coordinate");
      if (coords[i] == "t") throw SpecError(index_path("/base", i), "'t' is reserved for time");
    }
    const auto ys = fiber_names(m);
    for (const auto& [k, v] : spec.parameters) {
      if (names.count(k) || std::find(ys.begin(), ys.end(), k) != ys.end() || k == "t") {
        throw SpecError("/parameters/" + k, "parameter name collides with a coordinate");
      }
      def.parameters[k] = v;
    }
  }
  const ExprContext ctx(coords, def.parameters);

  // Chart.
  def.chart.coordinates = coords;
  if (spec.chart.lower.empty() && spec.chart.upper.empty()) {
    def.chart = Chart::unit_box(coords);
  } else {
    if (spec.chart.lower.size() != n) throw SpecError("/chart/lower", "expected one bound per coordinate");
    if (spec.chart.upper.size() != n) throw SpecError("/chart/upper", "expected one bound per coordinate");
    def.chart.lower = Eigen::Map<const Vector>(spec.chart.lower.data(), static_cast<Eigen::Index>(n));
    def.chart.upper = Eigen::Map<const Vector>(spec.chart.upper.data(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!(spec.chart.lower[i] < spec.chart.upper[i])) throw SpecError(index_path("/chart/lower", i), "empty interval");
    }
  }
  for (std::size_t k = 0; k < spec.chart.exclusions.size(); ++k) {
    const auto& e = spec.chart.exclusions[k];
    const std::string p = index_path("/chart/exclusions", k);
    auto it = std::find(coords.begin(), coords.end(), e.coordinate);
    if (it == coords.end()) throw SpecError(p + "/coordinate", "unknown coordinate '" + e.coordinate + "'");
    if (!(e.margin >= 0.0)) throw SpecError(p + "/margin", "margin must be non-negative");
    def.chart.exclusions.push_back({static_cast<std::size_t>(it - coords.begin()), e.value, e.margin});
  }
  const std::vector<BasePoint> checks =
      n == 0 ? std::vector<BasePoint>{BasePoint(0)} : sample_points(def.chart, options.check_samples, options.seed);

  // Algebroid and metric.
  if (spec.mode == "intrinsic") {
    std::vector<std::vector<Expr>> anchor;
    if (spec.anchor.empty()) {
      if (n > 0) throw SpecError("/anchor", "missing required key 'anchor'");
      anchor.assign(m, {});
    } else {
      anchor = ctx.parse_matrix(spec.anchor, "/anchor", m, n);
    }
    std::vector<StructureEntry> entries;
    for (std::size_t k = 0; k < spec.structure.size(); ++k) {
      const auto& e = spec.structure[k];
      const std::string p = index_path("/structure", k);
      if (e.upper > m || e.a > m || e.b > m) throw SpecError(p + "/C", "index exceeds the fiber rank");
      entries.push_back({e.upper - 1, e.a - 1, e.b - 1, ctx.parse(e.value, p + "/value")});
    }
    try {
      def.algebroid = Algebroid::from_expressions(coords, m, anchor, entries, def.parameters, checks);
    } catch (const std::invalid_argument& err) {
      throw SpecError("/structure", err.what());
    }
    def.metric = BundleMetric::from_expressions(ctx.parse_matrix(spec.metric, "/metric", m, m), coords, def.parameters);
    // The metric reads the upper triangle; a disagreeing lower triangle is an
    // input error.
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        const Expr lower = ctx.parse(spec.metric[a][b], index_path(index_path("/metric", a), b));
        const Expr upper = ctx.parse(spec.metric[b][a], index_path(index_path("/metric", b), a));
        const BoundExpr bl(lower, coords, def.parameters);
        const BoundExpr bu(upper, coords, def.parameters);
        for (const auto& p : checks) {
          const double vl = bl(as_span(p));
          const double vu = bu(as_span(p));
          if (std::abs(vl - vu) > 1e-12 * std::max(1.0, std::abs(vu))) {
            throw SpecError(index_path(index_path("/metric", a), b),
                            "lower triangle disagrees with the upper triangle at " + point_text(p));
          }
        }
      }
    }
  } else {
    if (m > n) throw SpecError("/fiber", "an embedded distribution cannot exceed the base dimension");
    const auto ambient = BundleMetric::from_expressions(ctx.parse_matrix(spec.ambient, "/ambient", n, n), coords,
                                                        def.parameters);
    const auto ambient_diag = check_metric(ambient, checks, options.require_positive_metric);
    if (!ambient_diag.ok) throw SpecError("/ambient", "metric degenerates at " + point_text(*ambient_diag.witness));
    if (spec.distribution.size() != m) throw SpecError("/distribution", "expected one vector field per basis section");
    std::vector<BaseVectorField> basis;
    for (std::size_t a = 0; a < m; ++a) {
      basis.push_back(expression_vector_field(
          ctx.parse_row(spec.distribution[a], index_path("/distribution", a), n), coords, def.parameters,
          spec.fiber[a]));
    }
    if (!spec.complement.empty()) {
      if (spec.complement.size() != n - m) throw SpecError("/complement", "expected n - m vector fields");
      std::vector<BaseVectorField> complement;
      for (std::size_t j = 0; j < spec.complement.size(); ++j) {
        complement.push_back(expression_vector_field(
            ctx.parse_row(spec.complement[j], index_path("/complement", j), n), coords, def.parameters, {}));
      }
      const auto ortho = check_orthogonal_complement(ambient, basis, complement, checks);
      if (!ortho.spans) throw SpecError("/complement", "distribution and complement do not span at " +
                                                           point_text(*ortho.witness));
      if (ortho.worst > 1e-8) {
        std::ostringstream os;
        os << "complement is not orthogonal to the distribution (relative residual " << ortho.worst << " at "
           << point_text(*ortho.witness) << ")";
        throw SpecError("/complement", os.str());
      }
    }
    auto induced = induced_algebroid(coords, ambient, basis);
    def.algebroid = std::move(induced.algebroid);
    def.metric = std::move(induced.metric);
  }

  const auto diag = check_metric(def.metric, checks, options.require_positive_metric);
  if (!diag.ok) {
    std::ostringstream os;
    os << "bundle metric is " << (options.require_positive_metric ? "not positive definite" : "degenerate") << " at "
       << point_text(*diag.witness) << " (eigenvalue " << diag.worst_eigenvalue << ")";
    throw SpecError(spec.mode == "intrinsic" ? "/metric" : "/distribution", os.str());
  }

  // Potential and force.
  {
    const Expr v = ctx.parse(spec.potential, "/potential");
    def.has_potential = !v.is_constant();
    def.potential = expression_field(v, coords, def.parameters);
    if (spec.force.empty()) {
      def.force = ForceField::zero(m);
    } else {
      def.force = ForceField::from_expressions(ctx.parse_row(spec.force, "/force", m, fiber_names(m)), coords,
                                               def.parameters);
    }
  }

  // Named sections.
  auto add_section = [&](const std::string& name, Section s, const std::string& path) {
    if (!def.sections.emplace(name, s.with_label(name)).second) throw SpecError(path, "duplicate section name '" + name + "'");
  };
  for (std::size_t a = 0; a < m; ++a) add_section(spec.fiber[a], Section::basis(m, a), index_path("/fiber", a));

  std::vector<Section> controls;
  for (std::size_t l = 0; l < spec.controls.sections.size(); ++l) {
    const auto& c = spec.controls.sections[l];
    const std::string p = index_path("/controls/sections", l);
    Section s = expression_section(ctx.parse_row(c.coefficients, p + "/coefficients", m), coords, def.parameters, c.name);
    if (!def.sections.count(c.name)) add_section(c.name, s, p + "/name");
    controls.push_back(s.with_label(c.name));
  }
  for (std::size_t l = 0; l < spec.controls.covectors.size(); ++l) {
    const auto& c = spec.controls.covectors[l];
    const std::string p = index_path("/controls/covectors", l);
    const OneForm kappa = [&] {
      const Section tmp = expression_section(ctx.parse_row(c.coefficients, p + "/coefficients", m), coords,
                                             def.parameters, c.name);
      return OneForm(m, [tmp](const BasePoint& x) { return tmp(x); }, 0, c.name);
    }();
    const BundleMetric g = def.metric;
    Section s(m, [kappa, g](const BasePoint& x) { return sharp(g, kappa(x), x); }, g.level(), c.name);
    if (!def.sections.count(c.name)) add_section(c.name, s, p + "/name");
    controls.push_back(s);
  }
  def.controls = Subbundle(controls, "D_c");
  if (!controls.empty()) {
    const auto rank = check_subbundle(def.controls, def.metric, checks);
    if (!rank.ok) throw SpecError("/controls", "input sections are dependent at " + point_text(*rank.witness));
  }
  if (!spec.controls.complement.empty()) {
    std::vector<Section> comp;
    for (std::size_t l = 0; l < spec.controls.complement.size(); ++l) {
      const auto& c = spec.controls.complement[l];
      const std::string p = index_path("/controls/complement", l);
      Section s = expression_section(ctx.parse_row(c.coefficients, p + "/coefficients", m), coords, def.parameters,
                                     c.name);
      if (!def.sections.count(c.name)) add_section(c.name, s, p + "/name");
      comp.push_back(s.with_label(c.name));
    }
    def.control_complement = Subbundle(comp, "D_c_perp");
    const auto cross = check_declared_complement(Projector(def.controls, def.metric), *def.control_complement, checks);
    if (!cross.rank_ok) {
      throw SpecError("/controls/complement", "declared complement has the wrong rank at " + point_text(*cross.witness));
    }
    if (cross.worst_residual > 1e-8) {
      std::ostringstream os;
      os << "declared complement is not orthogonal to the controls (relative residual " << cross.worst_residual
         << " at " << point_text(*cross.witness) << ")";
      throw SpecError("/controls/complement", os.str());
    }
  }

  for (std::size_t k = 0; k < spec.candidates.sections.size(); ++k) {
    const auto& c = spec.candidates.sections[k];
    const std::string p = index_path("/candidates/sections", k);
    add_section(c.name,
                expression_section(ctx.parse_row(c.coefficients, p + "/coefficients", m), coords, def.parameters),
                p + "/name");
  }
  for (std::size_t k = 0; k < spec.candidates.functions.size(); ++k) {
    const auto& f = spec.candidates.functions[k];
    const std::string p = index_path("/candidates/functions", k);
    if (!def.functions.emplace(f.name, expression_field(ctx.parse(f.expr, p + "/expr"), coords, def.parameters))
             .second) {
      throw SpecError(p + "/name", "duplicate function name '" + f.name + "'");
    }
  }

  def.distributions.emplace("D", Subbundle::full(m, "D"));
  def.distributions.emplace("D_c", def.controls);
  for (std::size_t k = 0; k < spec.candidates.distributions.size(); ++k) {
    const auto& d = spec.candidates.distributions[k];
    const std::string p = index_path("/candidates/distributions", k);
    std::vector<Section> members;
    for (std::size_t i = 0; i < d.sections.size(); ++i) {
      auto it = def.sections.find(d.sections[i]);
      if (it == def.sections.end()) throw SpecError(index_path(p + "/sections", i), "unknown section '" + d.sections[i] + "'");
      members.push_back(it->second);
    }
    Subbundle sub(members, d.name);
    const auto rank = check_subbundle(sub, def.metric, checks);
    if (!rank.ok) throw SpecError(p, "sections are dependent at " + point_text(*rank.witness));
    if (!def.distributions.emplace(d.name, std::move(sub)).second) {
      throw SpecError(p + "/name", "duplicate distribution name '" + d.name + "'");
    }
  }
  return def;
}

SystemDefinition load_spec(const json& doc, const LoadOptions& options) {
  return load_spec(spec_from_json(doc), options);
}

SystemDefinition load_spec_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw SpecError("", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError("", std::string("invalid JSON: ") + e.what());
  }
  return load_spec(doc, options);
}

}  // namespace skalg
