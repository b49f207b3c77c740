#include "skalg/builtins.hpp"

#include <algorithm>
#include <cctype>

namespace skalg::builtins {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<NamedSection> basis_controls(const std::vector<std::string>& labels, std::vector<std::size_t> which) {
  std::vector<NamedSection> out;
  for (std::size_t a : which) {
    std::vector<std::string> c(labels.size(), "0");
    c[a] = "1";
    out.push_back({labels[a], c});
  }
  return out;
}

std::vector<std::vector<std::string>> diagonal(const std::vector<std::string>& d) {
  std::vector<std::vector<std::string>> g(d.size(), std::vector<std::string>(d.size(), "0"));
  for (std::size_t i = 0; i < d.size(); ++i) g[i][i] = d[i];
  return g;
}

// Coefficients of g(x - h cos(theta), y - h sin(theta)) for a fixed smooth g.
const char* kPlanarInvariant = "1 + 0.5*sin(x - h*cos(theta)) + 0.25*(y - h*sin(theta))";
// The same family with g the sum of its arguments.
const char* kPlanarSum = "(x - h*cos(theta)) + (y - h*sin(theta))";
// f(r, theta - psi).
const char* kLegInvariant = "1 + 0.3*sin(theta - psi) + 0.1*r";

void planar_common(SystemSpec& s, double m, double J, double h) {
  s.parameters = {{"m", m}, {"J", J}, {"h", h}};
  s.base = {"x", "y", "theta"};
  s.fiber = {"Y1", "Y2", "Y3"};
  s.controls.sections = basis_controls(s.fiber, {0, 1});
  s.controls.complement = basis_controls(s.fiber, {2});
  s.chart.lower = {-3.0, -3.0, -kPi};
  s.chart.upper = {3.0, 3.0, kPi};
  s.candidates.functions = {{"f", kPlanarInvariant}, {"g", kPlanarSum}, {"x", "x"}};
  s.candidates.sections = {{"fY1", {kPlanarInvariant, "0", "0"}},
                           {"fY2", {"0", kPlanarInvariant, "0"}},
                           {"gY1", {kPlanarSum, "0", "0"}},
                           {"xY1", {"x", "0", "0"}}};
  s.candidates.distributions = {{"Y12", {"Y1", "Y2"}}};
}

void leg_common(SystemSpec& s, double m, double J) {
  s.parameters = {{"m", m}, {"J", J}};
  s.base = {"r", "theta", "psi"};
  s.fiber = {"Y1", "Y2", "Y3"};
  s.controls.sections = basis_controls(s.fiber, {0, 1});
  s.controls.complement = basis_controls(s.fiber, {2});
  s.chart.lower = {0.5, -2.0 * kPi, -2.0 * kPi};
  s.chart.upper = {3.0, 2.0 * kPi, 2.0 * kPi};
  s.candidates.functions = {{"alpha", kLegInvariant}, {"r", "r"}, {"theta", "theta"}};
  s.candidates.sections = {{"alphaY1", {kLegInvariant, "0", "0"}}, {"thetaY1", {"theta", "0", "0"}}};
  s.candidates.distributions = {{"Y12", {"Y1", "Y2"}}};
}

const std::vector<std::vector<std::string>> kPlanarFrame = {
    {"cos(theta)/m", "sin(theta)/m", "0"},
    {"-sin(theta)/m", "cos(theta)/m", "-h/J"},
    {"-sin(theta)", "cos(theta)", "1/h"},
};

const std::vector<std::vector<std::string>> kLegFrame = {
    {"0", "1/(m*r^2)", "-1/J"},
    {"1/m", "0", "0"},
    {"0", "1", "1"},
};

std::string normalize(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  return name;
}

}  // namespace

SystemSpec planar_body(double m, double J, double h) {
  SystemSpec s;
  s.name = "planar_body";
  s.mode = "intrinsic";
  planar_common(s, m, J, h);
  s.anchor = kPlanarFrame;
  s.structure = {
      {2, 1, 2, "h/(J + m*h^2)"},
      {3, 1, 2, "h^3/((J + m*h^2)*J)"},
      {2, 1, 3, "-J/(h*(J + m*h^2))"},
      {3, 1, 3, "-h/(J + m*h^2)"},
      {1, 2, 3, "(m*h^2 + J)/(h*J)"},
  };
  s.metric = diagonal({"1/m", "1/m + h^2/J", "m + J/h^2"});
  return s;
}

SystemSpec planar_body_embedded(double m, double J, double h) {
  SystemSpec s;
  s.name = "planar_body_embedded";
  s.mode = "embedded";
  planar_common(s, m, J, h);
  s.ambient = diagonal({"m", "m", "J"});
  s.distribution = kPlanarFrame;
  return s;
}

SystemSpec robotic_leg(double m, double J) {
  SystemSpec s;
  s.name = "robotic_leg";
  s.mode = "intrinsic";
  leg_common(s, m, J);
  s.anchor = kLegFrame;
  s.structure = {
      {1, 1, 2, "2*J/(m*r*(J + m*r^2))"},
      {3, 1, 2, "2/(m*r*(J + m*r^2))"},
  };
  s.metric = diagonal({"1/(m*r^2) + 1/J", "1/m", "J + m*r^2"});
  return s;
}

SystemSpec robotic_leg_embedded(double m, double J) {
  SystemSpec s;
  s.name = "robotic_leg_embedded";
  s.mode = "embedded";
  leg_common(s, m, J);
  s.ambient = diagonal({"m", "m*r^2", "J"});
  s.distribution = kLegFrame;
  return s;
}

SystemSpec snakeboard(double mc, double mr, double mw, double Jc, double Jr, double Jw, double l) {
  const std::string mt = "(mc + mr + 2*mw)";
  const std::string jt = "(Jc + Jr + 2*(Jw + mw*l^2))";
  const std::string c1 = "(" + mt + "*l^2*cos(phi)^2 + " + jt + "*sin(phi)^2)";
  const std::string a = "(Jr*l*cos(phi)*sin(phi)/" + c1 + ")";
  const std::string b = "(Jr*sin(phi)^2/" + c1 + ")";
  const std::string jd = "(" + jt + " - Jr)";

  SystemSpec s;
  s.name = "snakeboard";
  s.mode = "embedded";
  s.parameters = {{"mc", mc}, {"mr", mr}, {"mw", mw}, {"Jc", Jc}, {"Jr", Jr}, {"Jw", Jw}, {"l", l}};
  s.base = {"x", "y", "theta", "psi", "phi"};
  s.fiber = {"X1", "X2", "X3"};
  s.ambient = {
      {mt, "0", "0", "0", "0"},
      {"0", mt, "0", "0", "0"},
      {"0", "0", jt, "Jr", "0"},
      {"0", "0", "Jr", "Jr", "0"},
      {"0", "0", "0", "0", "2*Jw"},
  };
  s.distribution = {
      {"l*cos(phi)*cos(theta)", "l*cos(phi)*sin(theta)", "-sin(phi)", "0", "0"},
      {a + "*cos(theta)", a + "*sin(theta)", "-" + b, "1", "0"},
      {"0", "0", "0", "0", "1"},
  };
  s.complement = {
      {"-sin(theta + phi)/" + mt, "cos(theta + phi)/" + mt, "-l*cos(phi)/" + jd, "l*cos(phi)/" + jd, "0"},
      {"-sin(theta - phi)/" + mt, "cos(theta - phi)/" + mt, "l*cos(phi)/" + jd, "-l*cos(phi)/" + jd, "0"},
  };
  s.controls.sections = basis_controls(s.fiber, {1, 2});
  s.controls.complement = basis_controls(s.fiber, {0});
  s.chart.lower = {-2.0, -2.0, -kPi, -kPi, -3.0};
  s.chart.upper = {2.0, 2.0, kPi, kPi, 3.0};
  s.chart.exclusions = {{"phi", kPi / 2, 0.1}, {"phi", -kPi / 2, 0.1}};
  s.candidates.distributions = {{"X23", {"X2", "X3"}}};
  return s;
}

SystemSpec euclidean(std::size_t n) {
  if (n == 0) throw SpecError("/base", "euclidean space needs at least one coordinate");
  SystemSpec s;
  s.name = "euclidean" + std::to_string(n);
  s.mode = "intrinsic";
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < n; ++i) {
    s.base.push_back("x" + std::to_string(i + 1));
    s.fiber.push_back("e" + std::to_string(i + 1));
    all.push_back(i);
  }
  s.anchor.assign(n, std::vector<std::string>(n, "0"));
  for (std::size_t i = 0; i < n; ++i) s.anchor[i][i] = "1";
  s.metric = diagonal(std::vector<std::string>(n, "1"));
  s.controls.sections = basis_controls(s.fiber, all);
  s.chart.lower.assign(n, -5.0);
  s.chart.upper.assign(n, 5.0);
  return s;
}

SystemSpec suslov(std::array<double, 3> inertia, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (indices.empty() || indices.back() > 2 || std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw SpecError("/fiber", "constrained indices must be distinct values in {0, 1, 2}");
  }
  SystemSpec s;
  s.name = "suslov";
  s.mode = "intrinsic";
  std::vector<std::string> diag;
  std::vector<std::size_t> all;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::string i = std::to_string(indices[k] + 1);
    s.parameters["I" + i] = inertia[indices[k]];
    s.fiber.push_back("e" + i);
    diag.push_back("I" + i);
    all.push_back(k);
  }
  s.anchor.assign(indices.size(), {});
  // [e_i, e_j] = e_k for cyclic (i, j, k); components outside the subspace
  // are dropped by the inertia-orthogonal projection, which for a diagonal
  // inertia is the coordinate projection.
  auto position = [&](std::size_t i) {
    auto it = std::find(indices.begin(), indices.end(), i);
    return it == indices.end() ? std::size_t(0) : static_cast<std::size_t>(it - indices.begin()) + 1;
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = (i + 1) % 3;
    const std::size_t k = (i + 2) % 3;
    const std::size_t pi = position(i), pj = position(j), pk = position(k);
    if (pi == 0 || pj == 0 || pk == 0) continue;
    if (pi < pj) {
      s.structure.push_back({pk, pi, pj, "1"});
    } else {
      s.structure.push_back({pk, pj, pi, "-1"});
    }
  }
  s.metric = diagonal(diag);
  s.controls.sections = basis_controls(s.fiber, all);
  return s;
}

std::vector<std::string> names() {
  return {"planar_body", "planar_body_embedded", "robotic_leg", "robotic_leg_embedded", "snakeboard",
          "euclidean2",  "euclidean3",           "suslov",      "suslov_constrained"};
}

SystemSpec builtin(const std::string& raw) {
  const std::string name = normalize(raw);
  if (name == "planar_body") return planar_body();
  if (name == "planar_body_embedded") return planar_body_embedded();
  if (name == "robotic_leg") return robotic_leg();
  if (name == "robotic_leg_embedded") return robotic_leg_embedded();
  if (name == "snakeboard") return snakeboard();
  if (name == "suslov") return suslov();
  if (name == "suslov_constrained") {
    auto s = suslov({1.0, 2.0, 3.0}, {0, 1});
    s.name = "suslov_constrained";
    return s;
  }
  if (name == "euclidean") return euclidean(2);
  if (name.rfind("euclidean", 0) == 0 && name.size() > 9 &&
      std::all_of(name.begin() + 9, name.end(), [](unsigned char c) { return std::isdigit(c); }) &&
      name.size() < 12) {
    return euclidean(std::stoul(name.substr(9)));
  }
  throw SpecError("", "unknown builtin system '" + raw + "'");
}

bool is_builtin(const std::string& name) {
  try {
    builtin(name);
    return true;
  } catch (const SpecError&) {
    return false;
  }
}

}  // namespace skalg::builtins
