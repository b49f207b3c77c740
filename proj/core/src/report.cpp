#include "skalg/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace skalg {

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string point_text(const BasePoint& p) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ", " : "") + number(p(i));
  return s + ")";
}

nlohmann::json point_json(const BasePoint& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

}  // namespace

bool Report::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed()) return false;
  }
  return true;
}

std::size_t Report::count(Verdict v) const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.verdict == v ? 1 : 0;
  return n;
}

void to_json(nlohmann::json& j, const ChristoffelTable& t) {
  const std::size_t m = t.tensor.rank();
  auto full = nlohmann::json::array();
  auto nonzero = nlohmann::json::array();
  for (std::size_t a = 0; a < m; ++a) {
    auto plane = nlohmann::json::array();
    for (std::size_t b = 0; b < m; ++b) {
      auto row = nlohmann::json::array();
      for (std::size_t c = 0; c < m; ++c) {
        const double v = t.tensor(a, b, c);
        row.push_back(v);
        if (std::abs(v) > t.threshold) nonzero.push_back({{"index", {a + 1, b + 1, c + 1}}, {"value", v}});
      }
      plane.push_back(std::move(row));
    }
    full.push_back(std::move(plane));
  }
  j = {{"system", t.system},  {"point", point_json(t.tensor.point)}, {"labels", t.labels},
       {"gamma", std::move(full)}, {"nonzero", std::move(nonzero)}, {"threshold", t.threshold}};
}

void to_json(nlohmann::json& j, const ClosureEntry& c) {
  j = {{"name", c.name}, {"point", point_json(c.point)}, {"ranks", c.ranks}, {"full_rank", c.full_rank}};
}

void to_json(nlohmann::json& j, const Report& r) {
  j = nlohmann::json::object();
  j["system"] = r.system;
  if (r.seed) j["seed"] = *r.seed;
  j["checks"] = r.checks;
  j["christoffel"] = r.christoffel;
  j["closures"] = r.closures;
  j["summary"] = {{"pass", r.count(Verdict::Pass)},
                  {"fail", r.count(Verdict::Fail)},
                  {"inconclusive", r.count(Verdict::Inconclusive)}};
}

std::string summary_text(const VerificationReport& r) {
  std::ostringstream os;
  os << r.predicate;
  if (!r.subject.empty()) os << " [" << r.subject << "]";
  os << ": " << to_string(r.verdict) << "  worst " << number(r.worst_residual) << " (tol " << number(r.tolerance)
     << ", " << r.samples << " samples)";
  if (r.witness_point && !r.passed()) os << " at " << point_text(*r.witness_point);
  if (!r.note.empty()) os << "\n    note: " << r.note;
  return os.str();
}

std::string summary_text(const ChristoffelTable& t) {
  std::ostringstream os;
  os << "Christoffel symbols of " << t.system << " at " << point_text(t.tensor.point) << "\n";
  const std::size_t m = t.tensor.rank();
  bool any = false;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t c = 0; c < m; ++c) {
        const double v = t.tensor(a, b, c);
        if (std::abs(v) <= t.threshold) continue;
        os << "  Gamma^" << a + 1 << "_" << b + 1 << c + 1 << " = " << number(v) << "\n";
        any = true;
      }
    }
  }
  if (!any) os << "  (all zero)\n";
  return os.str();
}

std::string summary_text(const Report& r) {
  std::ostringstream os;
  if (!r.system.empty()) os << "system " << r.system << "\n";
  for (const auto& t : r.christoffel) os << summary_text(t);
  for (const auto& c : r.closures) {
    os << c.name << " at " << point_text(c.point) << ": ranks";
    for (auto k : c.ranks) os << " " << k;
    os << " (full " << c.full_rank << ")\n";
  }
  for (const auto& c : r.checks) os << summary_text(c) << "\n";
  if (!r.checks.empty()) {
    os << r.count(Verdict::Pass) << " pass, " << r.count(Verdict::Fail) << " fail, "
       << r.count(Verdict::Inconclusive) << " inconclusive\n";
  }
  return os.str();
}

}  // namespace skalg
