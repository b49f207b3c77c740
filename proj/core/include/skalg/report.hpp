#pragma once

// Aggregation of verification results, Christoffel tables and closure ranks.

#include "skalg/reduction.hpp"

#include <nlohmann/json.hpp>

namespace skalg {

struct ChristoffelTable {
  std::string system;
  std::vector<std::string> labels;
  ChristoffelTensor tensor;
  /// Entries at or below this magnitude are omitted from the sparse listing.
  double threshold = 1e-10;
};

struct ClosureEntry {
  std::string name;
  BasePoint point;
  std::vector<std::size_t> ranks;
  /// Rank that counts as full (base dimension for Lie closures, bundle rank
  /// for symmetric closures).
  std::size_t full_rank = 0;
};

struct Report {
  std::string system;
  std::optional<std::uint64_t> seed;
  std::vector<VerificationReport> checks;
  std::vector<ChristoffelTable> christoffel;
  std::vector<ClosureEntry> closures;

  bool empty() const { return checks.empty() && christoffel.empty() && closures.empty(); }
  /// True when no check failed or was inconclusive.
  bool all_passed() const;
  std::size_t count(Verdict v) const;
};

void to_json(nlohmann::json& j, const ChristoffelTable& t);
void to_json(nlohmann::json& j, const ClosureEntry& c);
void to_json(nlohmann::json& j, const Report& r);

/// One line per check and per closure plus the nonzero Christoffel symbols.
std::string summary_text(const Report& r);
std::string summary_text(const VerificationReport& r);
std::string summary_text(const ChristoffelTable& t);

}  // namespace skalg
