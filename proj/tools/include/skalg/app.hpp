#pragma once

// Command-line front end. The entry points take explicit streams so the
// tests can drive them in-process.

#include "skalg/report.hpp"
#include "skalg/system.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace skalg::app {

/// "k=v,k=v" to a map; throws std::invalid_argument on malformed input.
std::map<std::string, double> parse_params(const std::string& text);
/// "a,b,c" to numbers; throws std::invalid_argument.
std::vector<double> parse_list(const std::string& text);

/// A builtin name or a path to a system document, with parameter overrides
/// applied before loading.
SystemDefinition load_system(const std::string& ref, const std::map<std::string, double>& params = {},
                             const LoadOptions& options = {});

/// Default evaluation point: the chart centre when admissible, otherwise the
/// first sample.
BasePoint default_point(const SystemDefinition& def);

/// Lie closure ranks of the anchored basis and of the inputs, and the
/// symmetric closure of the inputs, for depths 1..depth.
std::vector<ClosureEntry> closure_entries(const SystemDefinition& def, const BasePoint& p, int depth);

struct BatteryOptions {
  CheckSettings settings;
  std::size_t samples = 32;
  std::optional<BasePoint> at;
  int depth = 3;
};

/// Christoffel table, closure ranks and every applicable predicate for the
/// system's controls and candidates. Predicates run concurrently; the report
/// lists them in a fixed order.
Report run_battery(const SystemDefinition& def, const BatteryOptions& options);

/// Exit status: 0 every verdict passes, 1 some verdict fails or is
/// inconclusive, 2 usage or load error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skalg::app
