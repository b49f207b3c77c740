#pragma once

// System description documents and their loaded form.

#include "skalg/reduction.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>

namespace skalg {

/// Error in a system document, addressed by a JSON-pointer-like path.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct StructureSpec {
  std::size_t upper = 1;  // one-based
  std::size_t a = 1;
  std::size_t b = 2;
  std::string value;
};

struct ExclusionSpec {
  std::string coordinate;
  double value = 0.0;
  double margin = 0.1;
};

struct ChartSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<ExclusionSpec> exclusions;
};

struct NamedSection {
  std::string name;
  std::vector<std::string> coefficients;
};

struct NamedFunction {
  std::string name;
  std::string expr;
};

struct NamedDistribution {
  std::string name;
  std::vector<std::string> sections;
};

struct ControlsSpec {
  /// Input sections in fiber coefficients.
  std::vector<NamedSection> sections;
  /// Alternatively input covectors; the sections are their metric sharps.
  std::vector<NamedSection> covectors;
  /// Declared complement of the control distribution, cross-checked.
  std::vector<NamedSection> complement;
};

struct CandidatesSpec {
  std::vector<NamedSection> sections;
  std::vector<NamedFunction> functions;
  std::vector<NamedDistribution> distributions;
};

/// Textual system description, one-to-one with the JSON document.
struct SystemSpec {
  std::string name;
  std::map<std::string, double> parameters;
  std::vector<std::string> base;
  std::vector<std::string> fiber;  // basis labels; size is the rank
  std::string mode = "intrinsic";

  // intrinsic
  std::vector<std::vector<std::string>> anchor;  // one row of n entries per basis section
  std::vector<StructureSpec> structure;
  std::vector<std::vector<std::string>> metric;

  // embedded
  std::vector<std::vector<std::string>> ambient;
  std::vector<std::vector<std::string>> distribution;
  std::vector<std::vector<std::string>> complement;

  std::string potential = "0";
  std::vector<std::string> force;  // over base coordinates and y1..ym

  ControlsSpec controls;
  ChartSpec chart;
  CandidatesSpec candidates;
};

nlohmann::json spec_to_json(const SystemSpec& spec);
/// Throws SpecError with the path of the offending member.
SystemSpec spec_from_json(const nlohmann::json& doc);

/// Replaces parameter values; unknown names are rejected.
void override_parameters(SystemSpec& spec, const std::map<std::string, double>& values);

struct LoadOptions {
  std::size_t check_samples = 24;
  std::uint64_t seed = 0;
  bool require_positive_metric = true;
};

/// Everything needed by the numerical modules.
struct SystemDefinition {
  SystemSpec spec;
  Bindings parameters;
  Algebroid algebroid;
  BundleMetric metric;
  ScalarField potential;
  bool has_potential = false;
  ForceField force;
  Subbundle controls;
  std::optional<Subbundle> control_complement;
  Chart chart;
  std::map<std::string, Section> sections;  // basis, controls and candidates by name
  std::map<std::string, ScalarField> functions;
  std::map<std::string, Subbundle> distributions;

  std::size_t base_dim() const { return algebroid.base_dim(); }
  std::size_t rank() const { return algebroid.rank(); }

  /// Force plus -grad V.
  ForceField total_force() const;
  /// Deterministic sample points in the chart (a single point when n = 0).
  std::vector<BasePoint> samples(std::size_t count, std::uint64_t seed) const;
  const Section& section(const std::string& name) const;
  const Subbundle& distribution(const std::string& name) const;
  const ScalarField& function(const std::string& name) const;
};

SystemDefinition load_spec(const SystemSpec& spec, const LoadOptions& options = {});
SystemDefinition load_spec(const nlohmann::json& doc, const LoadOptions& options = {});
SystemDefinition load_spec_file(const std::filesystem::path& path, const LoadOptions& options = {});

struct InducedAlgebroid {
  Algebroid algebroid;
  BundleMetric metric;
};

/// Restriction of (TM, ambient) to the distribution spanned by `basis`:
/// anchor = inclusion, bracket = G-orthogonal projection of the Lie bracket,
/// metric = restricted ambient metric.
InducedAlgebroid induced_algebroid(const std::vector<std::string>& coordinates, const BundleMetric& ambient,
                                   const std::vector<BaseVectorField>& basis);

/// Worst |G(Z, X)| / (|Z| |X|) between complement and distribution fields,
/// and whether the combined family spans TM.
struct OrthogonalityCheck {
  double worst = 0.0;
  std::optional<BasePoint> witness;
  bool spans = true;
};
OrthogonalityCheck check_orthogonal_complement(const BundleMetric& ambient, const std::vector<BaseVectorField>& basis,
                                               const std::vector<BaseVectorField>& complement,
                                               const std::vector<BasePoint>& points);

}  // namespace skalg
