#include "skalg/app.hpp"

#include <future>

namespace skalg::app {

std::vector<ClosureEntry> closure_entries(const SystemDefinition& def, const BasePoint& p, int depth) {
  std::vector<ClosureEntry> out;
  const auto& s = def.algebroid;
  if (def.base_dim() > 0) {
    std::vector<BaseVectorField> inputs;
    for (const auto& x : def.controls.spanning) inputs.push_back(anchored(s, x));
    std::vector<std::size_t> whole, controls;
    for (int k = 1; k <= depth; ++k) {
      whole.push_back(lie_closure_rank(s, p, k));
      if (!inputs.empty()) controls.push_back(lie_closure_rank(inputs, p, k));
    }
    out.push_back({"lie_closure D", p, whole, def.base_dim()});
    if (!inputs.empty()) out.push_back({"lie_closure D_c", p, controls, def.base_dim()});
  }
  if (def.controls.rank > 0) {
    out.push_back({"symmetric_closure D_c", p, symmetric_closure(s, def.metric, def.controls, depth, p).ranks,
                   def.rank()});
  }
  return out;
}

Report run_battery(const SystemDefinition& def, const BatteryOptions& options) {
  Report report;
  report.system = def.spec.name;
  report.seed = options.settings.seed;

  const auto& s = def.algebroid;
  const auto& g = def.metric;
  const ForceField f = def.total_force();
  const auto samples = def.samples(options.samples, options.settings.seed);
  const BasePoint at = options.at ? *options.at : default_point(def);
  const double tol = options.settings.tolerance;
  CheckSettings settings = options.settings;
  if (settings.chart == nullptr && def.base_dim() > 0) settings.chart = &def.chart;

  report.christoffel.push_back({def.spec.name, def.spec.fiber, christoffel(s, g, at)});
  report.closures = closure_entries(def, at, options.depth);

  std::vector<std::future<VerificationReport>> jobs;
  auto launch = [&](auto fn) { jobs.push_back(std::async(std::launch::async, fn)); };

  const bool has_base = def.base_dim() > 0;
  if (has_base) {
    std::vector<Section> decoupling = def.controls.spanning;
    if (def.control_complement) {
      for (const auto& y : def.control_complement->spanning) decoupling.push_back(y);
    }
    for (const auto& x : decoupling) {
      launch([&, x] { return is_decoupling(s, g, f, def.controls, x, samples, tol); });
    }
    for (const auto& d : def.spec.candidates.distributions) {
      const Subbundle sub = def.distribution(d.name);
      launch([&, sub] { return kinematic_reduction_check(s, g, f, def.controls, sub, samples, tol); });
    }
  }
  if (def.controls.rank > 0) {
    launch([&] { return geodesic_invariance_check(s, g, def.controls, samples, settings); });
  }
  if (has_base) {
    const Subbundle candidate = def.spec.candidates.distributions.empty()
                                    ? def.controls
                                    : def.distribution(def.spec.candidates.distributions.front().name);
    launch([&, candidate] {
      return maximal_reducibility_check(s, g, f, def.controls, candidate, samples, settings);
    });
    for (const auto& c : def.spec.candidates.sections) {
      const Section x = def.section(c.name);
      launch([&, x] { return hj_check(s, g, def.potential, def.controls, x, samples, tol); });
    }
    for (const auto& fn : def.spec.candidates.functions) {
      const ScalarField h = def.function(fn.name);
      launch([&, h, name = fn.name] {
        auto r = reparam_admissible(s, g, def.controls, h, samples, tol);
        r.subject = name;
        return r;
      });
    }
  }
  for (auto& j : jobs) report.checks.push_back(j.get());
  return report;
}

}  // namespace skalg::app
