#include "skalg/app.hpp"

#include "skalg/builtins.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace skalg::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string strip_prefix(const std::string& name) {
  const std::string prefix = "candidate:";
  return name.rfind(prefix, 0) == 0 ? name.substr(prefix.size()) : name;
}

std::string csv_point(const std::optional<BasePoint>& p) {
  if (!p) return "";
  std::string s;
  for (Eigen::Index i = 0; i < p->size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", (*p)(i));
    s += (i ? " " : "") + std::string(buf);
  }
  return s;
}

void write_checks_csv(std::ostream& os, const std::vector<VerificationReport>& checks) {
  os << "predicate,subject,verdict,worst_residual,tolerance,samples,witness\n";
  for (const auto& c : checks) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", c.worst_residual);
    os << c.predicate << "," << c.subject << "," << to_string(c.verdict) << "," << buf << "," << c.tolerance << ","
       << c.samples << "," << csv_point(c.witness_point) << "\n";
  }
}

void write_christoffel_csv(std::ostream& os, const ChristoffelTable& t) {
  os << "upper,lower1,lower2,value\n";
  const std::size_t m = t.tensor.rank();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t c = 0; c < m; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", t.tensor(a, b, c));
        os << a + 1 << "," << b + 1 << "," << c + 1 << "," << buf << "\n";
      }
    }
  }
}

struct Common {
  std::string system;
  std::string params;
  double tol = 1e-5;
  std::size_t samples = 32;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--system", c.system, "Builtin name or path to a system document")->required();
  cmd->add_option("--params", c.params, "Parameter overrides k=v,...");
  cmd->add_option("--tol", c.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", c.samples, "Number of sample points")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Sampling seed");
  cmd->add_option("--out", c.out, "Write the result to this file");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
}

class Output {
 public:
  Output(const Common& c, std::ostream& out) : path_(c.out), out_(out) {}
  std::ostream& stream() { return buffer_; }
  /// Writes to the file (and a summary line to `out`) or straight to `out`.
  void flush() {
    if (path_.empty()) {
      out_ << buffer_.str();
      return;
    }
    std::ofstream f(path_);
    if (!f) throw std::runtime_error("cannot write '" + path_ + "'");
    f << buffer_.str();
    out_ << "wrote " << path_ << "\n";
  }

 private:
  std::string path_;
  std::ostream& out_;
  std::ostringstream buffer_;
};

int verdict_status(const std::vector<VerificationReport>& checks) {
  for (const auto& c : checks) {
    if (!c.passed()) return 1;
  }
  return 0;
}

int emit_checks(const Common& c, std::ostream& out, std::vector<VerificationReport> checks) {
  for (auto& r : checks) r.seed = c.seed;
  Output o(c, out);
  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::object();
    j["system"] = c.system;
    j["seed"] = c.seed;
    j["checks"] = checks;
    o.stream() << j.dump(2) << "\n";
  } else if (c.format == "csv") {
    write_checks_csv(o.stream(), checks);
  } else {
    for (const auto& r : checks) o.stream() << summary_text(r) << "\n";
  }
  o.flush();
  return verdict_status(checks);
}

BasePoint read_point(const std::string& text, const SystemDefinition& def, const char* what) {
  if (text.empty()) return default_point(def);
  const auto v = parse_list(text);
  if (v.size() != def.base_dim()) {
    throw std::invalid_argument(std::string(what) + " needs " + std::to_string(def.base_dim()) + " coordinates");
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected k=v, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("empty parameter name in '" + item + "'");
    out[key] = to_number(trim(item.substr(eq + 1)));
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_number(item));
  return out;
}

SystemDefinition load_system(const std::string& ref, const std::map<std::string, double>& params,
                             const LoadOptions& options) {
  SystemSpec spec;
  if (builtins::is_builtin(ref)) {
    spec = builtins::builtin(ref);
  } else {
    std::ifstream in(ref);
    if (!in) throw SpecError("", "'" + ref + "' is neither a builtin system nor a readable file");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw SpecError("", std::string("invalid JSON: ") + e.what());
    }
    spec = spec_from_json(doc);
  }
  override_parameters(spec, params);
  return load_spec(spec, options);
}

BasePoint default_point(const SystemDefinition& def) {
  if (def.base_dim() == 0) return BasePoint(0);
  const BasePoint centre = 0.5 * (def.chart.lower + def.chart.upper);
  if (def.chart.admissible(centre)) return centre;
  return def.samples(1, 0).front();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric mechanics on skew-symmetric algebroids: connections, simulation and reduction checks",
               "skalg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common c;
  std::string at, x0, y0, controls, distribution;
  std::vector<std::string> sections, functions;
  double horizon = 5.0, step = 1e-3, traj_tol = 1e-3;
  int depth = 3;
  bool feedback = false, unconstrained = false, trajectory = false;

  auto* christoffel_cmd = app.add_subcommand("christoffel", "Christoffel symbols at a point");
  christoffel_cmd->add_option("--at", at, "Base point x1,...,xn (default: chart centre)");

  auto* simulate = app.add_subcommand("simulate", "Integrate the forced geodesic equation");
  simulate->add_option("--x0", x0, "Initial base point");
  simulate->add_option("--y0", y0, "Initial fiber point (default e1)");
  simulate->add_option("--horizon", horizon, "Final time")->check(CLI::PositiveNumber);
  simulate->add_option("--step", step, "RK4 step")->check(CLI::PositiveNumber);
  simulate->add_option("--controls", controls, "Control expressions u1;u2;... in t (or coordinates)");
  simulate->add_flag("--feedback", feedback, "Controls are state feedback in the coordinates");

  auto* decoupling = app.add_subcommand("check-decoupling", "Decoupling test for sections");
  decoupling->add_option("--section", sections, "Section name (default: inputs and declared complement)");

  auto* reduction = app.add_subcommand("check-reduction", "Kinematic reduction test for a distribution");
  reduction->add_option("--distribution", distribution, "Distribution name (default: first candidate)");

  auto* geoinv = app.add_subcommand("check-geoinv", "Geodesic invariance of a distribution");
  geoinv->add_option("--distribution", distribution, "Distribution name (default: D_c)");
  geoinv->add_option("--step", step, "Integration step for the empirical criterion")->check(CLI::PositiveNumber);
  geoinv->add_option("--horizon", horizon, "Integration horizon")->check(CLI::PositiveNumber);

  auto* maxred = app.add_subcommand("check-maxred", "Maximal reducibility");
  maxred->add_option("--distribution", distribution, "Candidate distribution (default: first candidate)");

  auto* hj = app.add_subcommand("check-hj", "Hamilton-Jacobi test for sections");
  hj->add_option("--section", sections, "Section name, optionally prefixed 'candidate:'");
  hj->add_flag("--unconstrained", unconstrained, "Test against every direction, not only the complement");
  hj->add_flag("--trajectory", trajectory, "Also integrate the base flow and test the lifted curve");
  hj->add_option("--x0", x0, "Start of the trajectory test");
  hj->add_option("--horizon", horizon, "Trajectory horizon")->check(CLI::PositiveNumber);
  hj->add_option("--step", step, "Trajectory step")->check(CLI::PositiveNumber);
  hj->add_option("--trajectory-tol", traj_tol, "Tolerance of the trajectory test")->check(CLI::PositiveNumber);

  auto* reparam = app.add_subcommand("check-reparam", "Admissible reparametrization functions");
  reparam->add_option("--function", functions, "Function name (default: all candidates)");

  auto* closure = app.add_subcommand("closure", "Lie and symmetric closure ranks");
  closure->add_option("--at", at, "Base point (default: chart centre)");
  closure->add_option("--depth", depth, "Bracket depth")->check(CLI::PositiveNumber);

  auto* report_cmd = app.add_subcommand("report", "Full verification battery");
  report_cmd->add_option("--at", at, "Point for tables and closures");
  report_cmd->add_option("--depth", depth, "Bracket depth")->check(CLI::PositiveNumber);

  for (auto* cmd : app.get_subcommands({})) add_common(cmd, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const SystemDefinition def = load_system(c.system, parse_params(c.params));
    const auto samples = def.samples(c.samples, c.seed);
    const auto& s = def.algebroid;
    const auto& g = def.metric;
    const ForceField f = def.total_force();
    CheckSettings settings;
    settings.tolerance = c.tol;
    settings.seed = c.seed;
    settings.chart = def.base_dim() > 0 ? &def.chart : nullptr;

    if (christoffel_cmd->parsed()) {
      const ChristoffelTable table{def.spec.name, def.spec.fiber, christoffel(s, g, read_point(at, def, "--at"))};
      Output o(c, out);
      if (c.format == "json") {
        o.stream() << nlohmann::json(table).dump(2) << "\n";
      } else if (c.format == "csv") {
        write_christoffel_csv(o.stream(), table);
      } else {
        o.stream() << summary_text(table);
      }
      o.flush();
      return 0;
    }

    if (simulate->parsed()) {
      const BasePoint p0 = read_point(x0, def, "--x0");
      FiberPoint q = FiberPoint::Zero(static_cast<Eigen::Index>(def.rank()));
      if (y0.empty()) {
        q(0) = 1.0;
      } else {
        const auto v = parse_list(y0);
        if (v.size() != def.rank()) throw std::invalid_argument("--y0 needs " + std::to_string(def.rank()) + " values");
        q = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
      Trajectory traj;
      if (controls.empty()) {
        traj = integrate_forced(s, g, f, {p0, q}, 0.0, horizon, step, settings.chart);
      } else {
        std::vector<Expr> u;
        for (const auto& e : split(controls, ';')) u.push_back(Expr::parse(e));
        if (u.size() != def.controls.spanning.size()) {
          throw std::invalid_argument("--controls needs one expression per input (" +
                                      std::to_string(def.controls.spanning.size()) + ")");
        }
        const ControlSignal signal(u, feedback ? ControlSignal::Mode::StateFeedback : ControlSignal::Mode::TimeDriven,
                                   def.spec.base, def.parameters);
        const auto inputs = def.controls.spanning;
        traj = integrate(
            [&](double t, const TotalPoint& x) { return controlled_field(s, g, f, inputs, signal, t, x); }, {p0, q},
            0.0, horizon, step, settings.chart);
      }
      Output o(c, out);
      if (c.format == "csv") {
        write_csv(o.stream(), traj);
      } else {
        const double e0 = energy(s, g, def.potential, {traj.base.front(), traj.fiber.front()});
        const double e1 = energy(s, g, def.potential, {traj.base.back(), traj.fiber.back()});
        if (c.format == "json") {
          nlohmann::json j{{"system", def.spec.name}, {"integrator", traj.integrator},  {"step", traj.step},
                           {"samples", traj.size()},  {"truncated", traj.truncated},    {"t_final", traj.times.back()},
                           {"energy_initial", e0},    {"energy_final", e1}};
          if (traj.truncated) j["diagnostic"] = traj.diagnostic;
          j["times"] = traj.times;
          auto rows = nlohmann::json::array();
          for (std::size_t k = 0; k < traj.size(); ++k) {
            rows.push_back({{"x", std::vector<double>(traj.base[k].data(), traj.base[k].data() + traj.base[k].size())},
                            {"y", std::vector<double>(traj.fiber[k].data(),
                                                      traj.fiber[k].data() + traj.fiber[k].size())}});
          }
          j["states"] = std::move(rows);
          o.stream() << j.dump(2) << "\n";
        } else {
          o.stream() << "integrated " << def.spec.name << " to t = " << traj.times.back() << " in " << traj.size() - 1
                     << " steps of " << traj.step << "\n";
          o.stream() << "energy " << e0 << " -> " << e1 << " (change " << e1 - e0 << ")\n";
          if (traj.truncated) o.stream() << "truncated: " << traj.diagnostic << "\n";
        }
      }
      o.flush();
      return traj.truncated ? 1 : 0;
    }

    if (decoupling->parsed()) {
      std::vector<Section> xs;
      if (sections.empty()) {
        xs = def.controls.spanning;
        if (def.control_complement) {
          for (const auto& y : def.control_complement->spanning) xs.push_back(y);
        }
      } else {
        for (const auto& name : sections) xs.push_back(def.section(strip_prefix(name)));
      }
      std::vector<VerificationReport> checks(xs.size());
      std::vector<std::future<VerificationReport>> jobs;
      for (const auto& x : xs) {
        jobs.push_back(std::async(std::launch::async, [&, x] {
          return is_decoupling(s, g, f, def.controls, x, samples, c.tol);
        }));
      }
      for (std::size_t i = 0; i < jobs.size(); ++i) checks[i] = jobs[i].get();
      return emit_checks(c, out, std::move(checks));
    }

    auto candidate = [&](const std::string& fallback) -> Subbundle {
      if (!distribution.empty()) return def.distribution(distribution);
      if (fallback == "candidate" && !def.spec.candidates.distributions.empty()) {
        return def.distribution(def.spec.candidates.distributions.front().name);
      }
      return def.controls;
    };

    if (reduction->parsed()) {
      return emit_checks(c, out, {kinematic_reduction_check(s, g, f, def.controls, candidate("candidate"), samples, c.tol)});
    }
    if (geoinv->parsed()) {
      CheckSettings gs = settings;
      if (geoinv->count("--step")) gs.step = step;
      if (geoinv->count("--horizon")) gs.horizon = horizon;
      return emit_checks(c, out, {geodesic_invariance_check(s, g, candidate("controls"), samples, gs)});
    }
    if (maxred->parsed()) {
      return emit_checks(c, out,
                         {maximal_reducibility_check(s, g, f, def.controls, candidate("candidate"), samples, settings)});
    }

    if (hj->parsed()) {
      std::vector<std::string> names;
      if (sections.empty()) {
        for (const auto& cs : def.spec.candidates.sections) names.push_back(cs.name);
      } else {
        for (const auto& name : sections) names.push_back(strip_prefix(name));
      }
      if (names.empty()) throw std::invalid_argument("no sections to test; pass --section");
      std::vector<VerificationReport> checks;
      const BasePoint p0 = read_point(x0, def, "--x0");
      for (const auto& name : names) {
        const Section& x = def.section(name);
        checks.push_back(unconstrained ? hj_check_unconstrained(s, g, def.potential, x, samples, c.tol)
                                       : hj_check(s, g, def.potential, def.controls, x, samples, c.tol));
        if (trajectory) {
          checks.push_back(hj_trajectory_equivalence(s, g, def.potential, def.controls, x, p0, horizon, step,
                                                     traj_tol, 1e-5, settings.chart));
        }
      }
      return emit_checks(c, out, std::move(checks));
    }

    if (reparam->parsed()) {
      std::vector<std::string> names = functions;
      if (names.empty()) {
        for (const auto& fn : def.spec.candidates.functions) names.push_back(fn.name);
      }
      if (names.empty()) throw std::invalid_argument("no functions to test; pass --function");
      std::vector<VerificationReport> checks;
      for (const auto& name : names) {
        auto r = reparam_admissible(s, g, def.controls, def.function(name), samples, c.tol);
        r.subject = name;
        checks.push_back(std::move(r));
      }
      return emit_checks(c, out, std::move(checks));
    }

    if (closure->parsed() || report_cmd->parsed()) {
      BatteryOptions opts;
      opts.settings = settings;
      opts.samples = c.samples;
      opts.at = read_point(at, def, "--at");
      opts.depth = depth;
      Report r;
      if (closure->parsed()) {
        r.system = def.spec.name;
        r.seed = c.seed;
        r.closures = closure_entries(def, *opts.at, depth);
      } else {
        r = run_battery(def, opts);
      }
      Output o(c, out);
      if (c.format == "json") {
        o.stream() << nlohmann::json(r).dump(2) << "\n";
      } else if (c.format == "csv") {
        write_checks_csv(o.stream(), r.checks);
      } else {
        o.stream() << summary_text(r);
      }
      o.flush();
      return r.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    // Load errors, malformed options and unknown names alike.
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("skalg");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace skalg::app
