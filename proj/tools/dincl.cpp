// dincl: reachable sets of input-affine differential inclusions.
//
//   dincl run --builtin vdp --out out/vdp
//   dincl run scenarios/rossler.json --mc-check 200
//   dincl run --builtin harmonic --steps 100 --noise 0,0.1 --delta 0.01
//   dincl table pho-T3
//
// Exit status: 0 success, 2 invalid scenario or options, 3 certification failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dincl/dincl.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kInvalid = 2;
constexpr int kUncertified = 3;

struct RunOptions {
  std::string file, scenario, builtin, scheme, order, out, project, noise;
  std::vector<std::string> splits;
  std::optional<double> step, time, delta;
  std::optional<int> steps, degree;
  std::optional<std::size_t> max_params;
  int mc = 0;
  std::uint64_t seed = 1;
};

std::vector<double> numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dincl::ScenarioError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::size_t coordinate(double c, const char* what) {
  if (c < 1 || c != std::floor(c)) throw dincl::ScenarioError(std::string(what) + ": coordinates are 1-based integers");
  return static_cast<std::size_t>(c) - 1;
}

dincl::Scenario build(const RunOptions& o) {
  int sources = !o.file.empty() + !o.scenario.empty() + !o.builtin.empty();
  if (sources != 1) throw dincl::ScenarioError("give exactly one of a scenario file, --scenario or --builtin");
  if ((!o.noise.empty() || o.delta) && o.builtin != "harmonic")
    throw dincl::ScenarioError("--noise and --delta apply to --builtin harmonic only");

  dincl::Scenario s;
  if (o.builtin == "harmonic") {
    double a1 = 0.0, a2 = 0.1;
    if (!o.noise.empty()) {
      auto v = numbers(o.noise, "--noise");
      if (v.size() != 2) throw dincl::ScenarioError("--noise: expected A1,A2");
      a1 = v[0];
      a2 = v[1];
    }
    s = dincl::harmonic_scenario(a1, a2, o.delta.value_or(0.01), o.steps.value_or(100));
  } else if (!o.builtin.empty()) {
    s = dincl::builtin_scenario(o.builtin);
  } else {
    s = dincl::load_scenario(o.file.empty() ? o.scenario : o.file);
  }

  // Grid overrides keep the other quantity: --time keeps h, --step and
  // --steps keep the duration.
  auto& cfg = s.config;
  if ((o.step || o.time || o.steps) && !cfg.grid.empty())
    throw dincl::ScenarioError("--step, --time and --steps need a uniform grid");
  double duration = cfg.step * cfg.steps;
  if (o.time) {
    if (!(*o.time > 0)) throw dincl::ScenarioError("--time: must be positive");
    duration = *o.time;
    cfg.steps = static_cast<int>(std::lround(duration / cfg.step));
  }
  if (o.step) {
    if (!(*o.step > 0)) throw dincl::ScenarioError("--step: must be positive");
    cfg.step = *o.step;
    cfg.steps = static_cast<int>(std::lround(duration / cfg.step));
  }
  if (o.steps && o.builtin != "harmonic") {
    if (*o.steps < 1) throw dincl::ScenarioError("--steps: must be positive");
    cfg.steps = *o.steps;
    cfg.step = duration / cfg.steps;
  }
  if (cfg.grid.empty() && (cfg.steps < 1 || std::fabs(cfg.steps * cfg.step - duration) > 1e-9 * duration))
    throw dincl::ScenarioError("the duration is not a whole number of steps");

  if (!o.scheme.empty()) {
    try {
      cfg.scheme = dincl::parse_scheme(o.scheme);
    } catch (const std::invalid_argument& e) {
      throw dincl::ScenarioError(std::string("--scheme: ") + e.what());
    }
  }
  if (!o.order.empty()) cfg.forced_order = dincl::detail::order_policy(
                            o.order == "auto" ? dincl::json("auto") : dincl::json(std::atoi(o.order.c_str())), "--order");
  if (o.max_params) cfg.max_params = *o.max_params;
  if (o.degree) cfg.model.max_degree = *o.degree;
  if (!o.splits.empty()) {
    cfg.splits.clear();
    for (const auto& text : o.splits) {
      // t:axis or t:axis:dominant
      auto first = text.find(':');
      if (first == std::string::npos) throw dincl::ScenarioError("--split: expected t:axis, got '" + text + "'");
      auto second = text.find(':', first + 1);
      std::string mode = second == std::string::npos ? "state" : text.substr(second + 1);
      auto t = numbers(text.substr(0, first), "--split");
      auto a = numbers(text.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1),
                       "--split");
      if (t.size() != 1 || a.size() != 1) throw dincl::ScenarioError("--split: expected t:axis, got '" + text + "'");
      if (mode != "state" && mode != "dominant") throw dincl::ScenarioError("--split: mode must be state or dominant");
      cfg.splits.push_back({t[0], coordinate(a[0], "--split"),
                            mode == "state" ? dincl::SplitMode::State : dincl::SplitMode::Dominant});
    }
  }
  if (!o.project.empty()) {
    auto p = numbers(o.project, "--project");
    if (p.size() != 2) throw dincl::ScenarioError("--project: expected i,j");
    s.project = std::pair{coordinate(p[0], "--project"), coordinate(p[1], "--project")};
  }
  if (o.mc < 0) throw dincl::ScenarioError("--mc-check: must be nonnegative");
  if (o.mc > 0) s.mc_samples = o.mc;
  s.mc_seed = o.seed;
  s.validate();
  return s;
}

void summary(std::ostream& os, const dincl::Scenario& s, const dincl::RunResult& r) {
  const auto& tr = r.trace;
  char line[512];
  std::snprintf(line, sizeof line, "%s: %zu steps to t=%g, %zu branch(es), %.2f s\n", s.name.c_str(),
                tr.diagnostics.size(), tr.times.back(), tr.final_sets().size(), r.seconds);
  os << line;
  if (!tr.diagnostics.empty()) {
    const auto& d = tr.diagnostics.front().front();
    std::snprintf(line, sizeof line, "epsilon per step %.10g (%s)\n", d.epsilon, dincl::to_string(d.order));
    os << line;
  }
  for (std::size_t b = 0; b < tr.final_sets().size(); ++b) {
    auto box = dincl::final_box(tr.final_sets()[b]);
    os << "branch " << b << ":";
    for (std::size_t c = 0; c < box.dimension(); ++c) {
      std::snprintf(line, sizeof line, " [%.6g, %.6g]", box[c].lower(), box[c].upper());
      os << line;
    }
    std::snprintf(line, sizeof line, "  diameter %.7g\n", dincl::diameter(box));
    os << line;
  }
  if (r.crossing) {
    os << "crossing T = [" << r.crossing->time.lower() << ", " << r.crossing->time.upper() << "], hull";
    for (std::size_t c = 0; c < r.crossing->hull.dimension(); ++c) {
      std::snprintf(line, sizeof line, " [%.6g, %.6g]", r.crossing->hull[c].lower(), r.crossing->hull[c].upper());
      os << line;
    }
    os << "\n";
  } else if (s.poincare) {
    os << "no crossing certified\n";
  }
  if (r.monte_carlo) {
    const auto& m = *r.monte_carlo;
    os << "monte-carlo: " << m.samples << " samples, " << m.checks << " checks, " << m.violations << " violations";
    if (s.poincare) os << ", " << m.crossings << " crossings, " << m.crossing_violations << " outside";
    os << "\n";
  }
}

int run(const RunOptions& o) {
  dincl::Scenario s = build(o);
  dincl::RunResult r = dincl::run_scenario(s);
  dincl::json doc = dincl::results_document(s, r);
  if (o.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    fs::path dir(o.out);
    fs::create_directories(dir);
    dincl::write_text(dir / "results.json", doc.dump(2) + "\n");
    dincl::json timing = {{"wall_seconds", r.seconds}, {"steps", r.trace.diagnostics.size()}};
    dincl::write_text(dir / "timing.json", timing.dump(2) + "\n");
    if (s.project) dincl::write_polygons(dir / "polygons", r.trace, s.project->first, s.project->second);
    summary(std::cout, s, r);
    std::cout << "wrote " << (dir / "results.json").string() << "\n";
  }
  if (r.monte_carlo && (r.monte_carlo->violations > 0 || r.monte_carlo->crossing_violations > 0)) {
    std::cerr << "warning: Monte-Carlo samples outside the enclosure\n";
    return 1;
  }
  return 0;
}

int table(const std::string& id, const std::string& out) {
  auto t = dincl::make_table(id);
  std::cout << t.text;
  if (!out.empty()) {
    fs::create_directories(out);
    dincl::write_text(fs::path(out) / (id + ".json"), t.document.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachable sets of input-affine differential inclusions"};
  app.require_subcommand(1);

  RunOptions o;
  auto* run_cmd = app.add_subcommand("run", "evolve a scenario and write the results document");
  run_cmd->add_option("file", o.file, "scenario JSON file");
  run_cmd->add_option("--scenario", o.scenario, "scenario JSON file");
  run_cmd->add_option("--builtin", o.builtin, "harmonic, vdp or rossler");
  run_cmd->add_option("--step", o.step, "step size h (keeps the duration)");
  run_cmd->add_option("--time", o.time, "final time T (keeps h)");
  run_cmd->add_option("--steps", o.steps, "number of steps (keeps the duration)");
  run_cmd->add_option("--scheme", o.scheme, "zero, constant, affine, affine-reduced or step");
  run_cmd->add_option("--order", o.order, "auto, 1, 2 or 3");
  run_cmd->add_option("--split", o.splits, "split at time t along axis: t:axis[:dominant], repeatable");
  run_cmd->add_option("--max-params", o.max_params, "parameter budget (0: unlimited)");
  run_cmd->add_option("--degree", o.degree, "maximal polynomial degree");
  run_cmd->add_option("--out", o.out, "output directory (default: results on stdout)");
  run_cmd->add_option("--project", o.project, "coordinates i,j of the CSV polygons");
  run_cmd->add_option("--mc-check", o.mc, "Monte-Carlo samples checked against the enclosures");
  run_cmd->add_option("--seed", o.seed, "Monte-Carlo seed");
  run_cmd->add_option("--noise", o.noise, "harmonic: input bounds A1,A2");
  run_cmd->add_option("--delta", o.delta, "harmonic: initial box half-width");

  std::string table_id, table_out;
  auto* table_cmd = app.add_subcommand("table", "reproduce a published table");
  table_cmd->add_option("id", table_id, "pho-T2, pho-T3 or param-T1")->required();
  table_cmd->add_option("--out", table_out, "directory for the JSON document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*run_cmd) return run(o);
    return table(table_id, table_out);
  } catch (const dincl::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const dincl::InapplicableError& e) {
    std::cerr << "error: " << e.what() << "\nhint: use --order auto or a richer --scheme\n";
    return kInvalid;
  } catch (const dincl::RegionExceededError& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return kUncertified;
  } catch (const dincl::CertificationError& e) {
    std::cerr << "certification failed: " << e.what() << "\nhint: retry with a smaller --step\n";
    return kUncertified;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}
