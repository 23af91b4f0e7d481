#pragma once

// Scenario files, the built-in benchmark systems and the results document.
//
// A scenario is a JSON object:
//   {
//     "name": "vdp",
//     "system": {"drift": ["x2", "-x1 + 2*(1 - x1^2)*x2"],
//                "inputs": [{"field": ["0", "1"], "bound": 0.08}]},
//     "initial": [[0.1, 0.105], [1.5, 1.505]],
//     "time": 1.5, "step": 0.001,          (or "grid": [t0, t1, ...])
//     "scheme": "affine", "order": "auto", "region": [[0, 2], [-1, 3]],
//     "splits": [{"time": 0.6, "axis": 1}], "max_params": 20,
//     "model": {"max_degree": 3, "sweep_threshold": 1e-10},
//     "poincare": {"coordinate": 1, "direction": 1, "stop": true},
//     "project": [1, 2], "monte_carlo": {"samples": 200, "seed": 1}
//   }
// Coordinates and axes are 1-based, as in the expression grammar.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dincl/reach.hpp"

namespace dincl {

using json = nlohmann::json;

// Invalid scenario or option; the message names the offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PoincareQuery {
  std::size_t coordinate = 0;  // 0-based
  int direction = 1;
  bool stop = true;  // end the run once the crossing is certified
};

struct Scenario {
  std::string name;
  std::vector<std::string> drift;
  std::vector<std::vector<std::string>> input_fields;
  std::vector<double> input_bounds;
  EvolutionConfig config;
  std::optional<PoincareQuery> poincare;
  std::optional<std::pair<std::size_t, std::size_t>> project;  // 0-based
  int mc_samples = 0;
  std::uint64_t mc_seed = 1;

  // Rebuilds config.system from the expression texts.
  void build_system() {
    const std::size_t n = drift.size();
    auto parse_all = [n](const std::vector<std::string>& texts, const std::string& where) {
      std::vector<Expr> out;
      for (std::size_t c = 0; c < texts.size(); ++c) {
        try {
          out.push_back(parse(texts[c], n));
        } catch (const ParseError& e) {
          throw ScenarioError(where + "[" + std::to_string(c) + "]: " + e.what());
        }
      }
      return out;
    };
    std::vector<InputChannel> in;
    for (std::size_t i = 0; i < input_fields.size(); ++i)
      in.push_back({parse_all(input_fields[i], "system.inputs[" + std::to_string(i) + "].field"), input_bounds[i]});
    try {
      config.system = InputAffineSystem(parse_all(drift, "system.drift"), std::move(in));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("system: ") + e.what());
    }
  }

  double duration() const {
    auto t = config.times();
    return t.back() - t.front();
  }

  void validate() const {
    try {
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what());
    }
    const std::size_t n = config.system.dimension();
    if (poincare && poincare->coordinate >= n) throw ScenarioError("poincare.coordinate outside the state dimension");
    if (project && (project->first >= n || project->second >= n))
      throw ScenarioError("project: coordinate outside the state dimension");
    if (mc_samples < 0) throw ScenarioError("monte_carlo.samples must be nonnegative");
  }
};

// ---------------------------------------------------------------------------
// JSON input

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ScenarioError(where + ": unknown field '" + key + "'");
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where + ": expected a number");
  double x = j.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(where + ": must be finite");
  return x;
}

inline long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ScenarioError(where + ": expected an integer");
  return j.get<long>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ScenarioError(where + ": expected a string");
  return j.get<std::string>();
}

inline std::vector<std::string> texts(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ScenarioError(where + ": expected a nonempty array of expressions");
  std::vector<std::string> out;
  for (std::size_t c = 0; c < j.size(); ++c) out.push_back(text(j[c], where + "[" + std::to_string(c) + "]"));
  return out;
}

inline Box box(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ScenarioError(where + ": expected an array of [lo, hi] pairs");
  Box b(j.size());
  for (std::size_t c = 0; c < j.size(); ++c) {
    const std::string w = where + "[" + std::to_string(c) + "]";
    if (j[c].is_number()) {
      b[c] = Interval(number(j[c], w));
      continue;
    }
    if (!j[c].is_array() || j[c].size() != 2) throw ScenarioError(w + ": expected [lo, hi]");
    double lo = number(j[c][0], w), hi = number(j[c][1], w);
    if (!(lo <= hi)) throw ScenarioError(w + ": lower end exceeds upper end");
    b[c] = Interval(lo, hi);
  }
  return b;
}

inline std::size_t coordinate(const json& j, const std::string& where) {
  long c = integer(j, where);
  if (c < 1) throw ScenarioError(where + ": coordinates are 1-based");
  return static_cast<std::size_t>(c - 1);
}

inline std::optional<int> order_policy(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
  long o = j.is_string() ? -1 : integer(j, where);
  if (o < 1 || o > 3) throw ScenarioError(where + ": expected \"auto\", 1, 2 or 3");
  return static_cast<int>(o);
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  using namespace detail;
  check_keys(j, "scenario",
             {"name", "system", "initial", "time", "step", "steps", "grid", "scheme", "order", "region", "splits",
              "max_params", "model", "poincare", "project", "monte_carlo", "hessian_norm"});
  Scenario s;
  s.name = j.contains("name") ? text(j["name"], "name") : "scenario";

  if (!j.contains("system")) throw ScenarioError("system: missing");
  const json& sys = j["system"];
  check_keys(sys, "system", {"drift", "inputs"});
  if (!sys.contains("drift")) throw ScenarioError("system.drift: missing");
  s.drift = texts(sys["drift"], "system.drift");
  if (sys.contains("inputs")) {
    if (!sys["inputs"].is_array()) throw ScenarioError("system.inputs: expected an array");
    for (std::size_t i = 0; i < sys["inputs"].size(); ++i) {
      const json& in = sys["inputs"][i];
      const std::string w = "system.inputs[" + std::to_string(i) + "]";
      check_keys(in, w, {"field", "bound"});
      if (!in.contains("field") || !in.contains("bound")) throw ScenarioError(w + ": needs field and bound");
      s.input_fields.push_back(texts(in["field"], w + ".field"));
      s.input_bounds.push_back(number(in["bound"], w + ".bound"));
    }
  }
  s.build_system();

  if (!j.contains("initial")) throw ScenarioError("initial: missing");
  s.config.initial = box(j["initial"], "initial");

  auto& cfg = s.config;
  if (j.contains("grid")) {
    if (j.contains("time") || j.contains("step") || j.contains("steps"))
      throw ScenarioError("grid: cannot be combined with time, step or steps");
    if (!j["grid"].is_array()) throw ScenarioError("grid: expected an array of times");
    for (std::size_t k = 0; k < j["grid"].size(); ++k)
      cfg.grid.push_back(number(j["grid"][k], "grid[" + std::to_string(k) + "]"));
  } else {
    int given = j.contains("time") + j.contains("step") + j.contains("steps");
    if (given != 2) throw ScenarioError("time grid: give exactly two of time, step and steps (or a grid)");
    double t = j.contains("time") ? number(j["time"], "time") : 0.0;
    if (j.contains("step")) cfg.step = number(j["step"], "step");
    if (j.contains("steps")) {
      long n = integer(j["steps"], "steps");
      if (n < 1) throw ScenarioError("steps: must be positive");
      cfg.steps = static_cast<int>(n);
    }
    if (j.contains("time")) {
      if (!(t > 0)) throw ScenarioError("time: must be positive");
      if (j.contains("step")) {
        if (!(cfg.step > 0)) throw ScenarioError("step: must be positive");
        cfg.steps = static_cast<int>(std::lround(t / cfg.step));
        if (cfg.steps < 1 || std::fabs(cfg.steps * cfg.step - t) > 1e-9 * t)
          throw ScenarioError("time: not a whole number of steps");
      } else {
        cfg.step = t / cfg.steps;
      }
    }
  }

  if (j.contains("scheme")) {
    try {
      cfg.scheme = parse_scheme(text(j["scheme"], "scheme"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(std::string("scheme: ") + e.what());
    }
  }
  if (j.contains("order")) cfg.forced_order = order_policy(j["order"], "order");
  if (j.contains("region")) cfg.region = box(j["region"], "region");
  if (j.contains("max_params")) {
    long b = integer(j["max_params"], "max_params");
    if (b < 0) throw ScenarioError("max_params: must be nonnegative");
    cfg.max_params = static_cast<std::size_t>(b);
  }
  if (j.contains("splits")) {
    if (!j["splits"].is_array()) throw ScenarioError("splits: expected an array");
    for (std::size_t k = 0; k < j["splits"].size(); ++k) {
      const json& sp = j["splits"][k];
      const std::string w = "splits[" + std::to_string(k) + "]";
      check_keys(sp, w, {"time", "axis", "mode"});
      if (!sp.contains("time") || !sp.contains("axis")) throw ScenarioError(w + ": needs time and axis");
      SplitEvent ev{number(sp["time"], w + ".time"), coordinate(sp["axis"], w + ".axis"), SplitMode::State};
      if (sp.contains("mode")) {
        std::string mode = text(sp["mode"], w + ".mode");
        if (mode == "dominant")
          ev.mode = SplitMode::Dominant;
        else if (mode != "state")
          throw ScenarioError(w + ".mode: expected \"state\" or \"dominant\"");
      }
      cfg.splits.push_back(ev);
    }
  }
  if (j.contains("model")) {
    check_keys(j["model"], "model", {"max_degree", "sweep_threshold", "recondition_threshold", "picard_iterations"});
    const json& m = j["model"];
    if (m.contains("max_degree")) {
      long d = integer(m["max_degree"], "model.max_degree");
      if (d < 1 || d > 20) throw ScenarioError("model.max_degree: expected 1..20");
      cfg.model.max_degree = static_cast<int>(d);
    }
    if (m.contains("sweep_threshold")) cfg.model.sweep_threshold = number(m["sweep_threshold"], "model.sweep_threshold");
    if (m.contains("recondition_threshold"))
      cfg.recondition_threshold = number(m["recondition_threshold"], "model.recondition_threshold");
    if (m.contains("picard_iterations")) {
      long it = integer(m["picard_iterations"], "model.picard_iterations");
      if (it < 0) throw ScenarioError("model.picard_iterations: must be nonnegative");
      cfg.flow.picard_iterations = static_cast<int>(it);
    }
  }
  if (j.contains("hessian_norm")) {
    std::string h = text(j["hessian_norm"], "hessian_norm");
    if (h == "max-entry")
      cfg.hessian_norm = HessianNorm::MaxEntry;
    else if (h == "max-row-sum")
      cfg.hessian_norm = HessianNorm::MaxRowSum;
    else if (h == "bilinear-sum")
      cfg.hessian_norm = HessianNorm::BilinearSum;
    else
      throw ScenarioError("hessian_norm: expected max-entry, max-row-sum or bilinear-sum");
  }
  if (j.contains("poincare")) {
    const json& p = j["poincare"];
    check_keys(p, "poincare", {"coordinate", "direction", "stop"});
    PoincareQuery q;
    if (p.contains("coordinate")) q.coordinate = coordinate(p["coordinate"], "poincare.coordinate");
    if (p.contains("direction")) {
      long d = integer(p["direction"], "poincare.direction");
      if (d != 1 && d != -1) throw ScenarioError("poincare.direction: expected 1 or -1");
      q.direction = static_cast<int>(d);
    }
    if (p.contains("stop")) {
      if (!p["stop"].is_boolean()) throw ScenarioError("poincare.stop: expected a boolean");
      q.stop = p["stop"].get<bool>();
    }
    s.poincare = q;
  }
  if (j.contains("project")) {
    const json& p = j["project"];
    if (!p.is_array() || p.size() != 2) throw ScenarioError("project: expected [i, j]");
    s.project = std::pair{coordinate(p[0], "project[0]"), coordinate(p[1], "project[1]")};
  }
  if (j.contains("monte_carlo")) {
    const json& m = j["monte_carlo"];
    check_keys(m, "monte_carlo", {"samples", "seed"});
    if (m.contains("samples")) s.mc_samples = static_cast<int>(integer(m["samples"], "monte_carlo.samples"));
    if (m.contains("seed")) s.mc_seed = static_cast<std::uint64_t>(integer(m["seed"], "monte_carlo.seed"));
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Built-in benchmarks

// x1' = x2 + A1 v1, x2' = -x1 + A2 v2 from the box (1, 0) + [-delta, delta]^2
// over one period. Inputs with a zero bound are left out.
inline Scenario harmonic_scenario(double a1 = 0.0, double a2 = 0.1, double delta = 0.01, int steps = 100) {
  if (a1 < 0 || a2 < 0 || delta < 0) throw ScenarioError("harmonic: noise and delta must be nonnegative");
  if (steps < 1) throw ScenarioError("harmonic: steps must be positive");
  Scenario s;
  s.name = "harmonic";
  s.drift = {"x2", "-x1"};
  if (a1 > 0) {
    s.input_fields.push_back({"1", "0"});
    s.input_bounds.push_back(a1);
  }
  if (a2 > 0) {
    s.input_fields.push_back({"0", "1"});
    s.input_bounds.push_back(a2);
  }
  s.build_system();
  s.config.initial = Box{Interval(1 - delta, 1 + delta), Interval(-delta, delta)};
  s.config.step = 2 * std::numbers::pi / steps;
  s.config.steps = steps;
  s.config.scheme = SchemeKind::Affine;
  s.project = std::pair{std::size_t{0}, std::size_t{1}};
  return s;
}

// Van der Pol with additive noise on the second component.
inline Scenario vdp_scenario() {
  Scenario s;
  s.name = "vdp";
  s.drift = {"x2", "-x1 + 2*(1 - x1^2)*x2"};
  s.input_fields = {{"0", "1"}};
  s.input_bounds = {0.08};
  s.build_system();
  auto& c = s.config;
  c.initial = Box{Interval(0.1, 0.105), Interval(1.5, 1.505)};
  c.step = 0.001;
  c.steps = 1500;
  c.scheme = SchemeKind::Affine;
  c.region = Box{Interval(0, 2), Interval(-1, 3)};
  c.max_params = 20;
  c.model.max_degree = 3;
  c.model.sweep_threshold = 1e-10;
  s.project = std::pair{std::size_t{0}, std::size_t{1}};
  return s;
}

// Rossler (a = 5.7) with noise 1e-4 on every component, run until the first
// upward crossing of x1 = 0. The initial set is {0} x (-10.3 +- 1e-4) x
// (0.03 +- 1e-4).
inline Scenario rossler_scenario() {
  Scenario s;
  s.name = "rossler";
  s.drift = {"-(x2 + x3)", "x1 + 0.2*x2", "0.2 + x3*(x1 - 5.7)"};
  s.input_fields = {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}};
  s.input_bounds = {1e-4, 1e-4, 1e-4};
  s.build_system();
  auto& c = s.config;
  c.initial = Box{Interval(0.0), Interval(-10.3 - 1e-4, -10.3 + 1e-4), Interval(0.03 - 1e-4, 0.03 + 1e-4)};
  c.step = 0.005;
  c.steps = 2220;
  c.scheme = SchemeKind::Affine;
  c.region = Box{Interval(-25, 25), Interval(-25, 25), Interval(-25, 35)};
  c.max_params = 80;
  c.model.max_degree = 3;
  c.model.sweep_threshold = 1e-10;
  s.poincare = PoincareQuery{0, 1, true};
  s.project = std::pair{std::size_t{1}, std::size_t{2}};
  return s;
}

inline Scenario builtin_scenario(const std::string& name) {
  if (name == "harmonic") return harmonic_scenario();
  if (name == "vdp") return vdp_scenario();
  if (name == "rossler") return rossler_scenario();
  throw ScenarioError("unknown builtin '" + name + "' (expected harmonic, vdp or rossler)");
}

// ---------------------------------------------------------------------------
// Running

struct RunResult {
  EvolutionTrace trace;
  std::optional<Crossing> crossing;
  std::optional<MonteCarloReport> monte_carlo;
  double seconds = 0.0;
};

inline RunResult run_scenario(const Scenario& s) {
  s.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  StopPredicate stop;
  if (s.poincare && s.poincare->stop) {
    stop = [q = *s.poincare](const EvolutionTrace& t) {
      try {
        poincare_crossing(t, q.coordinate, q.direction);
        return true;
      } catch (const NoCrossingError&) {
        return false;
      }
    };
  }
  r.trace = evolve(s.config, stop);
  if (s.poincare) {
    try {
      r.crossing = poincare_crossing(r.trace, s.poincare->coordinate, s.poincare->direction);
    } catch (const NoCrossingError&) {
    }
  }
  if (s.mc_samples > 0) {
    std::optional<CrossingQuery> q;
    if (r.crossing) q = CrossingQuery{s.poincare->coordinate, s.poincare->direction, *r.crossing};
    r.monte_carlo = monte_carlo_check(s.config, r.trace, s.mc_samples, s.mc_seed, 10, 4, 1e-10, q);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------
// Output

inline json to_json(const Interval& x) { return json::array({x.lower(), x.upper()}); }

inline json to_json(const Box& b) {
  json a = json::array();
  for (std::size_t c = 0; c < b.dimension(); ++c) a.push_back(to_json(b[c]));
  return a;
}

inline json box_summary(const Box& b) {
  return {{"box", to_json(b)}, {"diameter", diameter(b)}, {"radius", radius(b)}};
}

inline json to_json(const StepErrorBounds& b) {
  return {{"K", b.K}, {"K_prime", b.K_prime}, {"L", b.L}, {"L_prime", b.L_prime},
          {"H", b.H}, {"H_prime", b.H_prime}, {"Lambda", b.Lambda}};
}

inline const char* hessian_norm_name(HessianNorm h) {
  switch (h) {
    case HessianNorm::MaxEntry: return "max-entry";
    case HessianNorm::MaxRowSum: return "max-row-sum";
    case HessianNorm::BilinearSum: return "bilinear-sum";
  }
  return "?";
}

// Everything except wall time, so equal inputs give equal bytes.
inline json results_document(const Scenario& s, const RunResult& r) {
  const auto& cfg = s.config;
  const auto& tr = r.trace;
  json scen = {{"name", s.name},
               {"dimension", cfg.system.dimension()},
               {"drift", s.drift},
               {"initial", to_json(cfg.initial)},
               {"t0", tr.times.front()},
               {"t_end", tr.times.back()},
               {"steps", tr.times.size() - 1},
               {"scheme", to_string(cfg.scheme)},
               {"order", cfg.forced_order ? json(*cfg.forced_order) : json("auto")},
               {"max_params", cfg.max_params},
               {"max_degree", cfg.model.max_degree},
               {"sweep_threshold", cfg.model.sweep_threshold},
               {"hessian_norm", hessian_norm_name(cfg.hessian_norm)},
               {"region", cfg.region ? to_json(*cfg.region) : json(nullptr)}};
  if (cfg.grid.empty()) scen["step"] = cfg.step;
  json inputs = json::array();
  for (std::size_t i = 0; i < s.input_fields.size(); ++i)
    inputs.push_back({{"field", s.input_fields[i]}, {"bound", s.input_bounds[i]}});
  scen["inputs"] = inputs;
  json splits = json::array();
  for (const auto& sp : cfg.splits)
    splits.push_back({{"time", sp.time},
                      {"axis", sp.axis + 1},
                      {"mode", sp.mode == SplitMode::State ? "state" : "dominant"}});
  scen["splits"] = splits;

  const std::size_t completed = tr.diagnostics.size();
  json doc = {{"format", "dincl-results/1"}, {"scenario", scen}, {"completed_steps", completed}};
  doc["constants"] = cfg.region ? to_json(error_bounds(cfg.system, *cfg.region, cfg.hessian_norm)) : json(nullptr);

  const auto& last = tr.sets.back();
  json branches = json::array();
  std::optional<Box> all;
  for (std::size_t b = 0; b < last.size(); ++b) {
    Box box = final_box(last[b]);
    all = all ? hull(*all, box) : box;
    json e = box_summary(box);
    e["branch"] = b;
    branches.push_back(e);
  }
  doc["final"] = {{"time", last.front().time}, {"branches", branches}, {"hull", box_summary(*all)}};

  double emax = 0.0, emin = rounding::kInf;
  json steps = json::array();
  for (std::size_t k = 0; k < completed; ++k) {
    json eps = json::array(), order = json::array(), params = json::array(), numerical = json::array();
    for (const auto& d : tr.diagnostics[k]) {
      eps.push_back(d.epsilon);
      order.push_back(to_string(d.order));
      params.push_back(d.parameters);
      numerical.push_back(d.numerical_error);
      emax = std::max(emax, d.epsilon);
      emin = std::min(emin, d.epsilon);
    }
    steps.push_back({{"k", k},
                     {"t0", tr.diagnostics[k].front().t0},
                     {"t1", tr.diagnostics[k].front().t1},
                     {"epsilon", eps},
                     {"order", order},
                     {"parameters", params},
                     {"numerical_error", numerical}});
  }
  doc["epsilon"] = {{"max", emax}, {"min", completed ? emin : 0.0}};
  doc["steps"] = steps;

  if (s.poincare) {
    json p = {{"coordinate", s.poincare->coordinate + 1}, {"direction", s.poincare->direction}};
    if (r.crossing) {
      p["found"] = true;
      p["time"] = to_json(r.crossing->time);
      p["hull"] = to_json(r.crossing->hull);
      p["enclosure"] = to_json(r.crossing->enclosure);
    } else {
      p["found"] = false;
    }
    doc["poincare"] = p;
  }
  if (r.monte_carlo) {
    const auto& m = *r.monte_carlo;
    json mc = {{"samples", m.samples},          {"seed", s.mc_seed},
               {"checks", m.checks},            {"violations", m.violations},
               {"worst_excess", m.worst_excess}, {"sample_final_hull", to_json(m.final_hull)}};
    if (s.poincare) {
      mc["crossings"] = m.crossings;
      mc["crossing_violations"] = m.crossing_violations;
    }
    doc["monte_carlo"] = mc;
  }
  return doc;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

// One closed rectangle per branch and grid time: the projection of the
// range box onto coordinates (i, j).
inline void write_polygons(const std::filesystem::path& dir, const EvolutionTrace& tr, std::size_t i, std::size_t j) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < tr.sets.size(); ++k)
    for (std::size_t b = 0; b < tr.sets[k].size(); ++b) {
      Box box = final_box(tr.sets[k][b]);
      const Interval &x = box[i], &y = box[j];
      std::ostringstream os;
      os.precision(17);
      os << "x,y\n";
      const double px[] = {x.lower(), x.upper(), x.upper(), x.lower(), x.lower()};
      const double py[] = {y.lower(), y.lower(), y.upper(), y.upper(), y.lower()};
      for (int c = 0; c < 5; ++c) os << px[c] << ',' << py[c] << '\n';
      write_text(dir / ("branch" + std::to_string(b) + "_t" + std::to_string(k) + ".csv"), os.str());
    }
}

}  // namespace dincl
