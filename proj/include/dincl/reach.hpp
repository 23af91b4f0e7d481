#pragma once

// Evolution of reach sets R_k = { h_k(s) + [-e, e] } over a fixed time grid:
// flow of the approximate system, analytic error inflation, parameter
// budget management and domain splitting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dincl/flow.hpp"
#include "dincl/inputs.hpp"
#include "dincl/localerr.hpp"
#include "dincl/polymodel.hpp"
#include "dincl/system.hpp"

namespace dincl {

// A step's a-priori box left the fixed region the constants were computed on.
class RegionExceededError : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Which domain variable a split halves.
enum class SplitMode {
  State,     // the state variable of the given component
  Dominant,  // the variable with the largest coefficient mass in that component
};

struct SplitEvent {
  double time = 0.0;
  std::size_t axis = 0;  // state component, 0-based
  SplitMode mode = SplitMode::State;
};

struct EvolutionConfig {
  InputAffineSystem system;
  Box initial;
  double step = 0.0;
  int steps = 0;
  std::vector<double> grid{};  // explicit partition t_0 < ... < t_n; overrides step/steps
  SchemeKind scheme = SchemeKind::Affine;
  std::optional<Box> region{};  // fixed region for the constants; per-step bounds otherwise
  std::optional<int> forced_order{};
  std::size_t max_params = 0;  // 0: unlimited
  std::vector<SplitEvent> splits{};
  ModelSettings model{};
  FlowSettings flow{};
  HessianNorm hessian_norm = HessianNorm::MaxEntry;
  // Per-component errors above this are turned into fresh parameters after
  // each step so that later steps transform them exactly.
  double recondition_threshold = 1e-12;
  // Input and error parameters older than this many steps are swept first.
  int sweep_age = 3;

  std::vector<double> times() const {
    if (!grid.empty()) return grid;
    std::vector<double> t(static_cast<std::size_t>(std::max(steps, 0)) + 1);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * step;
    return t;
  }

  void validate() const {
    const std::size_t n = system.dimension();
    if (n == 0) throw std::invalid_argument("no system given");
    if (initial.dimension() != n) throw std::invalid_argument("initial box has wrong dimension");
    if (!initial.is_finite()) throw std::invalid_argument("initial box must be bounded");
    auto t = times();
    if (t.size() < 2) throw std::invalid_argument("time grid needs at least one step");
    for (std::size_t k = 1; k < t.size(); ++k)
      if (!(t[k] > t[k - 1])) throw std::invalid_argument("time grid must be strictly increasing");
    if (region) {
      if (region->dimension() != n) throw std::invalid_argument("region has wrong dimension");
      if (!initial.subset_of(*region)) throw std::invalid_argument("initial box must lie inside the region");
    }
    if (max_params != 0 && max_params < n)
      throw std::invalid_argument("parameter budget must be at least the state dimension");
    for (const auto& s : splits)
      if (s.axis >= n) throw std::invalid_argument("split axis outside the state dimension");
    if (forced_order && (*forced_order < 1 || *forced_order > 3))
      throw std::invalid_argument("error order must be 1, 2 or 3");
  }
};

struct ReachSet {
  double time = 0.0;
  VectorModel model;
};

inline Box final_box(const ReachSet& r) { return range_box(r.model); }

inline double diameter(const Box& b) {
  double d = 0.0;
  for (std::size_t c = 0; c < b.dimension(); ++c) d = std::max(d, b[c].width());
  return d;
}

inline double radius(const Box& b) { return diameter(b) / 2; }

struct StepDiagnostics {
  double t0 = 0.0, t1 = 0.0;
  double epsilon = 0.0;
  ErrorOrder order = ErrorOrder::O1_Zero;
  double numerical_error = 0.0;  // largest flow remainder before adding epsilon
  std::size_t parameters = 0;    // after reduction
  Box apriori;
  StepErrorBounds bounds;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<std::vector<ReachSet>> sets;                // [time index][branch]
  std::vector<std::vector<StepDiagnostics>> diagnostics;  // [step index][branch]

  const std::vector<ReachSet>& final_sets() const { return sets.back(); }
};

// ---------------------------------------------------------------------------

// The initial box as c + r z over one state variable per component.
inline VectorModel initial_set(const Box& x0, const ModelSettings& settings = {}) {
  Domain d;
  for (std::size_t c = 0; c < x0.dimension(); ++c)
    d.push_back(Variable{VarRole::State, x0[c].mid(), x0[c].rad(), 0, static_cast<int>(c)});
  auto dom = make_domain(std::move(d));
  VectorModel x;
  for (std::size_t c = 0; c < x0.dimension(); ++c) {
    double m = x0[c].mid(), r = x0[c].rad();
    std::vector<Term> terms;
    if (m != 0.0) terms.push_back({Monomial{}, m});
    if (r != 0.0) terms.push_back({Monomial::variable(c), r});
    x.push_back(PolynomialModel::from_terms(dom, std::move(terms), 0.0, settings));
  }
  return x;
}

namespace detail {

// Rebuilds the models over the domain without the variables in `drop`.
inline VectorModel compact(const VectorModel& x, const std::vector<bool>& drop) {
  const Domain& d = *x.front().domain();
  Domain kept;
  std::vector<int> mapping(d.size(), -1);
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (drop[v]) continue;
    mapping[v] = static_cast<int>(kept.size());
    kept.push_back(d[v]);
  }
  auto dom = make_domain(std::move(kept));
  VectorModel out;
  for (const auto& m : x) out.push_back(m.reindex(dom, mapping));
  return out;
}

// Sum over components of |coef| of the terms involving each variable.
inline std::vector<double> impacts(const VectorModel& x) {
  std::vector<double> s(x.front().arity(), 0.0);
  for (const auto& m : x)
    for (const auto& t : m.terms())
      for (auto v : t.mono.span()) s[v] = rounding::add_up(s[v], std::fabs(t.coef));
  return s;
}

}  // namespace detail

// Moves each component's error above `threshold` into a fresh parameter.
inline VectorModel recondition(const VectorModel& x, int step, double threshold) {
  Domain d = *x.front().domain();
  std::vector<std::size_t> fresh(x.size(), 0);
  bool any = false;
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (!(x[c].error() > threshold)) continue;
    fresh[c] = d.size();
    d.push_back(Variable{VarRole::Error, 0.0, 1.0, step, static_cast<int>(c)});
    any = true;
  }
  if (!any) return x;
  auto dom = make_domain(std::move(d));
  VectorModel out;
  for (std::size_t c = 0; c < x.size(); ++c) {
    PolynomialModel m = x[c].extend(dom);
    if (fresh[c] != 0) {
      double e = x[c].error();
      m = m.with_error(0.0) + PolynomialModel::from_terms(dom, {{Monomial::variable(fresh[c]), e}}, 0.0, m.settings());
    }
    out.push_back(std::move(m));
  }
  return out;
}

// Sweeps parameters into the error until at most `budget` variables remain
// (0: no limit). State variables are kept. Input and error parameters older
// than `age` steps go first, each group in order of increasing impact.
// Variables no term uses any more are dropped regardless of the budget.
inline VectorModel reduce_parameters(const VectorModel& x, std::size_t budget, int current_step, int age = 3) {
  const Domain& d = *x.front().domain();
  const auto impact = detail::impacts(x);
  std::vector<bool> drop(d.size(), false);
  std::size_t live = 0;
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (d[v].role != VarRole::State && impact[v] == 0.0)
      drop[v] = true;
    else
      ++live;
  }
  std::vector<std::size_t> swept;
  if (budget != 0 && live > budget) {
    std::vector<std::size_t> cand;
    for (std::size_t v = 0; v < d.size(); ++v)
      if (!drop[v] && d[v].role != VarRole::State) cand.push_back(v);
    auto old = [&](std::size_t v) { return d[v].step < current_step - age; };
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      if (old(a) != old(b)) return old(a);
      return impact[a] < impact[b];
    });
    const std::size_t need = std::min(live - budget, cand.size());
    swept.assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(need));
    for (auto v : swept) drop[v] = true;
  }
  VectorModel y;
  for (const auto& m : x) y.push_back(swept.empty() ? m : m.sweep(swept));
  if (std::none_of(drop.begin(), drop.end(), [](bool b) { return b; })) return y;
  return detail::compact(y, drop);
}

// Halves the set along one domain variable; the children cover z_v in
// [-1, 0] and [0, 1] and are re-expressed on the unit interval. Domain
// metadata keeps the parent's scaling.
inline std::pair<VectorModel, VectorModel> split_variable(const VectorModel& x, std::size_t v) {
  if (v >= x.front().arity()) throw std::invalid_argument("split variable outside the domain");
  VectorModel lo, hi;
  for (const auto& m : x) {
    lo.push_back(m.affine_substitute(v, 0.5, -0.5));
    hi.push_back(m.affine_substitute(v, 0.5, 0.5));
  }
  return {std::move(lo), std::move(hi)};
}

// Variable a split event acts on.
inline std::size_t split_target(const VectorModel& x, std::size_t axis, SplitMode mode) {
  if (axis >= x.size()) throw std::invalid_argument("split axis outside the state dimension");
  if (mode == SplitMode::State) return axis;
  const PolynomialModel& m = x[axis];
  std::size_t best = axis;
  double mass = -1.0;
  for (std::size_t v = 0; v < m.arity(); ++v) {
    double d = m.dependence_on(v);
    if (d > mass) {
      mass = d;
      best = v;
    }
  }
  return best;
}

// Halves the set along the state variable of component `axis`.
inline std::pair<VectorModel, VectorModel> split(const VectorModel& x, std::size_t axis) {
  if (axis >= x.front().arity() || (*x.front().domain())[axis].role != VarRole::State)
    throw std::invalid_argument("split axis must be a state variable");
  return split_variable(x, axis);
}

// Derivative bounds for the error formulas. K' is taken as the sup of
// ||sum_i g_i v_i||_inf, the quantity the estimates need.
inline StepErrorBounds error_bounds(const InputAffineSystem& sys, const Box& b, HessianNorm norm) {
  StepErrorBounds r = compute_bounds(sys, b, norm);
  r.K_prime = r.K_prime_componentwise;
  return r;
}

struct StepResult {
  VectorModel model;
  StepDiagnostics diag;
};

// One step R_k -> R_{k+1}. `fixed` holds the constants when a region is set.
inline StepResult advance(const EvolutionConfig& cfg, const VectorModel& x, const StepGeometry& g, int k,
                          const std::optional<StepErrorBounds>& fixed = std::nullopt) {
  const auto& sys = cfg.system;
  StepDiagnostics diag;
  diag.t0 = g.t0;
  diag.t1 = g.end();

  Box xb = range_box(x);
  diag.apriori = apriori_bound(sys, xb, cfg.scheme, g, cfg.flow);
  if (cfg.region) {
    if (!diag.apriori.subset_of(*cfg.region))
      throw RegionExceededError("reach set left the region of computation at t=" + std::to_string(g.t0) +
                                "; choose a larger region");
    diag.bounds = fixed ? *fixed : error_bounds(sys, *cfg.region, cfg.hessian_norm);
  } else {
    diag.bounds = error_bounds(sys, diag.apriori, cfg.hessian_norm);
  }
  SelectedError sel = select_error(traits_of(sys), cfg.scheme, diag.bounds, g.h, cfg.forced_order);
  diag.epsilon = sel.epsilon;
  diag.order = sel.order;

  // Fresh input parameters for this step.
  Domain d = *x.front().domain();
  std::vector<std::vector<std::size_t>> params(sys.input_count());
  if (cfg.scheme != SchemeKind::Zero)
    for (std::size_t i = 0; i < sys.input_count(); ++i)
      for (int p = 0; p < params_per_input(cfg.scheme); ++p) {
        params[i].push_back(d.size());
        d.push_back(Variable{VarRole::Input, 0.0, 1.0, k, static_cast<int>(i)});
      }
  auto dom = make_domain(std::move(d));
  VectorModel x0;
  for (const auto& m : x) x0.push_back(m.extend(dom));

  VectorModel phi = picard_flow(sys, x0, cfg.scheme, params, g, diag.apriori, cfg.flow);
  for (auto& m : phi) {
    diag.numerical_error = std::max(diag.numerical_error, m.error());
    m = m.with_error(rounding::add_up(m.error(), sel.epsilon));
  }
  // Sweep first and recondition afterwards so that the swept mass enters the
  // next step as parameters rather than as a remainder, which Picard would
  // inflate by the Lipschitz constant. Room for the n fresh error
  // parameters is kept when the budget allows it.
  const std::size_t n = sys.dimension();
  const std::size_t budget = cfg.max_params;
  const std::size_t target = budget == 0 ? 0 : budget >= 2 * n ? budget - n : budget;
  phi = reduce_parameters(phi, target, k, cfg.sweep_age);
  std::size_t fresh = 0;
  for (const auto& m : phi) fresh += m.error() > cfg.recondition_threshold ? 1 : 0;
  if (budget == 0 || phi.front().arity() + fresh <= budget) phi = recondition(phi, k, cfg.recondition_threshold);
  diag.parameters = phi.front().arity();
  return {std::move(phi), std::move(diag)};
}

// Called after every step; returning true ends the evolution early.
using StopPredicate = std::function<bool(const EvolutionTrace&)>;

inline EvolutionTrace evolve(const EvolutionConfig& cfg, const StopPredicate& stop = {}) {
  cfg.validate();
  EvolutionTrace trace;
  trace.times = cfg.times();
  std::optional<StepErrorBounds> fixed;
  if (cfg.region) fixed = error_bounds(cfg.system, *cfg.region, cfg.hessian_norm);

  std::vector<VectorModel> branches{initial_set(cfg.initial, cfg.model)};
  trace.sets.push_back({ReachSet{trace.times[0], branches[0]}});
  std::vector<bool> split_done(cfg.splits.size(), false);
  for (std::size_t k = 0; k + 1 < trace.times.size(); ++k) {
    StepGeometry g{trace.times[k], trace.times[k + 1] - trace.times[k]};
    std::vector<StepDiagnostics> diags;
    for (auto& b : branches) {
      auto r = advance(cfg, b, g, static_cast<int>(k) + 1, fixed);
      b = std::move(r.model);
      diags.push_back(std::move(r.diag));
    }
    trace.diagnostics.push_back(std::move(diags));
    const double t = trace.times[k + 1];
    std::vector<ReachSet> at;
    for (const auto& b : branches) at.push_back({t, b});
    trace.sets.push_back(std::move(at));

    // Splits scheduled at the grid time closest to t.
    for (std::size_t s = 0; s < cfg.splits.size(); ++s) {
      if (split_done[s] || std::fabs(cfg.splits[s].time - t) > g.h / 2) continue;
      split_done[s] = true;
      std::vector<VectorModel> next;
      for (const auto& b : branches) {
        auto [lo, hi] = split_variable(b, split_target(b, cfg.splits[s].axis, cfg.splits[s].mode));
        next.push_back(std::move(lo));
        next.push_back(std::move(hi));
      }
      branches = std::move(next);
    }
    if (stop && stop(trace)) break;
  }
  trace.times.resize(trace.sets.size());
  return trace;
}

// ---------------------------------------------------------------------------

struct Crossing {
  Interval time;
  std::size_t first = 0, last = 0;  // grid indices t_a, t_b
  Box hull;       // union of the reach sets at t_a..t_b
  Box enclosure;  // union of the steps' a-priori boxes, covers times between grid points
};

// First crossing of x_i through 0 in the given direction (+1: from negative
// to positive), certified by signs of the reach sets at grid times.
inline Crossing poincare_crossing(const EvolutionTrace& trace, std::size_t i, int direction = 1) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +1 or -1");
  auto sign_of = [&](std::size_t k) {
    bool neg = true, pos = true;
    for (const auto& r : trace.sets[k]) {
      Interval c = r.model.at(i).range() * Interval(static_cast<double>(direction));
      neg = neg && c.upper() < 0.0;
      pos = pos && c.lower() > 0.0;
    }
    return neg ? -1 : pos ? 1 : 0;
  };
  std::optional<std::size_t> a;
  for (std::size_t k = 0; k < trace.sets.size(); ++k) {
    int s = sign_of(k);
    if (s < 0) a = k;
    if (s > 0 && a) {
      Crossing c;
      c.first = *a;
      c.last = k;
      c.time = Interval(trace.times[*a], trace.times[k]);
      std::optional<Box> hull, enc;
      for (std::size_t j = *a; j <= k; ++j)
        for (const auto& r : trace.sets[j]) {
          Box b = final_box(r);
          hull = hull ? dincl::hull(*hull, b) : b;
          enc = enc ? dincl::hull(*enc, b) : b;
        }
      for (std::size_t j = *a; j < k; ++j)
        for (const auto& dg : trace.diagnostics[j]) enc = dincl::hull(*enc, dg.apriori);
      c.hull = *hull;
      c.enclosure = *enc;
      return c;
    }
  }
  throw NoCrossingError("no sign change of x" + std::to_string(i + 1) + " found in the trace");
}

// ---------------------------------------------------------------------------
// Monte-Carlo containment check: non-validated RK4 trajectories driven by
// random piecewise-constant inputs on a grid `refine` times finer than the
// step grid, tested against the hull of each grid time's branch boxes.
// Each sample and input draws how many fine cells a value is held (1, one
// step, ten steps or the whole run) so that extreme drifts are exercised
// along with rapidly switching ones.

struct MonteCarloReport {
  int samples = 0;
  long checks = 0;
  long violations = 0;
  double worst_excess = 0.0;  // largest distance outside the boxes
  Box final_hull;             // hull of the sampled states at the last grid time
  // With a crossing query: first crossings seen and those outside the
  // crossing's time interval or enclosure.
  long crossings = 0;
  long crossing_violations = 0;
};

// First crossing of x_i through 0 to test sampled trajectories against.
struct CrossingQuery {
  std::size_t coordinate = 0;
  int direction = 1;
  Crossing crossing;
};

inline MonteCarloReport monte_carlo_check(const EvolutionConfig& cfg, const EvolutionTrace& trace, int samples,
                                          std::uint64_t seed, int refine = 10, int substeps = 4,
                                          double tolerance = 1e-10,
                                          const std::optional<CrossingQuery>& query = std::nullopt) {
  const auto& sys = cfg.system;
  const std::size_t n = sys.dimension(), m = sys.input_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<std::vector<Box>> boxes(trace.sets.size());
  for (std::size_t k = 0; k < trace.sets.size(); ++k)
    for (const auto& r : trace.sets[k]) boxes[k].push_back(final_box(r));

  MonteCarloReport rep;
  std::vector<double> x(n), v(m), k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto check = [&](std::size_t k) {
    double best = rounding::kInf;
    for (const auto& b : boxes[k]) {
      double out = 0.0;
      for (std::size_t c = 0; c < n; ++c)
        out = std::max({out, b[c].lower() - x[c], x[c] - b[c].upper()});
      best = std::min(best, out);
    }
    ++rep.checks;
    if (best > tolerance) {
      ++rep.violations;
      rep.worst_excess = std::max(rep.worst_excess, best);
    }
  };
  const long cells = static_cast<long>(trace.times.size() - 1) * refine;
  const long holds[] = {1, refine, 10L * refine, cells};
  std::vector<long> hold(m);
  for (int s = 0; s < samples; ++s) {
    ++rep.samples;
    for (auto& hl : hold) hl = std::max(1L, holds[rng() % 4]);
    const bool vertex = coin(rng);
    for (std::size_t c = 0; c < n; ++c) {
      double z = vertex ? (coin(rng) ? 1.0 : -1.0) : unit(rng);
      x[c] = std::clamp(cfg.initial[c].mid() + z * cfg.initial[c].rad(), cfg.initial[c].lower(),
                        cfg.initial[c].upper());
    }
    check(0);
    bool crossed = false;
    for (std::size_t k = 0; k + 1 < trace.times.size(); ++k) {
      const double h = (trace.times[k + 1] - trace.times[k]) / refine;
      for (int piece = 0; piece < refine; ++piece) {
        const long cell = static_cast<long>(k) * refine + piece;
        for (std::size_t i = 0; i < m; ++i) {
          if (cell % hold[i] != 0) continue;
          double z = coin(rng) ? (coin(rng) ? 1.0 : -1.0) : unit(rng);
          v[i] = z * sys.input(i).bound;
        }
        const double dt = h / substeps;
        for (int sub = 0; sub < substeps; ++sub) {
          const double before = query ? query->direction * x[query->coordinate] : 0.0;
          sys.rhs(x, v, k1);
          for (std::size_t c = 0; c < n; ++c) tmp[c] = x[c] + 0.5 * dt * k1[c];
          sys.rhs(tmp, v, k2);
          for (std::size_t c = 0; c < n; ++c) tmp[c] = x[c] + 0.5 * dt * k2[c];
          sys.rhs(tmp, v, k3);
          for (std::size_t c = 0; c < n; ++c) tmp[c] = x[c] + dt * k3[c];
          sys.rhs(tmp, v, k4);
          for (std::size_t c = 0; c < n; ++c) tmp[c] = x[c];
          for (std::size_t c = 0; c < n; ++c) x[c] += dt / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
          if (query && !crossed && before < 0.0 && query->direction * x[query->coordinate] >= 0.0) {
            // Linear interpolation inside the substep.
            crossed = true;
            ++rep.crossings;
            const double after = query->direction * x[query->coordinate];
            const double theta = before / (before - after);
            const double tc = trace.times[k] + piece * h + (sub + theta) * dt;
            bool ok = tc >= query->crossing.time.lower() - tolerance && tc <= query->crossing.time.upper() + tolerance;
            for (std::size_t c = 0; c < n; ++c) {
              const double p = tmp[c] + theta * (x[c] - tmp[c]);
              const auto& b = query->crossing.enclosure[c];
              ok = ok && p >= b.lower() - tolerance && p <= b.upper() + tolerance;
            }
            if (!ok) ++rep.crossing_violations;
          }
        }
      }
      check(k + 1);
    }
    Box point(n);
    for (std::size_t c = 0; c < n; ++c) point[c] = Interval(x[c]);
    rep.final_hull = s == 0 ? point : hull(rep.final_hull, point);
  }
  return rep;
}

}  // namespace dincl
