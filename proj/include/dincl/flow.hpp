#pragma once

// One-step validated flow of the approximate system
//   y' = f(y) + sum_i g_i(y) w_i(a, t)
// by an a-priori bounding box and Picard iteration on polynomial models.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "dincl/inputs.hpp"
#include "dincl/polymodel.hpp"
#include "dincl/system.hpp"

namespace dincl {

// A step could not be certified; usually fixed by a smaller step size.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepGeometry {
  double t0 = 0.0;
  double h = 0.0;
  double mid() const { return t0 + h / 2; }
  double end() const { return t0 + h; }
};

struct FlowSettings {
  // 0: at least max_degree + 2 iterations, continued while the largest
  // remainder still drops by more than 1%, up to max_picard_iterations.
  int picard_iterations = 0;
  int max_picard_iterations = 60;
  int max_inflations = 20;
  double inflation = 1.2;
};

// Input magnitudes that cover both the true disturbance (|v_i| <= V_i) and
// the scheme's surrogate w_i.
inline std::vector<Interval> input_ranges(const InputAffineSystem& sys, SchemeKind scheme) {
  std::vector<Interval> r;
  for (const auto& in : sys.inputs()) r.push_back(Interval::ball(std::max(in.bound, w_bound(scheme, in.bound))));
  return r;
}

// Enclosure of f(B) + sum_i g_i(B) U_i.
inline Box rhs_enclosure(const InputAffineSystem& sys, const Box& b, const std::vector<Interval>& inputs) {
  Box r(sys.dimension());
  for (std::size_t c = 0; c < sys.dimension(); ++c) {
    Interval s = eval_interval(sys.drift()[c], b);
    for (std::size_t i = 0; i < sys.input_count(); ++i) s = s + eval_interval(sys.input(i).field[c], b) * inputs[i];
    r[c] = s;
  }
  return r;
}

// Box containing every solution of the inclusion and of the approximate
// system from X over [t0, t0 + h].
inline Box apriori_bound(const InputAffineSystem& sys, const Box& x, SchemeKind scheme, const StepGeometry& g,
                         const FlowSettings& settings = {}) {
  if (!(g.h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (x.dimension() != sys.dimension()) throw DomainError("initial box has wrong dimension");
  const auto inputs = input_ranges(sys, scheme);
  const Interval span(0.0, g.h);

  Box f0 = rhs_enclosure(sys, x, inputs);
  Box b(sys.dimension());
  for (std::size_t c = 0; c < sys.dimension(); ++c) {
    double w = rounding::mul_up(2.0 * g.h, f0[c].mag());
    b[c] = Interval(rounding::sub_down(x[c].lower(), w), rounding::add_up(x[c].upper(), w));
  }
  for (int attempt = 0; attempt <= settings.max_inflations; ++attempt) {
    Box f = rhs_enclosure(sys, b, inputs);
    Box y(sys.dimension());
    for (std::size_t c = 0; c < sys.dimension(); ++c) y[c] = x[c] + span * f[c];
    if (y.subset_of(b)) return y;
    b = hull(b, y);
    for (std::size_t c = 0; c < sys.dimension(); ++c) {
      double m = b[c].mid();
      double r = rounding::mul_up(settings.inflation, b[c].rad());
      b[c] = Interval(rounding::sub_down(m, r), rounding::add_up(m, r));
    }
    if (!b.is_finite()) break;
  }
  throw CertificationError("could not certify an a-priori bound at t=" + std::to_string(g.t0) + " with h=" +
                           std::to_string(g.h) + "; try a smaller step size");
}

namespace detail {

// Picard iteration over one (sub)step for a given surrogate input.
inline VectorModel picard_substep(const InputAffineSystem& sys, const VectorModel& x0, const StepGeometry& g,
                                  const Box& b, const FlowSettings& settings,
                                  const std::function<PolynomialModel(std::size_t input, const DomainPtr&,
                                                                      std::size_t time)>& realize) {
  const std::size_t n = sys.dimension();
  const DomainPtr& base = x0.front().domain();
  const ModelSettings ms = x0.front().settings();
  Domain d = *base;
  d.push_back(Variable{VarRole::Time, g.mid(), g.h / 2, 0, 0});
  const std::size_t tau = d.size() - 1;
  DomainPtr dom = make_domain(std::move(d));

  VectorModel x;
  for (const auto& m : x0) x.push_back(m.extend(dom));
  std::vector<PolynomialModel> w;
  for (std::size_t i = 0; i < sys.input_count(); ++i) w.push_back(realize(i, dom, tau));

  VectorModel y;
  for (std::size_t c = 0; c < n; ++c) y.push_back(PolynomialModel::constant(dom, b[c], ms));
  const bool adaptive = settings.picard_iterations <= 0;
  const int iterations = adaptive ? ms.max_degree + 2 : settings.picard_iterations;
  auto largest_error = [&] {
    double e = 0.0;
    for (const auto& m : y) e = std::max(e, m.error());
    return e;
  };
  double previous = rounding::kInf;
  for (int it = 0;; ++it) {
    if (it >= iterations) {
      if (!adaptive || it >= settings.max_picard_iterations) break;
      double e = largest_error();
      if (!(e < 0.99 * previous)) break;
      previous = e;
    }
    VectorModel next;
    for (std::size_t c = 0; c < n; ++c) {
      PolynomialModel rhs = compose(sys.drift()[c], y);
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].terms().empty() && w[i].error() == 0.0) continue;
        rhs = rhs + compose(sys.input(i).field[c], y) * w[i];
      }
      next.push_back(x[c] + rhs.antiderivative(tau));
    }
    y = std::move(next);
  }

  for (std::size_t c = 0; c < n; ++c) {
    const double start = b[c].rad();
    if (start > 0.0 && y[c].error() >= start)
      throw CertificationError("Picard iteration did not contract at t=" + std::to_string(g.t0) + " with h=" +
                               std::to_string(g.h) + "; try a smaller step size");
  }

  std::vector<int> mapping(dom->size());
  for (std::size_t v = 0; v < mapping.size(); ++v) mapping[v] = v == tau ? -1 : static_cast<int>(v);
  VectorModel out;
  for (const auto& m : y) out.push_back(m.substitute(tau, 1.0).reindex(base, mapping));
  return out;
}

}  // namespace detail

// Flow of the approximate system over the full step. `params[i]` lists the
// domain indices of input i's normalized parameters for this step; `b` must
// be an a-priori bound for the step.
inline VectorModel picard_flow(const InputAffineSystem& sys, const VectorModel& x0, SchemeKind scheme,
                               const std::vector<std::vector<std::size_t>>& params, const StepGeometry& g,
                               const Box& b, const FlowSettings& settings = {}) {
  if (x0.size() != sys.dimension()) throw DomainError("initial model has wrong dimension");
  if (params.size() != sys.input_count() && scheme != SchemeKind::Zero)
    throw std::invalid_argument("need parameter indices for every input");
  auto realize_half = [&](int half) {
    return [&, half](std::size_t i, const DomainPtr& dom, std::size_t time) {
      if (scheme == SchemeKind::Zero) return PolynomialModel::constant(dom, Interval(0.0), x0.front().settings());
      return realize_w(scheme, sys.input(i).bound, params[i], time, dom, x0.front().settings(), half);
    };
  };
  if (scheme != SchemeKind::Step) return detail::picard_substep(sys, x0, g, b, settings, realize_half(0));
  // Two half-steps with constant levels; b covers the whole step.
  StepGeometry first{g.t0, g.h / 2}, second{g.t0 + g.h / 2, g.h / 2};
  VectorModel mid = detail::picard_substep(sys, x0, first, b, settings, realize_half(0));
  return detail::picard_substep(sys, mid, second, b, settings, realize_half(1));
}

}  // namespace dincl
