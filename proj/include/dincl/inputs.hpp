#pragma once

// Finitely parameterized input approximations w(a, t) over one time step.
//
// Parameters are always normalized to [-1,1]; the physical values are
//   Constant        a0 = V alpha0
//   Affine          a0 = V alpha0, a1 = 3V alpha1
//   AffineReduced   a0 = V alpha0, a1 = 3V (1 - alpha0^2) beta1
//   Step            c_half = 2V alpha_half   (one constant per half-step)
// and the affine family is w(t) = a0 + a1 (t - t_mid) / h.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dincl/polymodel.hpp"

namespace dincl {

enum class SchemeKind { Zero, Constant, Affine, AffineReduced, Step };

inline const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::Zero: return "zero";
    case SchemeKind::Constant: return "constant";
    case SchemeKind::Affine: return "affine";
    case SchemeKind::AffineReduced: return "affine-reduced";
    case SchemeKind::Step: return "step";
  }
  return "?";
}

inline SchemeKind parse_scheme(const std::string& name) {
  for (auto k : {SchemeKind::Zero, SchemeKind::Constant, SchemeKind::Affine, SchemeKind::AffineReduced,
                 SchemeKind::Step})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown input scheme '" + name +
                              "' (expected zero, constant, affine, affine-reduced or step)");
}

inline int params_per_input(SchemeKind k) {
  switch (k) {
    case SchemeKind::Zero: return 0;
    case SchemeKind::Constant: return 1;
    default: return 2;
  }
}

// Sup of |w| over the parameter domain and the step.
inline double w_bound(SchemeKind k, double v) {
  switch (k) {
    case SchemeKind::Zero: return 0.0;
    case SchemeKind::Constant: return v;
    case SchemeKind::Affine:
    case SchemeKind::AffineReduced: return rounding::mul_up(2.5, v);
    case SchemeKind::Step: return 2.0 * v;
  }
  return 0.0;
}

// w for one input channel as a model over (parameters, time). `params` are the
// domain indices of this channel's normalized parameters, `time` the index of
// the step's time variable (center t_mid, radius h/2). For the step scheme,
// `half` selects the sub-step (0 or 1); the model is then constant in time.
inline PolynomialModel realize_w(SchemeKind kind, double v, std::span<const std::size_t> params, std::size_t time,
                                 const DomainPtr& domain, const ModelSettings& settings, int half = 0) {
  if (params.size() != static_cast<std::size_t>(params_per_input(kind)))
    throw std::invalid_argument(std::string("scheme '") + to_string(kind) + "' needs " +
                                std::to_string(params_per_input(kind)) + " parameters per input");
  auto var = [&](std::size_t i) { return PolynomialModel::variable(domain, i, settings); };
  const Interval V(v);
  switch (kind) {
    case SchemeKind::Zero: return PolynomialModel::constant(domain, Interval(0.0), settings);
    case SchemeKind::Constant: return V * var(params[0]);
    case SchemeKind::Affine: {
      // (t - t_mid)/h = tau/2, so a1 (t - t_mid)/h = 1.5 V alpha1 tau.
      return V * var(params[0]) + (Interval(1.5) * V) * (var(params[1]) * var(time));
    }
    case SchemeKind::AffineReduced: {
      auto a0 = var(params[0]);
      auto envelope = PolynomialModel::constant(domain, Interval(1.0), settings) - a0 * a0;
      return V * a0 + (Interval(1.5) * V) * (envelope * var(params[1]) * var(time));
    }
    case SchemeKind::Step: {
      if (half != 0 && half != 1) throw std::invalid_argument("step scheme half must be 0 or 1");
      return Interval(2.0 * v) * var(params[half]);
    }
  }
  throw std::logic_error("unhandled scheme");
}

// An input signal on [0, h] relative to the step start.
struct PiecewiseConstant {
  std::vector<double> breaks;  // 0 = b0 < b1 < ... < bn = h
  std::vector<double> values;  // value on [b_j, b_{j+1}]
};

struct Moments {
  double mean = 0.0;   // (1/h) integral v
  double first = 0.0;  // integral v (t - t_mid)
  double first_half_mean = 0.0, second_half_mean = 0.0;
};

inline Moments moments(const PiecewiseConstant& v, double h) {
  if (v.breaks.size() != v.values.size() + 1) throw std::invalid_argument("piecewise input needs n+1 breaks");
  Moments m;
  const double mid = h / 2;
  double s0 = 0, s1 = 0, lo = 0, hi = 0;
  for (std::size_t j = 0; j < v.values.size(); ++j) {
    const double a = v.breaks[j], b = v.breaks[j + 1], c = v.values[j];
    s0 += c * (b - a);
    s1 += c * ((b - mid) * (b - mid) - (a - mid) * (a - mid)) / 2;
    lo += c * std::max(0.0, std::min(b, mid) - a);
    hi += c * std::max(0.0, b - std::max(a, mid));
  }
  m.mean = s0 / h;
  m.first = s1;
  m.first_half_mean = lo / mid;
  m.second_half_mean = hi / mid;
  return m;
}

// Moments of a general integrable signal by composite Gauss-Legendre quadrature.
inline Moments moments(const std::function<double(double)>& v, double h, int panels = 256) {
  static constexpr double x[] = {-0.906179845938664, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.906179845938664};
  static constexpr double w[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
  Moments m;
  const double mid = h / 2, width = h / panels;
  double s0 = 0, s1 = 0, lo = 0, hi = 0;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * width;
    for (int k = 0; k < 5; ++k) {
      const double t = c + 0.5 * width * x[k];
      const double f = v(t) * w[k] * 0.5 * width;
      s0 += f;
      s1 += f * (t - mid);
      (t < mid ? lo : hi) += f;
    }
  }
  m.mean = s0 / h;
  m.first = s1;
  m.first_half_mean = lo / mid;
  m.second_half_mean = hi / mid;
  return m;
}

struct MatchedParameters {
  std::vector<double> physical;    // a0, a1 (or the two step levels)
  std::vector<double> normalized;  // in [-1,1] when the signal respects |v| <= V
};

inline MatchedParameters match_parameters(SchemeKind kind, double v, const Moments& m, double h) {
  MatchedParameters r;
  const double a0 = m.mean;
  const double a1 = 12.0 * m.first / (h * h);
  switch (kind) {
    case SchemeKind::Zero: break;
    case SchemeKind::Constant:
      r.physical = {a0};
      r.normalized = {a0 / v};
      break;
    case SchemeKind::Affine:
      r.physical = {a0, a1};
      r.normalized = {a0 / v, a1 / (3 * v)};
      break;
    case SchemeKind::AffineReduced: {
      const double alpha = a0 / v;
      const double room = 3 * v * (1 - alpha * alpha);
      r.physical = {a0, a1};
      r.normalized = {alpha, room > 0 ? a1 / room : 0.0};
      break;
    }
    case SchemeKind::Step: {
      // Two levels with the same mean and first moment as v.
      const double shift = 4.0 * m.first / (h * h);
      r.physical = {a0 - shift, a0 + shift};
      r.normalized = {(a0 - shift) / (2 * v), (a0 + shift) / (2 * v)};
      break;
    }
  }
  return r;
}

// |a1| <= 3V(1 - (a0/V)^2): the moment pairs reachable by |v| <= V.
inline bool quadratic_envelope_check(double a0, double a1, double v) {
  const double r = a0 / v;
  return std::fabs(a1) <= 3 * v * (1 - r * r) + 1e-12;
}

}  // namespace dincl
