#pragma once

// Uniform single-step bounds on the distance at t_{k+1} between a solution
// driven by the true input v and one driven by the surrogate w.
// All functions return upper bounds (intervals are used for directed rounding).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dincl/inputs.hpp"
#include "dincl/system.hpp"

namespace dincl {

// A formula's preconditions do not hold for the given bounds and step.
class InapplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ErrorOrder { O1_Zero, O2_Constant, O2_ConstantC2, O2_Affine, O3_Additive, O3_SingleInput };

inline const char* to_string(ErrorOrder o) {
  switch (o) {
    case ErrorOrder::O1_Zero: return "O1_Zero";
    case ErrorOrder::O2_Constant: return "O2_Constant";
    case ErrorOrder::O2_ConstantC2: return "O2_ConstantC2";
    case ErrorOrder::O2_Affine: return "O2_Affine";
    case ErrorOrder::O3_Additive: return "O3_Additive";
    case ErrorOrder::O3_SingleInput: return "O3_SingleInput";
  }
  return "?";
}

// Nominal power of h.
inline int nominal_order(ErrorOrder o) {
  switch (o) {
    case ErrorOrder::O1_Zero: return 1;
    case ErrorOrder::O3_Additive:
    case ErrorOrder::O3_SingleInput: return 3;
    default: return 2;
  }
}

namespace detail {

// Enclosure of (e^u - 1)/u. The argument is a thin double.
inline Interval phi(double u) {
  if (std::fabs(u) < 1e-8) {
    // 1 + u/2 + u^2/6 + ...; the quadratic term is below 2e-17.
    double half = u / 2;
    double slack = std::max(u * u, std::numeric_limits<double>::min());
    return {rounding::sub_down(rounding::add_down(1.0, half), slack), rounding::add_up(rounding::add_up(1.0, half), slack)};
  }
  return expm1(Interval(u)) / Interval(u);
}

// Phi(Lambda h) rounded up; Phi is increasing so an upper bound of Lambda h suffices.
inline Interval phi_of(const StepErrorBounds& b, double h) { return Interval(phi(rounding::mul_up(b.Lambda, h)).upper()); }

inline Interval I(double x) { return Interval(x); }

inline double upper_nonneg(const Interval& x) { return std::max(0.0, x.upper()); }

// Divides by the prefactor (1 - h L/2 - h L'), which must be positive.
inline double divide_prefactor(const Interval& numerator, const Interval& prefactor, const char* name) {
  if (!(prefactor.lower() > 0.0))
    throw InapplicableError(std::string(name) + " requires a positive prefactor (step too large)");
  return upper_nonneg(numerator / prefactor);
}

}  // namespace detail

inline double err_o1(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), Kp(b.K_prime), K(b.K);
  Interval first = H * Kp * detail::phi_of(b, h);
  Interval second = H * (I(2) * K + Kp);
  return std::min(detail::upper_nonneg(first), detail::upper_nonneg(second));
}

inline double err_o2_constant(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), K(b.K), Kp(b.K_prime), L(b.L), Lp(b.L_prime);
  Interval r = H * H * ((K + Kp) * Lp / I(3) + I(2) * Kp * (L + Lp) * detail::phi_of(b, h));
  return detail::upper_nonneg(r);
}

inline double err_o2_constant_c2(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), K(b.K), Kp(b.K_prime), L(b.L), Lp(b.L_prime), Hs(b.H);
  const Interval phi = detail::phi_of(b, h), h2 = H * H, h3 = h2 * H;
  Interval num = h2 / I(3) * (I(3) * Kp * Lp * phi + Lp * (K + Kp));
  num = num + h3 / I(4) * Kp * (L * Lp + L * L + Hs * (K + Kp)) * phi;
  num = num + I(11) * h3 / I(24) * (Hs * Kp + L * Lp) * (K + Kp);
  return detail::divide_prefactor(num, I(1) - H * L / I(2), "O2_ConstantC2");
}

inline double err_o2_affine(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), K(b.K), Kp(b.K_prime), L(b.L), Lp(b.L_prime), Hs(b.H), Hp(b.H_prime);
  const Interval phi = detail::phi_of(b, h), h2 = H * H, h3 = h2 * H;
  Interval num = h2 / I(4) * Lp * (I(11) * K + I(34.5) * Kp);
  num = num + I(7) * h3 / I(8) * Kp *
                  ((I(4) * Hp + Hs) * (K + I(2.5) * Kp) + L * L + (I(4.5) * L + I(5) * Lp) * Lp) * phi;
  num = num + I(7) * h3 / I(48) * (Hs * Kp + L * Lp) * (K + Kp);
  return detail::divide_prefactor(num, I(1) - H * L / I(2) - H * Lp, "O2_Affine");
}

inline double err_o3_additive(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), K(b.K), Kp(b.K_prime), L(b.L), Hs(b.H);
  const Interval phi = detail::phi_of(b, h), h3 = H * H * H;
  Interval num = I(7) / I(48) * h3 * Kp * Hs * (K + Kp);
  num = num + I(7) / I(8) * h3 * Kp * (L * L + Hs * (K + I(2.5) * Kp)) * phi;
  return detail::divide_prefactor(num, I(1) - H * L / I(2), "O3_Additive");
}

// The (H K' + L L') coefficient is 7, matching the additive-noise bound when
// L' = H' = 0 (the printed 7/6 would break that identity).
inline double err_o3_single(const StepErrorBounds& b, double h) {
  using detail::I;
  const Interval H(h), K(b.K), Kp(b.K_prime), L(b.L), Lp(b.L_prime), Hs(b.H), Hp(b.H_prime);
  const Interval phi = detail::phi_of(b, h), h3 = H * H * H;
  Interval num = I(7) * h3 / I(8) * Kp *
                 ((Hs + I(10) * Hp) * (K + I(2.5) * Kp) + L * L + I(12.5) * L * Lp + I(25) * Lp * Lp) * phi;
  num = num + h3 / I(48) * (K + Kp) *
                  (I(7) * (Hs * Kp + L * Lp) + I(28) * (Hp * K + L * Lp) + I(29) * (Hp * Kp + Lp * Lp));
  return detail::divide_prefactor(num, I(1) - H * L / I(2) - H * Lp, "O3_SingleInput");
}

inline double evaluate_error(ErrorOrder o, const StepErrorBounds& b, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  switch (o) {
    case ErrorOrder::O1_Zero: return err_o1(b, h);
    case ErrorOrder::O2_Constant: return err_o2_constant(b, h);
    case ErrorOrder::O2_ConstantC2: return err_o2_constant_c2(b, h);
    case ErrorOrder::O2_Affine: return err_o2_affine(b, h);
    case ErrorOrder::O3_Additive: return err_o3_additive(b, h);
    case ErrorOrder::O3_SingleInput: return err_o3_single(b, h);
  }
  throw std::logic_error("unhandled error order");
}

struct SystemTraits {
  std::size_t inputs = 0;
  bool constant_inputs = false;
};

inline SystemTraits traits_of(const InputAffineSystem& sys) { return {sys.input_count(), sys.has_constant_inputs()}; }

// Formulas whose structural preconditions hold for the system and scheme.
// Every richer scheme contains w = 0 and the constant surrogates as special
// parameter values, so the lower-order bounds stay valid for it.
//
// O2_ConstantC2 is never selected automatically: for additive noise with
// L' = H = 0 it reduces to an O(h^3) bound, but a constant surrogate only
// achieves O(h^2) there (x' = Ax + v with v = -V, +V on the two half-steps
// has error about L V h^2 / 4, see test_localerr). It remains callable.
inline std::vector<ErrorOrder> applicable_orders(const SystemTraits& t, SchemeKind scheme) {
  std::vector<ErrorOrder> r{ErrorOrder::O1_Zero};
  if (scheme == SchemeKind::Zero) return r;
  r.push_back(ErrorOrder::O2_Constant);
  if (scheme == SchemeKind::Constant) return r;
  r.push_back(ErrorOrder::O2_Affine);
  if (t.constant_inputs) r.push_back(ErrorOrder::O3_Additive);
  if (t.inputs == 1) r.push_back(ErrorOrder::O3_SingleInput);
  return r;
}

struct SelectedError {
  ErrorOrder order = ErrorOrder::O1_Zero;
  double epsilon = 0.0;
};

// Smallest bound among the applicable formulas; ties go to the higher order.
// With `forced_order` (1, 2 or 3) only formulas of that nominal order compete.
inline SelectedError select_error(const SystemTraits& t, SchemeKind scheme, const StepErrorBounds& b, double h,
                                  std::optional<int> forced_order = std::nullopt) {
  std::optional<SelectedError> best;
  for (ErrorOrder o : applicable_orders(t, scheme)) {
    if (forced_order && nominal_order(o) != *forced_order) continue;
    double e;
    try {
      e = evaluate_error(o, b, h);
    } catch (const InapplicableError&) {
      continue;
    }
    if (!best || e < best->epsilon || (e == best->epsilon && nominal_order(o) > nominal_order(best->order)))
      best = SelectedError{o, e};
  }
  if (!best) {
    std::string why = forced_order ? "no applicable error formula of order " + std::to_string(*forced_order)
                                   : std::string("no applicable error formula");
    throw InapplicableError(why + " for scheme '" + to_string(scheme) + "' at h=" + std::to_string(h));
  }
  return *best;
}

struct ParamRequirements {
  int equations = 0, degree = 0, parameters = 0;
  friend bool operator==(const ParamRequirements&, const ParamRequirements&) = default;
};

// Moment equations, minimal polynomial degree and parameter count for a
// third-order scheme with m inputs.
inline ParamRequirements param_requirements(int m) {
  if (m < 1) throw std::invalid_argument("input count must be at least 1");
  ParamRequirements r;
  r.equations = m * (m + 3) / 2;
  r.degree = (m + 2) / 2;  // ceil((m+1)/2)
  r.parameters = m * (r.degree + 1);
  return r;
}

}  // namespace dincl
