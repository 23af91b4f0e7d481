#pragma once

// Input-affine systems  x' = f(x) + sum_i g_i(x) v_i,  |v_i| <= V_i,
// and the derivative bounds over a box that feed the local error formulas.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dincl/expr.hpp"
#include "dincl/interval.hpp"

namespace dincl {

struct InputChannel {
  std::vector<Expr> field;  // g_i, one expression per state component
  double bound = 0.0;       // V_i > 0
};

class InputAffineSystem {
 public:
  InputAffineSystem() = default;  // empty placeholder, dimension 0
  InputAffineSystem(std::vector<Expr> drift, std::vector<InputChannel> inputs)
      : drift_(std::move(drift)), inputs_(std::move(inputs)) {
    const std::size_t n = drift_.size();
    if (n == 0) throw std::invalid_argument("system dimension must be at least 1");
    auto check = [n](const Expr& e, const std::string& what) {
      auto v = e.max_variable();
      if (v && *v >= n)
        throw std::invalid_argument(what + " refers to x" + std::to_string(*v + 1) +
                                    " but the system has dimension " + std::to_string(n));
    };
    for (std::size_t c = 0; c < n; ++c) check(drift_[c], "drift component " + std::to_string(c + 1));
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      if (inputs_[i].field.size() != n)
        throw std::invalid_argument("input " + std::to_string(i + 1) + " has " +
                                    std::to_string(inputs_[i].field.size()) + " components, expected " +
                                    std::to_string(n));
      if (!(inputs_[i].bound > 0.0) || !std::isfinite(inputs_[i].bound))
        throw std::invalid_argument("input " + std::to_string(i + 1) + " bound must be positive");
      for (std::size_t c = 0; c < n; ++c) check(inputs_[i].field[c], "input field");
    }
    drift_jac_ = jacobian(drift_);
    drift_hess_ = hessian(drift_jac_);
    constant_inputs_ = true;
    for (const auto& in : inputs_) {
      input_jac_.push_back(jacobian(in.field));
      input_hess_.push_back(hessian(input_jac_.back()));
      for (const auto& row : input_jac_.back())
        for (const auto& d : row)
          if (!d.is_zero()) constant_inputs_ = false;
    }
  }

  std::size_t dimension() const { return drift_.size(); }
  std::size_t input_count() const { return inputs_.size(); }
  const std::vector<Expr>& drift() const { return drift_; }
  const std::vector<InputChannel>& inputs() const { return inputs_; }
  const InputChannel& input(std::size_t i) const { return inputs_[i]; }

  // d f_c / d x_j
  const std::vector<std::vector<Expr>>& drift_jacobian() const { return drift_jac_; }
  // d^2 f_c / d x_j d x_k
  const std::vector<std::vector<std::vector<Expr>>>& drift_hessian() const { return drift_hess_; }
  const std::vector<std::vector<Expr>>& input_jacobian(std::size_t i) const { return input_jac_[i]; }
  const std::vector<std::vector<std::vector<Expr>>>& input_hessian(std::size_t i) const {
    return input_hess_[i];
  }

  // True when every g_i is a constant vector (additive noise).
  bool has_constant_inputs() const { return constant_inputs_; }

  // Floating-point right-hand side for a given input value (not validated).
  void rhs(std::span<const double> x, std::span<const double> v, std::span<double> out) const {
    for (std::size_t c = 0; c < dimension(); ++c) {
      double s = eval(drift_[c], x);
      for (std::size_t i = 0; i < inputs_.size(); ++i) s += eval(inputs_[i].field[c], x) * v[i];
      out[c] = s;
    }
  }

  // Same system with the input magnitudes replaced.
  InputAffineSystem with_bounds(const std::vector<double>& bounds) const {
    std::vector<InputChannel> in = inputs_;
    for (std::size_t i = 0; i < in.size(); ++i) in[i].bound = bounds.at(i);
    return InputAffineSystem(drift_, in);
  }

 private:
  using Matrix = std::vector<std::vector<Expr>>;
  using Tensor = std::vector<Matrix>;

  static Matrix jacobian(const std::vector<Expr>& fs) {
    Matrix m(fs.size());
    for (std::size_t c = 0; c < fs.size(); ++c)
      for (std::size_t j = 0; j < fs.size(); ++j) m[c].push_back(diff(fs[c], j));
    return m;
  }
  static Tensor hessian(const Matrix& jac) {
    Tensor t(jac.size());
    for (std::size_t c = 0; c < jac.size(); ++c) {
      t[c].resize(jac.size());
      for (std::size_t j = 0; j < jac.size(); ++j)
        for (std::size_t k = 0; k < jac.size(); ++k) t[c][j].push_back(diff(jac[c][j], k));
    }
    return t;
  }

  std::vector<Expr> drift_;
  std::vector<InputChannel> inputs_;
  Matrix drift_jac_;
  Tensor drift_hess_;
  std::vector<Matrix> input_jac_;
  std::vector<Tensor> input_hess_;
  bool constant_inputs_ = true;
};

// How a bound on the second-derivative tensor is collapsed to one number.
enum class HessianNorm {
  MaxEntry,     // max_{c,j,k} |d2 f_c / dx_j dx_k|
  MaxRowSum,    // max_{c,j} sum_k |d2 f_c / dx_j dx_k|
  BilinearSum,  // max_c sum_{j,k} |d2 f_c / dx_j dx_k|, a true bound of the bilinear form
};

struct StepErrorBounds {
  double K = 0, K_prime = 0;
  double L = 0, L_prime = 0;
  double H = 0, H_prime = 0;
  double Lambda = 0;
  std::vector<double> K_i, L_i, H_i;
  // sup over the box of || sum_i g_i v_i ||_inf, which never exceeds K_prime.
  double K_prime_componentwise = 0;
};

namespace detail {

inline double hessian_bound(const std::vector<std::vector<std::vector<Expr>>>& hess, const Box& b,
                            HessianNorm norm) {
  double best = 0.0;
  for (const auto& comp : hess) {
    double total = 0.0;
    for (const auto& row : comp) {
      double row_sum = 0.0;
      for (const auto& e : row) {
        double m = eval_interval(e, b).mag();
        row_sum = rounding::add_up(row_sum, m);
        if (norm == HessianNorm::MaxEntry) best = std::max(best, m);
      }
      if (norm == HessianNorm::MaxRowSum) best = std::max(best, row_sum);
      total = rounding::add_up(total, row_sum);
    }
    if (norm == HessianNorm::BilinearSum) best = std::max(best, total);
  }
  return best;
}

inline IntervalMatrix jacobian_enclosure(const std::vector<std::vector<Expr>>& jac, const Box& b) {
  IntervalMatrix m(jac.size());
  for (std::size_t r = 0; r < jac.size(); ++r)
    for (std::size_t c = 0; c < jac.size(); ++c) m(r, c) = eval_interval(jac[r][c], b);
  return m;
}

}  // namespace detail

inline StepErrorBounds compute_bounds(const InputAffineSystem& sys, const Box& b,
                                      HessianNorm norm = HessianNorm::MaxEntry) {
  if (b.dimension() != sys.dimension()) throw DomainError("bounding box has wrong dimension");
  if (!b.is_finite()) throw DomainError("bounding box must be compact");
  StepErrorBounds r;
  const std::size_t n = sys.dimension();
  for (std::size_t c = 0; c < n; ++c) r.K = std::max(r.K, eval_interval(sys.drift()[c], b).mag());
  IntervalMatrix jf = detail::jacobian_enclosure(sys.drift_jacobian(), b);
  r.L = mat_inf_norm(jf);
  r.Lambda = lognorm_inf(jf);
  r.H = detail::hessian_bound(sys.drift_hessian(), b, norm);

  std::vector<double> weighted(n, 0.0);
  for (std::size_t i = 0; i < sys.input_count(); ++i) {
    const double v = sys.input(i).bound;
    double k = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      double m = eval_interval(sys.input(i).field[c], b).mag();
      k = std::max(k, m);
      weighted[c] = rounding::add_up(weighted[c], rounding::mul_up(v, m));
    }
    double l = mat_inf_norm(detail::jacobian_enclosure(sys.input_jacobian(i), b));
    double h = detail::hessian_bound(sys.input_hessian(i), b, norm);
    r.K_i.push_back(k);
    r.L_i.push_back(l);
    r.H_i.push_back(h);
    r.K_prime = rounding::add_up(r.K_prime, rounding::mul_up(v, k));
    r.L_prime = rounding::add_up(r.L_prime, rounding::mul_up(v, l));
    r.H_prime = rounding::add_up(r.H_prime, rounding::mul_up(v, h));
  }
  for (double w : weighted) r.K_prime_componentwise = std::max(r.K_prime_componentwise, w);
  return r;
}

}  // namespace dincl
