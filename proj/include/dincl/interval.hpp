#pragma once

// Outward-rounded interval arithmetic over doubles.
//
// Rounding is done in software: every endpoint is computed in round-to-nearest
// and then stepped one ulp outward, unless an error-free transformation
// (TwoSum / FMA residual) proves the operation exact. No global rounding-mode
// changes are made, so everything here is thread-safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dincl {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude the FMA residual may itself underflow.
inline constexpr double kTiny = 0x1p-960;

inline double down(double x) { return std::nextafter(x, -kInf); }
inline double up(double x) { return std::nextafter(x, kInf); }

// Rounding error of a + b, exact when no overflow occurs (Knuth TwoSum).
inline double two_sum_error(double a, double b, double s) {
  double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

inline double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s;
  return two_sum_error(a, b, s) < 0.0 ? down(s) : s;
}
inline double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s;
  return two_sum_error(a, b, s) > 0.0 ? up(s) : s;
}
inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::fabs(p) < kTiny) return down(p);
  return std::fma(a, b, -p) < 0.0 ? down(p) : p;
}
inline double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::fabs(p) < kTiny) return up(p);
  return std::fma(a, b, -p) > 0.0 ? up(p) : p;
}

// Sign of (a/b - q) equals sign(a - q*b) * sign(b).
inline double div_down(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  // Infinite operands only arise as limits of unbounded intervals.
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) return q;
  if (std::fabs(q) < kTiny) return down(q);
  double r = std::fma(-q, b, a);
  if (r == 0.0) return q;
  return ((r < 0.0) != (b < 0.0)) ? down(q) : q;
}
inline double div_up(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  if (!std::isfinite(q) || !std::isfinite(a) || !std::isfinite(b)) return q;
  if (std::fabs(q) < kTiny) return up(q);
  double r = std::fma(-q, b, a);
  if (r == 0.0) return q;
  return ((r > 0.0) != (b < 0.0)) ? up(q) : q;
}

}  // namespace rounding

class Interval {
 public:
  constexpr Interval() = default;
  constexpr Interval(double x) : lo_(x), hi_(x) {}  // NOLINT: implicit point promotion
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw DomainError("invalid interval bounds [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }

  static Interval entire() { return {-rounding::kInf, rounding::kInf}; }
  // Symmetric interval [-r, r].
  static Interval ball(double r) { return {-std::fabs(r), std::fabs(r)}; }
  static Interval unit() { return {-1.0, 1.0}; }

  double lower() const { return lo_; }
  double upper() const { return hi_; }

  bool is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }
  bool is_thin() const { return lo_ == hi_; }

  double mid() const {
    if (!is_finite()) {
      if (lo_ == -rounding::kInf && hi_ == rounding::kInf) return 0.0;
      return lo_ == -rounding::kInf ? hi_ : lo_;
    }
    double m = 0.5 * lo_ + 0.5 * hi_;
    return std::clamp(m, lo_, hi_);
  }
  // Upper bound on the radius about mid().
  double rad() const {
    double m = mid();
    return std::max(rounding::sub_up(hi_, m), rounding::sub_up(m, lo_));
  }
  double width() const { return rounding::sub_up(hi_, lo_); }
  // Largest absolute value.
  double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }
  // Smallest absolute value.
  double mig() const {
    if (lo_ <= 0.0 && hi_ >= 0.0) return 0.0;
    return std::min(std::fabs(lo_), std::fabs(hi_));
  }

  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return contains(0.0); }
  bool subset_of(const Interval& o) const { return o.lo_ <= lo_ && hi_ <= o.hi_; }
  bool interior_of(const Interval& o) const { return o.lo_ < lo_ && hi_ < o.hi_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const Interval& x) {
  return os << '[' << x.lower() << ", " << x.upper() << ']';
}

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lower(), b.lower()), std::max(a.upper(), b.upper())};
}

inline Interval intersect(const Interval& a, const Interval& b) {
  double lo = std::max(a.lower(), b.lower());
  double hi = std::min(a.upper(), b.upper());
  if (lo > hi) throw DomainError("empty interval intersection");
  return {lo, hi};
}

inline Interval operator-(const Interval& a) { return {-a.upper(), -a.lower()}; }

inline Interval operator+(const Interval& a, const Interval& b) {
  return {rounding::add_down(a.lower(), b.lower()), rounding::add_up(a.upper(), b.upper())};
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return {rounding::sub_down(a.lower(), b.upper()), rounding::sub_up(a.upper(), b.lower())};
}

inline Interval operator*(const Interval& a, const Interval& b) {
  using namespace rounding;
  const double al = a.lower(), ah = a.upper(), bl = b.lower(), bh = b.upper();
  double lo = std::min({mul_down(al, bl), mul_down(al, bh), mul_down(ah, bl), mul_down(ah, bh)});
  double hi = std::max({mul_up(al, bl), mul_up(al, bh), mul_up(ah, bl), mul_up(ah, bh)});
  return {lo, hi};
}

inline Interval operator/(const Interval& a, const Interval& b) {
  using namespace rounding;
  if (b.contains_zero()) throw DomainError("interval division by an interval containing zero");
  const double al = a.lower(), ah = a.upper(), bl = b.lower(), bh = b.upper();
  double lo = std::min({div_down(al, bl), div_down(al, bh), div_down(ah, bl), div_down(ah, bh)});
  double hi = std::max({div_up(al, bl), div_up(al, bh), div_up(ah, bl), div_up(ah, bh)});
  return {lo, hi};
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }
inline Interval& operator/=(Interval& a, const Interval& b) { return a = a / b; }

inline Interval abs(const Interval& a) {
  if (a.lower() >= 0.0) return a;
  if (a.upper() <= 0.0) return -a;
  return {0.0, a.mag()};
}

namespace detail {
// |x|^n rounded down / up for x >= 0.
inline double pow_down(double x, unsigned n) {
  double r = 1.0;
  for (unsigned i = 0; i < n; ++i) r = rounding::mul_down(r, x);
  return r;
}
inline double pow_up(double x, unsigned n) {
  double r = 1.0;
  for (unsigned i = 0; i < n; ++i) r = rounding::mul_up(r, x);
  return r;
}
}  // namespace detail

// Integer power. Even powers use the dependency-free rule, so x^2 over [-1,2]
// is [0,4] rather than [-2,4].
inline Interval pow(const Interval& a, int n) {
  if (n == 0) return Interval(1.0);
  if (n < 0) return Interval(1.0) / pow(a, -n);
  const unsigned k = static_cast<unsigned>(n);
  if (k % 2 == 0) {
    double lo = detail::pow_down(a.mig(), k);
    double hi = detail::pow_up(a.mag(), k);
    return {lo, hi};
  }
  auto odd_down = [k](double x) {
    return x >= 0.0 ? detail::pow_down(x, k) : -detail::pow_up(-x, k);
  };
  auto odd_up = [k](double x) {
    return x >= 0.0 ? detail::pow_up(x, k) : -detail::pow_down(-x, k);
  };
  return {odd_down(a.lower()), odd_up(a.upper())};
}

inline Interval sqr(const Interval& a) { return pow(a, 2); }

inline Interval exp(const Interval& a) {
  if (std::isnan(a.lower()) || std::isnan(a.upper())) throw DomainError("exp of NaN");
  double lo = a.lower() == -rounding::kInf ? 0.0 : std::max(0.0, rounding::down(std::exp(a.lower())));
  double hi = a.upper() == -rounding::kInf ? 0.0 : rounding::up(std::exp(a.upper()));
  return {lo, hi};
}

// Enclosure of (e^x - 1) for thin or narrow x; monotone increasing.
inline Interval expm1(const Interval& a) {
  double lo = rounding::down(std::expm1(a.lower()));
  double hi = rounding::up(std::expm1(a.upper()));
  return {std::max(lo, -1.0), hi};
}

namespace detail {

inline const Interval& pi_enclosure() {
  static const Interval pi(rounding::down(std::numbers::pi), rounding::up(std::numbers::pi));
  return pi;
}

// True when the interval may contain a point offset + 2k*pi for some integer k.
inline bool may_contain_periodic_point(const Interval& x, double offset_in_pi) {
  const Interval& pi = pi_enclosure();
  double kmin = std::floor((x.lower() / std::numbers::pi - offset_in_pi) / 2.0) - 1.0;
  double kmax = std::ceil((x.upper() / std::numbers::pi - offset_in_pi) / 2.0) + 1.0;
  for (double k = kmin; k <= kmax; k += 1.0) {
    Interval point = Interval(offset_in_pi + 2.0 * k) * pi;
    if (point.upper() >= x.lower() && point.lower() <= x.upper()) return true;
  }
  return false;
}

inline Interval clamp_unit(double lo, double hi) {
  return {std::max(-1.0, lo), std::min(1.0, hi)};
}

}  // namespace detail

inline Interval sin(const Interval& a) {
  if (!a.is_finite() || a.width() >= 2.0 * detail::pi_enclosure().lower())
    return Interval::unit();
  double s0 = std::sin(a.lower()), s1 = std::sin(a.upper());
  double lo = rounding::down(std::min(s0, s1));
  double hi = rounding::up(std::max(s0, s1));
  if (detail::may_contain_periodic_point(a, 0.5)) hi = 1.0;
  if (detail::may_contain_periodic_point(a, -0.5)) lo = -1.0;
  return detail::clamp_unit(lo, hi);
}

inline Interval cos(const Interval& a) {
  if (!a.is_finite() || a.width() >= 2.0 * detail::pi_enclosure().lower())
    return Interval::unit();
  double c0 = std::cos(a.lower()), c1 = std::cos(a.upper());
  double lo = rounding::down(std::min(c0, c1));
  double hi = rounding::up(std::max(c0, c1));
  if (detail::may_contain_periodic_point(a, 0.0)) hi = 1.0;
  if (detail::may_contain_periodic_point(a, 1.0)) lo = -1.0;
  return detail::clamp_unit(lo, hi);
}

// ---------------------------------------------------------------------------
// Box: Cartesian product of intervals.

class Box {
 public:
  Box() = default;
  explicit Box(std::size_t n, Interval value = Interval()) : components_(n, value) {}
  explicit Box(std::vector<Interval> components) : components_(std::move(components)) {}
  Box(std::initializer_list<Interval> components) : components_(components) {}

  std::size_t dimension() const { return components_.size(); }
  const Interval& operator[](std::size_t i) const { return components_[i]; }
  Interval& operator[](std::size_t i) { return components_[i]; }
  const std::vector<Interval>& components() const { return components_; }

  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  bool is_finite() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const Interval& x) { return x.is_finite(); });
  }
  bool subset_of(const Box& o) const {
    if (o.dimension() != dimension()) return false;
    for (std::size_t i = 0; i < dimension(); ++i)
      if (!components_[i].subset_of(o[i])) return false;
    return true;
  }
  bool contains(const std::vector<double>& x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < dimension(); ++i)
      if (!components_[i].contains(x[i])) return false;
    return true;
  }
  std::vector<double> midpoint() const {
    std::vector<double> m;
    m.reserve(dimension());
    for (const auto& c : components_) m.push_back(c.mid());
    return m;
  }
  // Largest component width (upper bound).
  double diameter() const {
    double d = 0.0;
    for (const auto& c : components_) d = std::max(d, c.width());
    return d;
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> components_;
};

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
  os << '(';
  for (std::size_t i = 0; i < b.dimension(); ++i) os << (i ? ", " : "") << b[i];
  return os << ')';
}

inline Box hull(const Box& a, const Box& b) {
  if (a.dimension() != b.dimension()) throw DomainError("box dimension mismatch in hull");
  Box r(a.dimension());
  for (std::size_t i = 0; i < a.dimension(); ++i) r[i] = hull(a[i], b[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Square interval matrices and the sup-norm quantities derived from them.

class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  explicit IntervalMatrix(std::size_t n) : n_(n), entries_(n * n) {}
  IntervalMatrix(std::initializer_list<std::initializer_list<Interval>> rows) : n_(rows.size()) {
    entries_.reserve(n_ * n_);
    for (const auto& row : rows) {
      if (row.size() != n_) throw DomainError("interval matrix must be square");
      entries_.insert(entries_.end(), row.begin(), row.end());
    }
  }

  std::size_t size() const { return n_; }
  const Interval& operator()(std::size_t r, std::size_t c) const { return entries_[r * n_ + c]; }
  Interval& operator()(std::size_t r, std::size_t c) { return entries_[r * n_ + c]; }

 private:
  std::size_t n_ = 0;
  std::vector<Interval> entries_;
};

// Upper bound of max_k sum_i |m_ki| over all point matrices in M.
inline double mat_inf_norm(const IntervalMatrix& m) {
  double best = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    double row = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) row = rounding::add_up(row, m(k, i).mag());
    best = std::max(best, row);
  }
  return best;
}

// Upper bound of the sup-norm logarithmic norm max_k { q_kk + sum_{i!=k} |q_ki| }.
inline double lognorm_inf(const IntervalMatrix& m) {
  double best = -rounding::kInf;
  for (std::size_t k = 0; k < m.size(); ++k) {
    // Same summation order as mat_inf_norm, so the result never exceeds it.
    double row = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
      row = rounding::add_up(row, i == k ? m(k, i).upper() : m(k, i).mag());
    best = std::max(best, row);
  }
  return m.size() == 0 ? 0.0 : best;
}

}  // namespace dincl
