#pragma once

// Polynomial models on the unit box [-1,1]^v: a polynomial p with double
// coefficients plus a uniform error e >= 0, representing every function g with
// |g(z) - p(z)| <= e on the box.
//
// Coefficient arithmetic is done in double. Rounding errors are measured with
// error-free transformations (TwoSum, FMA residual) and added to e, so the
// enclosure is preserved without changing the floating-point rounding mode.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dincl/expr.hpp"
#include "dincl/interval.hpp"

namespace dincl {

// ---------------------------------------------------------------------------
// Variables and domains

enum class VarRole : std::uint8_t { State, Input, Error, Time };

inline const char* to_string(VarRole r) {
  switch (r) {
    case VarRole::State: return "state";
    case VarRole::Input: return "input";
    case VarRole::Error: return "error";
    case VarRole::Time: return "time";
  }
  return "?";
}

// Metadata of one unit-domain variable z in [-1,1]; the semantic value is
// center + radius * z.
struct Variable {
  VarRole role = VarRole::State;
  double center = 0.0;
  double radius = 1.0;
  int step = 0;   // step at which the variable was introduced
  int index = 0;  // state component (State, Error) or input channel (Input)
  friend bool operator==(const Variable&, const Variable&) = default;
};

using Domain = std::vector<Variable>;
using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(Domain d) { return std::make_shared<const Domain>(std::move(d)); }

struct ModelSettings {
  int max_degree = 5;
  // Terms with smaller coefficient magnitude are swept into the error after
  // multiplication and composition.
  double sweep_threshold = 0.0;
  friend bool operator==(const ModelSettings&, const ModelSettings&) = default;
};

enum class RangeMethod { TermSum, Subdivide };

// ---------------------------------------------------------------------------
// Monomials: sorted variable lists with repetition, e.g. z1^2 z3 -> [1,1,3].

struct Monomial {
  static constexpr int kCapacity = 15;
  std::uint8_t degree = 0;
  std::array<std::uint16_t, kCapacity> vars{};

  static Monomial variable(std::size_t v) {
    Monomial m;
    m.degree = 1;
    m.vars[0] = static_cast<std::uint16_t>(v);
    return m;
  }

  std::span<const std::uint16_t> span() const { return {vars.data(), degree}; }

  int power_of(std::size_t v) const {
    int k = 0;
    for (int i = 0; i < degree; ++i) k += vars[i] == v;
    return k;
  }
  bool involves(std::size_t v) const { return power_of(v) > 0; }

  // True when every variable occurs to an even power (nonnegative on the box).
  bool all_even() const {
    int i = 0;
    while (i < degree) {
      int j = i;
      while (j < degree && vars[j] == vars[i]) ++j;
      if ((j - i) % 2) return false;
      i = j;
    }
    return true;
  }

  static Monomial product(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.degree = static_cast<std::uint8_t>(a.degree + b.degree);
    std::merge(a.vars.begin(), a.vars.begin() + a.degree, b.vars.begin(), b.vars.begin() + b.degree,
               m.vars.begin());
    return m;
  }

  // Removes all occurrences of v, returning its power.
  int remove(std::size_t v) {
    int k = 0, out = 0;
    for (int i = 0; i < degree; ++i) {
      if (vars[i] == v) ++k;
      else vars[out++] = vars[i];
    }
    for (int i = out; i < degree; ++i) vars[i] = 0;
    degree = static_cast<std::uint8_t>(out);
    return k;
  }

  // Adds v^k, keeping the list sorted.
  void insert(std::size_t v, int k) {
    int pos = 0;
    while (pos < degree && vars[pos] < v) ++pos;
    for (int i = degree - 1; i >= pos; --i) vars[i + k] = vars[i];
    for (int i = 0; i < k; ++i) vars[pos + i] = static_cast<std::uint16_t>(v);
    degree = static_cast<std::uint8_t>(degree + k);
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.degree == b.degree && std::equal(a.vars.begin(), a.vars.begin() + a.degree, b.vars.begin());
  }
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
    if (a.degree != b.degree) return a.degree <=> b.degree;
    for (int i = 0; i < a.degree; ++i)
      if (a.vars[i] != b.vars[i]) return a.vars[i] <=> b.vars[i];
    return std::strong_ordering::equal;
  }
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const {
    std::uint64_t h = 1469598103934665603ull ^ m.degree;
    for (int i = 0; i < m.degree; ++i) {
      h ^= m.vars[i];
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct Term {
  Monomial mono;
  double coef = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

namespace detail {

// Accumulates magnitudes of rounding errors with upward rounding.
struct Slack {
  double value = 0.0;
  void add(double x) { value = rounding::add_up(value, std::fabs(x)); }
};

// c = a + b, with the exact rounding error recorded.
inline double sum_tracked(double a, double b, Slack& slack) {
  double s = a + b;
  slack.add(rounding::two_sum_error(a, b, s));
  return s;
}

// Below this magnitude the FMA residual is not trusted; the product is
// dropped and its full magnitude recorded instead.
inline constexpr double kUnderflowGuard = 0x1p-900;

inline double product_tracked(double a, double b, Slack& slack) {
  double p = a * b;
  if (p != 0.0 && std::fabs(p) < kUnderflowGuard) {
    slack.add(rounding::mul_up(std::fabs(a), std::fabs(b)));
    return 0.0;
  }
  if (a != 0.0 && b != 0.0 && p == 0.0) {
    slack.add(kUnderflowGuard);
    return 0.0;
  }
  slack.add(std::fma(a, b, -p));
  return p;
}

inline double quotient_tracked(double a, double b, Slack& slack) {
  double q = a / b;
  if (q != 0.0 && std::fabs(q) < kUnderflowGuard) {
    slack.add(rounding::div_up(std::fabs(a), std::fabs(b)));
    return 0.0;
  }
  // a/b - q = r/b with r exact.
  slack.add(rounding::div_up(std::fabs(std::fma(-q, b, a)), std::fabs(b)));
  return q;
}

}  // namespace detail

// ---------------------------------------------------------------------------

class PolynomialModel {
 public:
  PolynomialModel() : domain_(make_domain({})) {}
  PolynomialModel(DomainPtr domain, ModelSettings settings) : domain_(std::move(domain)), settings_(settings) {
    if (settings_.max_degree < 1 || settings_.max_degree > Monomial::kCapacity)
      throw std::invalid_argument("max_degree must lie in [1, " + std::to_string(Monomial::kCapacity) + "]");
  }

  static PolynomialModel constant(DomainPtr domain, const Interval& value, ModelSettings settings = {}) {
    PolynomialModel m(std::move(domain), settings);
    double c = value.mid();
    if (c != 0.0) m.terms_.push_back({Monomial{}, c});
    m.error_ = std::max(rounding::sub_up(value.upper(), c), rounding::sub_up(c, value.lower()));
    return m;
  }
  static PolynomialModel variable(DomainPtr domain, std::size_t v, ModelSettings settings = {}) {
    if (v >= domain->size()) throw std::out_of_range("variable index outside model domain");
    PolynomialModel m(std::move(domain), settings);
    m.terms_.push_back({Monomial::variable(v), 1.0});
    return m;
  }
  // Builds a model from raw terms; terms are canonicalized.
  static PolynomialModel from_terms(DomainPtr domain, std::vector<Term> terms, double error,
                                    ModelSettings settings = {}) {
    if (!(error >= 0.0)) throw std::invalid_argument("model error must be nonnegative");
    PolynomialModel m(std::move(domain), settings);
    for (const auto& t : terms)
      for (auto v : t.mono.span())
        if (v >= m.arity()) throw std::out_of_range("term refers to variable outside domain");
    detail::Slack slack;
    m.terms_ = canonicalize(std::move(terms), slack);
    m.error_ = rounding::add_up(error, slack.value);
    m.truncate_in_place();
    return m;
  }

  std::size_t arity() const { return domain_->size(); }
  const DomainPtr& domain() const { return domain_; }
  const ModelSettings& settings() const { return settings_; }
  const std::vector<Term>& terms() const { return terms_; }
  double error() const { return error_; }
  int degree() const { return terms_.empty() ? 0 : terms_.back().mono.degree; }

  double constant_term() const {
    return (!terms_.empty() && terms_.front().mono.degree == 0) ? terms_.front().coef : 0.0;
  }
  double coefficient(const Monomial& m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& k) { return t.mono < k; });
    return (it != terms_.end() && it->mono == m) ? it->coef : 0.0;
  }

  PolynomialModel with_error(double e) const {
    PolynomialModel r = *this;
    r.error_ = e;
    return r;
  }
  PolynomialModel with_settings(ModelSettings s) const {
    PolynomialModel r = *this;
    r.settings_ = s;
    r.truncate_in_place();
    return r;
  }

  // ---- evaluation -------------------------------------------------------

  // Polynomial part at a point (floating point, not validated).
  double evaluate(std::span<const double> z) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double p = t.coef;
      for (auto v : t.mono.span()) p *= z[v];
      s += p;
    }
    return s;
  }

  // Enclosure of the polynomial part over a sub-box of the unit box.
  Interval evaluate(const std::vector<Interval>& z) const {
    Interval s(0.0);
    for (const auto& t : terms_) {
      Interval p(t.coef);
      const auto vars = t.mono.span();
      std::size_t i = 0;
      while (i < vars.size()) {
        std::size_t j = i;
        while (j < vars.size() && vars[j] == vars[i]) ++j;
        p = p * pow(z[vars[i]], static_cast<int>(j - i));
        i = j;
      }
      s = s + p;
    }
    return s;
  }

  // Enclosure of {p(z) + d : z in [-1,1]^v, |d| <= e}.
  Interval range(RangeMethod method = RangeMethod::TermSum) const {
    Interval p = method == RangeMethod::Subdivide ? subdivided_range() : term_sum_range();
    return {rounding::sub_down(p.lower(), error_), rounding::add_up(p.upper(), error_)};
  }

  // Upper bound of sup |p| on the unit box, error excluded.
  double polynomial_magnitude() const { return term_sum_range().mag(); }

  // ---- arithmetic -------------------------------------------------------

  friend PolynomialModel operator+(const PolynomialModel& a, const PolynomialModel& b) {
    a.check_compatible(b);
    PolynomialModel r(a.domain_, a.settings_);
    detail::Slack slack;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto i = a.terms_.begin(), j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
      if (j == b.terms_.end() || (i != a.terms_.end() && i->mono < j->mono)) {
        r.terms_.push_back(*i++);
      } else if (i == a.terms_.end() || j->mono < i->mono) {
        r.terms_.push_back(*j++);
      } else {
        double c = detail::sum_tracked(i->coef, j->coef, slack);
        if (c != 0.0) r.terms_.push_back({i->mono, c});
        ++i;
        ++j;
      }
    }
    r.error_ = rounding::add_up(rounding::add_up(a.error_, b.error_), slack.value);
    return r;
  }

  friend PolynomialModel operator-(const PolynomialModel& a) {
    PolynomialModel r = a;
    for (auto& t : r.terms_) t.coef = -t.coef;
    return r;
  }

  friend PolynomialModel operator-(const PolynomialModel& a, const PolynomialModel& b) { return a + (-b); }

  friend PolynomialModel operator*(const PolynomialModel& a, const PolynomialModel& b) {
    a.check_compatible(b);
    PolynomialModel r(a.domain_, a.settings_);
    const int dmax = a.settings_.max_degree;
    detail::Slack slack;

    // suffix[d] = sum of |coef| over b-terms of degree >= d, for truncation.
    std::vector<double> suffix(dmax + 2 + Monomial::kCapacity, 0.0);
    for (const auto& t : b.terms_) suffix[t.mono.degree] = rounding::add_up(suffix[t.mono.degree], std::fabs(t.coef));
    for (int d = static_cast<int>(suffix.size()) - 2; d >= 0; --d) suffix[d] = rounding::add_up(suffix[d], suffix[d + 1]);

    std::unordered_map<Monomial, double, MonomialHash> acc;
    acc.reserve(a.terms_.size() * 4 + b.terms_.size() * 4);
    double truncated = 0.0;
    // Products below the sweep threshold go straight to the remainder.
    const double small = a.settings_.sweep_threshold;
    for (const auto& ta : a.terms_) {
      const int room = dmax - ta.mono.degree;
      if (room < 0) {
        truncated = rounding::add_up(truncated, rounding::mul_up(std::fabs(ta.coef), suffix[0]));
        continue;
      }
      truncated = rounding::add_up(truncated, rounding::mul_up(std::fabs(ta.coef), suffix[room + 1]));
      for (const auto& tb : b.terms_) {
        if (tb.mono.degree > room) break;  // terms are ordered by degree
        double p = detail::product_tracked(ta.coef, tb.coef, slack);
        if (p == 0.0) continue;
        if (std::fabs(p) < small) {
          truncated = rounding::add_up(truncated, std::fabs(p));
          continue;
        }
        auto [it, inserted] = acc.try_emplace(Monomial::product(ta.mono, tb.mono), p);
        if (!inserted) it->second = detail::sum_tracked(it->second, p, slack);
      }
    }
    r.terms_.reserve(acc.size());
    for (const auto& [m, c] : acc)
      if (c != 0.0) r.terms_.push_back({m, c});
    std::sort(r.terms_.begin(), r.terms_.end(), [](const Term& x, const Term& y) { return x.mono < y.mono; });

    // (pa + da)(pb + db) = pa pb + pa db + pb da + da db
    double ma = a.polynomial_magnitude(), mb = b.polynomial_magnitude();
    double e = rounding::add_up(rounding::mul_up(ma, b.error_), rounding::mul_up(mb, a.error_));
    e = rounding::add_up(e, rounding::mul_up(a.error_, b.error_));
    e = rounding::add_up(e, truncated);
    r.error_ = rounding::add_up(e, slack.value);
    r.sweep_small_in_place(r.settings_.sweep_threshold);
    return r;
  }

  // Multiplication by an interval scalar.
  friend PolynomialModel operator*(const Interval& s, const PolynomialModel& a) {
    PolynomialModel r(a.domain_, a.settings_);
    detail::Slack slack;
    const double m = s.mid();
    const double rad = std::max(rounding::sub_up(s.upper(), m), rounding::sub_up(m, s.lower()));
    r.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) {
      double c = detail::product_tracked(t.coef, m, slack);
      if (c != 0.0) r.terms_.push_back({t.mono, c});
    }
    // |s - m| * |p| is bounded by rad * (sup |p|).
    double e = rounding::mul_up(a.error_, s.mag());
    e = rounding::add_up(e, rounding::mul_up(rad, a.polynomial_magnitude()));
    r.error_ = rounding::add_up(e, slack.value);
    return r;
  }
  friend PolynomialModel operator*(const PolynomialModel& a, const Interval& s) { return s * a; }

  friend PolynomialModel operator+(const PolynomialModel& a, const Interval& s) {
    return a + constant(a.domain_, s, a.settings_);
  }
  friend PolynomialModel operator+(const Interval& s, const PolynomialModel& a) { return a + s; }
  friend PolynomialModel operator-(const PolynomialModel& a, const Interval& s) { return a + (-s); }
  friend PolynomialModel operator-(const Interval& s, const PolynomialModel& a) { return (-a) + s; }

  // ---- structural operations -------------------------------------------

  // Removes every term involving one of the given variables, moving its range
  // into the error. Terms that are nonnegative on the box (all even powers)
  // are replaced by their mean plus half-width.
  PolynomialModel sweep(const std::vector<std::size_t>& vars) const {
    if (vars.empty()) return *this;
    std::vector<bool> mark(arity(), false);
    for (auto v : vars) {
      if (v >= arity()) throw std::out_of_range("sweep variable outside domain");
      mark[v] = true;
    }
    return sweep_if([&](const Term& t) {
      for (auto v : t.mono.span())
        if (mark[v]) return true;
      return false;
    });
  }

  // Sweeps terms whose coefficient magnitude is below the threshold.
  PolynomialModel sweep_small(double threshold) const {
    PolynomialModel r = *this;
    r.sweep_small_in_place(threshold);
    return r;
  }

  // Moves all terms of degree above d into the error.
  PolynomialModel truncate(int d) const {
    return sweep_if([d](const Term& t) { return t.mono.degree > d; });
  }

  // Antiderivative in the time variable t, anchored at the start of the time
  // interval: returns a model of  s -> integral_{t0}^{s} g,  where t0 is the
  // lower end of the variable's semantic range.
  PolynomialModel antiderivative(std::size_t t) const {
    const Variable& var = domain_->at(t);
    const double r = var.radius;
    detail::Slack slack;
    std::vector<Term> out;
    out.reserve(terms_.size() * 2);
    for (const auto& term : terms_) {
      Monomial rest = term.mono;
      int n = rest.remove(t);
      // c * tau^n  ->  c * r * (tau^(n+1) - (-1)^(n+1)) / (n+1)
      double cr = detail::product_tracked(term.coef, r, slack);
      double q = detail::quotient_tracked(cr, static_cast<double>(n + 1), slack);
      if (q == 0.0) continue;
      if (rest.degree + n + 1 > settings_.max_degree) {
        slack.add(q);  // truncated right away
      } else {
        Monomial up = rest;
        up.insert(t, n + 1);
        out.push_back({up, q});
      }
      out.push_back({rest, (n % 2 == 0) ? q : -q});
    }
    PolynomialModel m(domain_, settings_);
    m.terms_ = canonicalize(std::move(out), slack);
    // |integral of d| <= e * (2r)
    double e = rounding::mul_up(error_, rounding::mul_up(2.0, r));
    m.error_ = rounding::add_up(e, slack.value);
    m.truncate_in_place();
    return m;
  }

  // Substitutes z_v = value (|value| <= 1); the variable becomes inert.
  PolynomialModel substitute(std::size_t v, double value) const {
    if (!(std::fabs(value) <= 1.0)) throw std::domain_error("substituted value must lie in [-1,1]");
    detail::Slack slack;
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& term : terms_) {
      Monomial rest = term.mono;
      int n = rest.remove(v);
      double c = term.coef;
      for (int i = 0; i < n; ++i) c = detail::product_tracked(c, value, slack);
      if (c != 0.0) out.push_back({rest, c});
    }
    PolynomialModel m(domain_, settings_);
    m.terms_ = canonicalize(std::move(out), slack);
    m.error_ = rounding::add_up(error_, slack.value);
    return m;
  }

  // Substitutes z_v = scale * z_v + shift, where |scale| + |shift| <= 1 keeps
  // the image inside the unit interval.
  PolynomialModel affine_substitute(std::size_t v, double scale, double shift) const {
    if (!(std::fabs(scale) + std::fabs(shift) <= 1.0))
      throw std::domain_error("affine substitution must map [-1,1] into itself");
    detail::Slack slack;
    std::vector<Term> out;
    for (const auto& term : terms_) {
      Monomial rest = term.mono;
      int n = rest.remove(v);
      if (n == 0) {
        out.push_back(term);
        continue;
      }
      // (scale z + shift)^n = sum_j C(n,j) scale^j shift^(n-j) z^j
      for (int j = 0; j <= n; ++j) {
        double c = term.coef;
        c = detail::product_tracked(c, binomial(n, j), slack);
        for (int i = 0; i < j; ++i) c = detail::product_tracked(c, scale, slack);
        for (int i = 0; i < n - j; ++i) c = detail::product_tracked(c, shift, slack);
        if (c == 0.0) continue;
        Monomial m = rest;
        m.insert(v, j);
        out.push_back({m, c});
      }
    }
    PolynomialModel m(domain_, settings_);
    m.terms_ = canonicalize(std::move(out), slack);
    m.error_ = rounding::add_up(error_, slack.value);
    return m;
  }

  // Re-expresses the model over a domain that extends the current one.
  PolynomialModel extend(DomainPtr larger) const {
    if (larger->size() < arity() || !std::equal(domain_->begin(), domain_->end(), larger->begin()))
      throw std::invalid_argument("domain extension must keep existing variables as a prefix");
    PolynomialModel r = *this;
    r.domain_ = std::move(larger);
    return r;
  }

  // Removes variables from the domain. They must not occur in any term.
  // mapping[v] gives the new index of v, or -1 for removed variables.
  PolynomialModel reindex(DomainPtr smaller, const std::vector<int>& mapping) const {
    PolynomialModel r(std::move(smaller), settings_);
    r.error_ = error_;
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      Term n = t;
      for (int i = 0; i < n.mono.degree; ++i) {
        int to = mapping.at(n.mono.vars[i]);
        if (to < 0) throw std::invalid_argument("reindex would drop a variable still in use");
        n.mono.vars[i] = static_cast<std::uint16_t>(to);
      }
      r.terms_.push_back(n);
    }
    // Monotone mappings keep the order; sort anyway for arbitrary ones.
    std::sort(r.terms_.begin(), r.terms_.end(), [](const Term& x, const Term& y) { return x.mono < y.mono; });
    return r;
  }

  bool uses_variable(std::size_t v) const {
    return std::any_of(terms_.begin(), terms_.end(), [v](const Term& t) { return t.mono.involves(v); });
  }

  // Sum of |coef| over terms involving v.
  double dependence_on(std::size_t v) const {
    double s = 0.0;
    for (const auto& t : terms_)
      if (t.mono.involves(v)) s = rounding::add_up(s, std::fabs(t.coef));
    return s;
  }

 private:
  void check_compatible(const PolynomialModel& o) const {
    if (domain_ != o.domain_ && (domain_->size() != o.domain_->size() || *domain_ != *o.domain_))
      throw std::invalid_argument("polynomial models over different domains (arity " +
                                  std::to_string(arity()) + " vs " + std::to_string(o.arity()) + ")");
  }

  static double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact for small n
    return r;
  }

  static std::vector<Term> canonicalize(std::vector<Term> terms, detail::Slack& slack) {
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.mono < y.mono; });
    std::vector<Term> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
      if (!out.empty() && out.back().mono == t.mono) {
        out.back().coef = detail::sum_tracked(out.back().coef, t.coef, slack);
      } else {
        out.push_back(t);
      }
    }
    std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
    return out;
  }

  template <class Pred>
  PolynomialModel sweep_if(Pred pred) const {
    PolynomialModel r(domain_, settings_);
    detail::Slack slack;
    double e = error_;
    double shift = 0.0;
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (t.mono.degree == 0 || !pred(t)) {
        r.terms_.push_back(t);
        continue;
      }
      if (t.mono.all_even()) {
        // c z^(2k) ranges over [min(0,c), max(0,c)]: mean c/2, radius |c|/2.
        double half = t.coef * 0.5;  // exact unless subnormal
        if (half * 2.0 != t.coef) slack.add(std::fabs(t.coef));
        shift = detail::sum_tracked(shift, half, slack);
        e = rounding::add_up(e, std::fabs(half));
      } else {
        e = rounding::add_up(e, std::fabs(t.coef));
      }
    }
    if (shift != 0.0) {
      if (!r.terms_.empty() && r.terms_.front().mono.degree == 0) {
        r.terms_.front().coef = detail::sum_tracked(r.terms_.front().coef, shift, slack);
        if (r.terms_.front().coef == 0.0) r.terms_.erase(r.terms_.begin());
      } else {
        r.terms_.insert(r.terms_.begin(), Term{Monomial{}, shift});
      }
    }
    r.error_ = rounding::add_up(e, slack.value);
    return r;
  }

  void sweep_small_in_place(double threshold) {
    if (!(threshold > 0.0)) return;
    bool any = std::any_of(terms_.begin(), terms_.end(),
                           [&](const Term& t) { return t.mono.degree > 0 && std::fabs(t.coef) < threshold; });
    if (!any) return;
    *this = sweep_if([threshold](const Term& t) { return std::fabs(t.coef) < threshold; });
  }

  void truncate_in_place() {
    if (degree() > settings_.max_degree) *this = truncate(settings_.max_degree);
  }

  Interval term_sum_range() const {
    double lo = 0.0, hi = 0.0;
    for (const auto& t : terms_) {
      const double c = t.coef;
      if (t.mono.degree == 0) {
        lo = rounding::add_down(lo, c);
        hi = rounding::add_up(hi, c);
      } else if (t.mono.all_even()) {
        if (c < 0) lo = rounding::add_down(lo, c);
        else hi = rounding::add_up(hi, c);
      } else {
        lo = rounding::sub_down(lo, std::fabs(c));
        hi = rounding::add_up(hi, std::fabs(c));
      }
    }
    return {lo, hi};
  }

  // Interval evaluation over the 2^k sub-boxes obtained by halving each of the
  // k occurring variables; falls back to the term sum when k is large.
  Interval subdivided_range() const {
    std::vector<std::size_t> used;
    for (const auto& t : terms_)
      for (auto v : t.mono.span())
        if (std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
    constexpr std::size_t kMaxSplit = 12;
    if (used.size() > kMaxSplit) return term_sum_range();
    Interval best = term_sum_range();
    bool first = true;
    Interval acc;
    std::vector<Interval> z(arity(), Interval(-1, 1));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << used.size()); ++mask) {
      for (std::size_t i = 0; i < used.size(); ++i)
        z[used[i]] = (mask >> i) & 1 ? Interval(0, 1) : Interval(-1, 0);
      Interval piece = evaluate(z);
      acc = first ? piece : hull(acc, piece);
      first = false;
    }
    if (first) return best;
    auto cut = intersect(acc, best);
    return cut;
  }

  DomainPtr domain_;
  std::vector<Term> terms_;  // sorted by monomial, no zero coefficients
  double error_ = 0.0;
  ModelSettings settings_;
};

using VectorModel = std::vector<PolynomialModel>;

inline Box range_box(const VectorModel& v, RangeMethod method = RangeMethod::TermSum) {
  std::vector<Interval> comps;
  comps.reserve(v.size());
  for (const auto& m : v) comps.push_back(m.range(method));
  return Box(std::move(comps));
}

// ---------------------------------------------------------------------------
// Composition of expressions with polynomial models.

namespace detail {

// Enclosures of phi^(k)(x) / k! for a univariate function.
using TaylorCoefficient = std::function<Interval(int k, const Interval& x)>;

inline Interval factorial(int k) {
  Interval f(1.0);
  for (int i = 2; i <= k; ++i) f = f * Interval(static_cast<double>(i));
  return f;
}

inline Interval exp_coefficient(int k, const Interval& x) { return exp(x) / factorial(k); }

inline Interval sin_coefficient(int k, const Interval& x) {
  Interval d;
  switch (k % 4) {
    case 0: d = sin(x); break;
    case 1: d = cos(x); break;
    case 2: d = -sin(x); break;
    default: d = -cos(x); break;
  }
  return d / factorial(k);
}

inline Interval cos_coefficient(int k, const Interval& x) {
  Interval d;
  switch (k % 4) {
    case 0: d = cos(x); break;
    case 1: d = -sin(x); break;
    case 2: d = -cos(x); break;
    default: d = sin(x); break;
  }
  return d / factorial(k);
}

// (1/x)^(k) / k! = (-1)^k x^-(k+1)
inline Interval reciprocal_coefficient(int k, const Interval& x) {
  Interval p = pow(x, -(k + 1));
  return k % 2 ? -p : p;
}

// phi(a) by a Taylor expansion around the midpoint of a's range with a
// Lagrange remainder over the whole range.
inline PolynomialModel apply_univariate(const PolynomialModel& a, const TaylorCoefficient& coef) {
  const Interval range = a.range();
  const double c = range.mid();
  const PolynomialModel delta = a - Interval(c);
  const double r = delta.range().mag();
  const int order = a.settings().max_degree;

  PolynomialModel result = PolynomialModel::constant(a.domain(), coef(0, Interval(c)), a.settings());
  PolynomialModel power = PolynomialModel::constant(a.domain(), Interval(1.0), a.settings());
  for (int k = 1; k <= order; ++k) {
    power = power * delta;
    result = result + coef(k, Interval(c)) * power;
  }
  // Remainder  phi^(n+1)(xi)/(n+1)! * delta^(n+1)  with xi in range.
  Interval rem = coef(order + 1, range) * pow(Interval(-r, r), order + 1);
  return result.with_error(rounding::add_up(result.error(), rem.mag()));
}

}  // namespace detail

inline PolynomialModel exp(const PolynomialModel& a) { return detail::apply_univariate(a, detail::exp_coefficient); }
inline PolynomialModel sin(const PolynomialModel& a) { return detail::apply_univariate(a, detail::sin_coefficient); }
inline PolynomialModel cos(const PolynomialModel& a) { return detail::apply_univariate(a, detail::cos_coefficient); }

inline PolynomialModel reciprocal(const PolynomialModel& a) {
  if (a.range().contains_zero()) throw DomainError("division by a polynomial model whose range contains zero");
  return detail::apply_univariate(a, detail::reciprocal_coefficient);
}

inline PolynomialModel pow(const PolynomialModel& a, int k) {
  if (k < 0) return reciprocal(pow(a, -k));
  PolynomialModel result = PolynomialModel::constant(a.domain(), Interval(1.0), a.settings());
  PolynomialModel base = a;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      result = first ? base : result * base;
      first = false;
    }
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

// Evaluates an expression with x_j replaced by args[j].
inline PolynomialModel compose(const Expr& e, const VectorModel& args) {
  if (args.empty()) throw std::invalid_argument("compose needs at least one argument model");
  const auto& proto = args.front();
  switch (e.op()) {
    case Op::Var:
      if (e.index() >= args.size()) throw DomainError("expression variable outside argument list");
      return args[e.index()];
    case Op::Const: return PolynomialModel::constant(proto.domain(), e.value(), proto.settings());
    case Op::Neg: return -compose(e.lhs(), args);
    case Op::Add: return compose(e.lhs(), args) + compose(e.rhs(), args);
    case Op::Sub: return compose(e.lhs(), args) - compose(e.rhs(), args);
    case Op::Mul: {
      // Constant factors scale instead of multiplying models.
      if (e.lhs().op() == Op::Const) return e.lhs().value() * compose(e.rhs(), args);
      if (e.rhs().op() == Op::Const) return e.rhs().value() * compose(e.lhs(), args);
      return compose(e.lhs(), args) * compose(e.rhs(), args);
    }
    case Op::Div: {
      if (e.rhs().op() == Op::Const) {
        if (e.rhs().value().contains_zero()) throw DomainError("division by zero constant");
        return (Interval(1.0) / e.rhs().value()) * compose(e.lhs(), args);
      }
      return compose(e.lhs(), args) * reciprocal(compose(e.rhs(), args));
    }
    case Op::Pow: return pow(compose(e.lhs(), args), e.exponent());
    case Op::Sin: return sin(compose(e.lhs(), args));
    case Op::Cos: return cos(compose(e.lhs(), args));
    case Op::Exp: return exp(compose(e.lhs(), args));
  }
  throw std::logic_error("unhandled expression node");
}

}  // namespace dincl
