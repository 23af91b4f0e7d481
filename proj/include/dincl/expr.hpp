#pragma once

// Symbolic scalar expressions over state variables x1..xn.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | 'x' index | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
//
// Expressions are immutable trees with shared structure. Variables are stored
// zero-based: the identifier "x2" is variable index 1.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dincl/interval.hpp"

namespace dincl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t token, std::size_t column)
      : std::runtime_error(what + " (token " + std::to_string(token) + ", column " +
                           std::to_string(column) + ")"),
        token_(token),
        column_(column) {}

  // 1-based index of the offending token.
  std::size_t token() const { return token_; }
  // 1-based character column.
  std::size_t column() const { return column_; }

 private:
  std::size_t token_;
  std::size_t column_;
};

enum class Op : std::uint8_t { Var, Const, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

namespace detail {

// True when the decimal literal denotes exactly the double d.
inline bool literal_is_exact(std::string_view text, double d) {
  auto normalize = [](std::string_view s) -> std::pair<std::string, long> {
    std::string digits;
    long exponent = 0;
    bool seen_point = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '.') {
        seen_point = true;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        digits.push_back(c);
        if (seen_point) --exponent;
      } else {
        break;
      }
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) exponent += std::strtol(std::string(s.substr(i + 1)).c_str(), nullptr, 10);
    std::size_t first = digits.find_first_not_of('0');
    if (first == std::string::npos) return {"", 0};
    digits.erase(0, first);
    while (!digits.empty() && digits.back() == '0') {
      digits.pop_back();
      ++exponent;
    }
    return {digits, exponent};
  };
  if (!std::isfinite(d)) return false;
  if (d == 0.0) return normalize(text).first.empty();
  // glibc prints the exact binary value when enough digits are requested.
  char buf[900];
  std::snprintf(buf, sizeof buf, "%.780e", std::fabs(d));
  std::string exact(buf);
  auto e_pos = exact.find('e');
  long exp10 = std::strtol(exact.c_str() + e_pos + 1, nullptr, 10);
  std::string mantissa = exact.substr(0, e_pos);
  std::string compact;
  for (char c : mantissa)
    if (c != '.') compact.push_back(c);
  // mantissa = d.ddd * 10^exp10 -> integer digits * 10^(exp10 - (len-1))
  long exp_exact = exp10 - static_cast<long>(compact.size()) + 1;
  auto [dig_a, exp_a] = normalize(text);
  std::size_t first = compact.find_first_not_of('0');
  compact.erase(0, first);
  while (!compact.empty() && compact.back() == '0') {
    compact.pop_back();
    ++exp_exact;
  }
  return dig_a == compact && exp_a == exp_exact;
}

inline Interval literal_enclosure(const std::string& text) {
  double d = std::strtod(text.c_str(), nullptr);
  if (literal_is_exact(text, d)) return Interval(d);
  return {rounding::down(d), rounding::up(d)};
}

inline std::string integer_literal(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

class Expr {
 public:
  struct Node {
    Op op = Op::Const;
    std::size_t index = 0;   // Var
    int exponent = 0;        // Pow
    std::string literal;     // Const
    Interval value;          // Const
    std::shared_ptr<const Node> lhs, rhs;
  };

  Expr() : Expr(constant_node("0")) {}

  static Expr variable(std::size_t index) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->index = index;
    return Expr(std::move(n));
  }
  // Nonnegative decimal literal; enclosed exactly when representable.
  static Expr literal(const std::string& text) { return Expr(constant_node(text)); }
  // Nonnegative integer constant.
  static Expr integer(double value) {
    if (value < 0) return negate_raw(integer(-value));
    return literal(detail::integer_literal(value));
  }

  // Raw constructors: build exactly the requested node.
  static Expr negate_raw(const Expr& a) { return unary(Op::Neg, a); }
  static Expr binary(Op op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = a.node_;
    n->rhs = b.node_;
    return Expr(std::move(n));
  }
  static Expr unary(Op op, const Expr& a) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = a.node_;
    return Expr(std::move(n));
  }
  static Expr power_raw(const Expr& a, int k) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->exponent = k;
    n->lhs = a.node_;
    return Expr(std::move(n));
  }

  Op op() const { return node_->op; }
  std::size_t index() const { return node_->index; }
  int exponent() const { return node_->exponent; }
  const std::string& literal_text() const { return node_->literal; }
  const Interval& value() const { return node_->value; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_constant(double v) const {
    return node_->op == Op::Const && node_->value.is_thin() && node_->value.lower() == v;
  }
  bool is_zero() const { return is_constant(0.0); }
  bool is_one() const { return is_constant(1.0); }
  // Integer-valued exact constant (possibly negated).
  std::optional<double> integer_value() const {
    if (node_->op == Op::Neg) {
      auto v = lhs().integer_value();
      if (v) return -*v;
      return std::nullopt;
    }
    if (node_->op != Op::Const || !node_->value.is_thin()) return std::nullopt;
    double v = node_->value.lower();
    if (v != std::floor(v) || std::fabs(v) > 0x1p52) return std::nullopt;
    return v;
  }

  // Largest variable index referenced, or nullopt for constant expressions.
  std::optional<std::size_t> max_variable() const {
    switch (node_->op) {
      case Op::Var: return node_->index;
      case Op::Const: return std::nullopt;
      default: break;
    }
    auto a = lhs().max_variable();
    if (!node_->rhs) return a;
    auto b = rhs().max_variable();
    if (!a) return b;
    if (!b) return a;
    return std::max(*a, *b);
  }

  friend bool structurally_equal(const Expr& a, const Expr& b) {
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::Var: return x.index == y.index;
      case Op::Const: return x.value == y.value;
      case Op::Pow: return x.exponent == y.exponent && structurally_equal(a.lhs(), b.lhs());
      case Op::Neg:
      case Op::Sin:
      case Op::Cos:
      case Op::Exp: return structurally_equal(a.lhs(), b.lhs());
      default:
        return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
    }
  }

  const Node* node() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<const Node> constant_node(const std::string& text) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->literal = text;
    n->value = detail::literal_enclosure(text);
    return n;
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Simplifying constructors. Only exact integer folding is performed.

namespace detail {
inline bool exact_integer(double v) { return v == std::floor(v) && std::fabs(v) <= 0x1p52; }
}  // namespace detail

inline Expr neg(const Expr& a) {
  if (a.is_zero()) return a;
  if (a.op() == Op::Neg) return a.lhs();
  return Expr::negate_raw(a);
}

inline Expr operator-(const Expr& a) { return neg(a); }

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto x = a.integer_value(), y = b.integer_value();
  if (x && y && detail::exact_integer(*x + *y)) return Expr::integer(*x + *y);
  if (b.op() == Op::Neg) return Expr::binary(Op::Sub, a, b.lhs());
  return Expr::binary(Op::Add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return neg(b);
  auto x = a.integer_value(), y = b.integer_value();
  if (x && y && detail::exact_integer(*x - *y)) return Expr::integer(*x - *y);
  if (b.op() == Op::Neg) return Expr::binary(Op::Add, a, b.lhs());
  return Expr::binary(Op::Sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr::integer(0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  auto x = a.integer_value(), y = b.integer_value();
  if (x && y && detail::exact_integer(*x * *y)) return Expr::integer(*x * *y);
  if (a.op() == Op::Neg && b.op() == Op::Neg) return a.lhs() * b.lhs();
  if (a.op() == Op::Neg) return neg(a.lhs() * b);
  if (b.op() == Op::Neg) return neg(a * b.lhs());
  return Expr::binary(Op::Mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return a;
  if (b.is_one()) return a;
  return Expr::binary(Op::Div, a, b);
}

inline Expr pow(const Expr& a, int k) {
  if (k == 0) return Expr::integer(1);
  if (k == 1) return a;
  if (a.is_zero() && k > 0) return a;
  return Expr::power_raw(a, k);
}

inline Expr sin(const Expr& a) { return Expr::unary(Op::Sin, a); }
inline Expr cos(const Expr& a) { return Expr::unary(Op::Cos, a); }
inline Expr exp(const Expr& a) { return Expr::unary(Op::Exp, a); }

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

inline void print(std::ostream& os, const Expr& e, int context) {
  const int p = precedence(e.op());
  const bool parens = p < context;
  if (parens) os << '(';
  switch (e.op()) {
    case Op::Var: os << 'x' << (e.index() + 1); break;
    case Op::Const: os << e.literal_text(); break;
    case Op::Neg:
      os << '-';
      print(os, e.lhs(), 3);
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const char* sym = e.op() == Op::Add ? " + " : e.op() == Op::Sub ? " - " : e.op() == Op::Mul ? "*" : "/";
      print(os, e.lhs(), p);
      os << sym;
      print(os, e.rhs(), p + 1);
      break;
    }
    case Op::Pow:
      print(os, e.lhs(), 5);
      os << '^' << e.exponent();
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      os << (e.op() == Op::Sin ? "sin(" : e.op() == Op::Cos ? "cos(" : "exp(");
      print(os, e.lhs(), 0);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  detail::print(os, e, 0);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Token {
  enum Kind { Number, Ident, Symbol, End } kind;
  std::string text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      out.push_back({Token::Number, std::string(s.substr(start, i - start)), start + 1});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Token::Ident, std::string(s.substr(start, i - start)), start + 1});
    } else if (std::string_view("+-*/^()").find(c) != std::string_view::npos) {
      ++i;
      out.push_back({Token::Symbol, std::string(1, c), start + 1});
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", out.size() + 1, start + 1);
    }
  }
  out.push_back({Token::End, "", s.size() + 1});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::optional<std::size_t> dimension)
      : tokens_(tokenize(text)), dimension_(dimension) {}

  Expr parse() {
    Expr e = expr();
    if (peek().kind != Token::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool accept(const char* sym) {
    if (peek().kind == Token::Symbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    std::string msg = peek().kind == Token::End ? "unexpected end of expression" : what;
    throw ParseError(msg, pos_ + 1, peek().column);
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept("+")) e = Expr::binary(Op::Add, e, term());
      else if (accept("-")) e = Expr::binary(Op::Sub, e, term());
      else return e;
    }
  }
  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept("*")) e = Expr::binary(Op::Mul, e, unary());
      else if (accept("/")) e = Expr::binary(Op::Div, e, unary());
      else return e;
    }
  }
  Expr unary() {
    if (accept("-")) return Expr::negate_raw(unary());
    return power();
  }
  Expr power() {
    Expr base = primary();
    if (!accept("^")) return base;
    bool negative = accept("-");
    if (peek().kind != Token::Number || peek().text.find_first_not_of("0123456789") != std::string::npos)
      fail("exponent must be an integer literal");
    long k = std::strtol(peek().text.c_str(), nullptr, 10);
    if (k > 64) fail("exponent too large");
    ++pos_;
    return Expr::power_raw(base, static_cast<int>(negative ? -k : k));
  }
  Expr primary() {
    const Token& t = peek();
    if (t.kind == Token::Number) {
      char* end = nullptr;
      std::strtod(t.text.c_str(), &end);
      if (*end != '\0') fail("malformed number '" + t.text + "'");
      ++pos_;
      return Expr::literal(t.text);
    }
    if (t.kind == Token::Ident) {
      if (t.text == "sin" || t.text == "cos" || t.text == "exp") {
        Op op = t.text == "sin" ? Op::Sin : t.text == "cos" ? Op::Cos : Op::Exp;
        ++pos_;
        if (!accept("(")) fail("expected '(' after function name");
        Expr arg = expr();
        if (!accept(")")) fail("expected ')'");
        return Expr::unary(op, arg);
      }
      if (t.text.size() >= 2 && t.text[0] == 'x' &&
          t.text.find_first_not_of("0123456789", 1) == std::string::npos && t.text[1] != '0') {
        std::size_t idx = std::stoul(t.text.substr(1));
        if (dimension_ && idx > *dimension_) fail("unknown identifier '" + t.text + "'");
        ++pos_;
        return Expr::variable(idx - 1);
      }
      fail("unknown identifier '" + t.text + "'");
    }
    if (accept("(")) {
      Expr e = expr();
      if (!accept(")")) fail("expected ')'");
      return e;
    }
    fail("unexpected '" + t.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::optional<std::size_t> dimension_;
};

}  // namespace detail

// Parses an expression; when a dimension is given, variables beyond it are rejected.
inline Expr parse(std::string_view text, std::optional<std::size_t> dimension = std::nullopt) {
  return detail::Parser(text, dimension).parse();
}

// ---------------------------------------------------------------------------
// Differentiation

inline Expr diff(const Expr& e, std::size_t j) {
  switch (e.op()) {
    case Op::Var: return Expr::integer(e.index() == j ? 1 : 0);
    case Op::Const: return Expr::integer(0);
    case Op::Neg: return neg(diff(e.lhs(), j));
    case Op::Add: return diff(e.lhs(), j) + diff(e.rhs(), j);
    case Op::Sub: return diff(e.lhs(), j) - diff(e.rhs(), j);
    case Op::Mul: return diff(e.lhs(), j) * e.rhs() + e.lhs() * diff(e.rhs(), j);
    case Op::Div: {
      Expr u = e.lhs(), v = e.rhs();
      Expr du = diff(u, j), dv = diff(v, j);
      if (dv.is_zero()) return du / v;
      return (du * v - u * dv) / pow(v, 2);
    }
    case Op::Pow: {
      int k = e.exponent();
      Expr du = diff(e.lhs(), j);
      if (du.is_zero()) return Expr::integer(0);
      return Expr::integer(k) * pow(e.lhs(), k - 1) * du;
    }
    case Op::Sin: return cos(e.lhs()) * diff(e.lhs(), j);
    case Op::Cos: return neg(sin(e.lhs()) * diff(e.lhs(), j));
    case Op::Exp: return e * diff(e.lhs(), j);
  }
  return Expr::integer(0);
}

// ---------------------------------------------------------------------------
// Evaluation

// Natural interval extension.
inline Interval eval_interval(const Expr& e, const Box& x) {
  switch (e.op()) {
    case Op::Var:
      if (e.index() >= x.dimension()) throw DomainError("variable index outside box dimension");
      return x[e.index()];
    case Op::Const: return e.value();
    case Op::Neg: return -eval_interval(e.lhs(), x);
    case Op::Add: return eval_interval(e.lhs(), x) + eval_interval(e.rhs(), x);
    case Op::Sub: return eval_interval(e.lhs(), x) - eval_interval(e.rhs(), x);
    case Op::Mul: return eval_interval(e.lhs(), x) * eval_interval(e.rhs(), x);
    case Op::Div: return eval_interval(e.lhs(), x) / eval_interval(e.rhs(), x);
    case Op::Pow: return pow(eval_interval(e.lhs(), x), e.exponent());
    case Op::Sin: return sin(eval_interval(e.lhs(), x));
    case Op::Cos: return cos(eval_interval(e.lhs(), x));
    case Op::Exp: return exp(eval_interval(e.lhs(), x));
  }
  return Interval();
}

// Floating-point evaluation at a point (not validated).
inline double eval(const Expr& e, std::span<const double> x) {
  switch (e.op()) {
    case Op::Var: return x[e.index()];
    case Op::Const: return e.value().mid();
    case Op::Neg: return -eval(e.lhs(), x);
    case Op::Add: return eval(e.lhs(), x) + eval(e.rhs(), x);
    case Op::Sub: return eval(e.lhs(), x) - eval(e.rhs(), x);
    case Op::Mul: return eval(e.lhs(), x) * eval(e.rhs(), x);
    case Op::Div: return eval(e.lhs(), x) / eval(e.rhs(), x);
    case Op::Pow: return std::pow(eval(e.lhs(), x), e.exponent());
    case Op::Sin: return std::sin(eval(e.lhs(), x));
    case Op::Cos: return std::cos(eval(e.lhs(), x));
    case Op::Exp: return std::exp(eval(e.lhs(), x));
  }
  return 0.0;
}

}  // namespace dincl
