#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dincl/expr.hpp"

using dincl::Box;
using dincl::Expr;
using dincl::Interval;
using dincl::Op;
using dincl::ParseError;

namespace {
const char* kVdp2 = "-x1 + 2*(1 - x1^2)*x2";
}

TEST(Parse, Variable) {
  Expr e = dincl::parse("x2");
  EXPECT_EQ(e.op(), Op::Var);
  EXPECT_EQ(e.index(), 1u);  // zero-based storage, printed as x2
  EXPECT_EQ(to_string(e), "x2");
}

TEST(Parse, VanDerPolDrift) {
  Expr e = dincl::parse(kVdp2, 2);
  EXPECT_EQ(e.op(), Op::Add);
  EXPECT_EQ(e.lhs().op(), Op::Neg);
  EXPECT_EQ(e.rhs().op(), Op::Mul);
  std::vector<double> p{0.5, 1.5};
  EXPECT_DOUBLE_EQ(eval(e, p), -0.5 + 2 * (1 - 0.25) * 1.5);
}

TEST(Parse, SyntaxErrorReportsToken) {
  try {
    dincl::parse("x1 *");
    FAIL() << "expected a parse error";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.token(), 3u);
    EXPECT_EQ(err.column(), 5u);
  }
}

TEST(Parse, UnknownIdentifier) {
  EXPECT_THROW(dincl::parse("y + 1"), ParseError);
  EXPECT_THROW(dincl::parse("x0"), ParseError);
  EXPECT_THROW(dincl::parse("x3", 2), ParseError);
  EXPECT_NO_THROW(dincl::parse("x3", 3));
  EXPECT_THROW(dincl::parse("tan(x1)"), ParseError);
  EXPECT_THROW(dincl::parse("x1^x2"), ParseError);
  EXPECT_THROW(dincl::parse("(x1"), ParseError);
  EXPECT_THROW(dincl::parse("x1 $ 2"), ParseError);
}

TEST(Parse, RoundTrip) {
  for (const char* text :
       {kVdp2, "x1 - (x2 - x3)", "x1/(x2*x3)", "-(x1 + x2)^2", "(-x1)^3", "x1^-2", "-x1^2",
        "sin(cos(exp(x1*0.5)))", "0.2 + x3*(x1 - 5.7)", "x1*-x2", "x1 - -x2", "1e-3*x1",
        "((x1))", "2*3*4", "2*(3*4)"}) {
    Expr a = dincl::parse(text);
    Expr b = dincl::parse(to_string(a));
    EXPECT_TRUE(structurally_equal(a, b)) << text << " printed as " << to_string(a);
  }
}

TEST(Parse, DecimalLiteralEnclosure) {
  EXPECT_TRUE(dincl::parse("0.5").value().is_thin());
  EXPECT_TRUE(dincl::parse("2").value().is_thin());
  EXPECT_TRUE(dincl::parse("1.25e2").value().is_thin());
  Interval v = dincl::parse("0.1").value();
  EXPECT_FALSE(v.is_thin());
  EXPECT_TRUE(v.contains(0.1));
  EXPECT_LT(v.lower(), 0.1);
  EXPECT_GT(v.upper(), 0.1);
}

TEST(Diff, Product) {
  Expr d = diff(dincl::parse("x1*x2"), 0);
  EXPECT_EQ(to_string(d), "x2");
}

TEST(Diff, LinearInX2) {
  Expr d = diff(dincl::parse(kVdp2), 1);
  EXPECT_EQ(to_string(d), "2*(1 - x1^2)");
}

TEST(Diff, SecondDerivativeMatchesFiniteDifference) {
  Expr f = dincl::parse(kVdp2);
  Expr d2 = diff(diff(f, 0), 0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> p{u(rng), u(rng)};
    // Reference: -4*x2.
    EXPECT_NEAR(eval(d2, p), -4 * p[1], 1e-12);
    double step = 1e-4;
    std::vector<double> lo = p, hi = p;
    lo[0] -= step;
    hi[0] += step;
    double fd = (eval(f, hi) - 2 * eval(f, p) + eval(f, lo)) / (step * step);
    EXPECT_NEAR(eval(d2, p), fd, 1e-6 * std::max(1.0, std::fabs(fd)) + 1e-5);
  }
}

TEST(EvalInterval, EvenPower) {
  Interval r = eval_interval(dincl::parse("x1^2"), Box{Interval(-1, 2)});
  EXPECT_EQ(r, Interval(0, 4));
}

TEST(EvalInterval, SinSmallRange) {
  Interval r = eval_interval(dincl::parse("sin(x1)"), Box{Interval(0, 0.1)});
  EXPECT_GE(r.lower(), -1e-300);
  EXPECT_LE(r.upper(), 0.1);
  EXPECT_GE(r.upper(), std::sin(0.1));
}

TEST(EvalInterval, VanDerPolMagnitude) {
  Box d{Interval(0, 2), Interval(-1, 3)};
  Interval r = eval_interval(dincl::parse(kVdp2), d);
  EXPECT_TRUE(r.subset_of(Interval(-20, 6))) << r;
  EXPECT_EQ(r.mag(), 20.0);
}

TEST(EvalInterval, DivisionDomainError) {
  EXPECT_THROW(eval_interval(dincl::parse("1/x1"), Box{Interval(-1, 1)}), dincl::DomainError);
}

// ---------------------------------------------------------------------------
// Property tests on random expressions.

namespace {

Expr random_expr(std::mt19937_64& rng, int depth) {
  int choice = static_cast<int>(rng() % (depth <= 0 ? 2 : 9));
  switch (choice) {
    case 0: return Expr::variable(rng() % 3);
    case 1: {
      static const char* lits[] = {"0.5", "2", "1.5", "0.3", "3"};
      return Expr::literal(lits[rng() % 5]);
    }
    case 2: return Expr::binary(Op::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 3: return Expr::binary(Op::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4: return Expr::binary(Op::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5: return Expr::power_raw(random_expr(rng, depth - 1), 2 + static_cast<int>(rng() % 2));
    case 6: return Expr::unary(Op::Sin, random_expr(rng, depth - 1));
    case 7: return Expr::unary(Op::Cos, random_expr(rng, depth - 1));
    default: return Expr::negate_raw(random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST(ExprProperty, DerivativeMatchesCentralDifference) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    Expr e = random_expr(rng, 4);
    std::size_t j = rng() % 3;
    Expr d = diff(e, j);
    std::vector<double> p{u(rng), u(rng), u(rng)};
    double step = 1e-5;
    std::vector<double> lo = p, hi = p;
    lo[j] -= step;
    hi[j] += step;
    double fd = (eval(e, hi) - eval(e, lo)) / (2 * step);
    double exact = eval(d, p);
    EXPECT_NEAR(exact, fd, 1e-5 * std::max(1.0, std::fabs(exact))) << to_string(e);
    ++checked;
  }
  EXPECT_EQ(checked, 400);
}

TEST(ExprProperty, IntervalExtensionSoundAndMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1), t(0, 1);
  for (int i = 0; i < 400; ++i) {
    Expr e = random_expr(rng, 4);
    std::vector<Interval> comps;
    for (int k = 0; k < 3; ++k) {
      double a = u(rng), b = u(rng);
      comps.emplace_back(std::min(a, b), std::max(a, b));
    }
    Box small(comps);
    std::vector<Interval> wide = comps;
    for (auto& c : wide) c = Interval(c.lower() - 0.1, c.upper() + 0.1);
    Box big(wide);
    Interval r = eval_interval(e, small);
    EXPECT_TRUE(r.subset_of(eval_interval(e, big))) << to_string(e);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> p;
      for (const auto& c : comps) p.push_back(c.lower() + t(rng) * (c.upper() - c.lower()));
      double v = eval(e, p);
      EXPECT_TRUE(r.contains(v) || std::fabs(v - std::clamp(v, r.lower(), r.upper())) < 1e-12 * std::fabs(v))
          << to_string(e) << " value " << v << " not in " << r;
    }
  }
}
