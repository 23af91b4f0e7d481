#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dincl/reach.hpp"

using dincl::Box;
using dincl::EvolutionConfig;
using dincl::InputAffineSystem;
using dincl::Interval;
using dincl::Monomial;
using dincl::PolynomialModel;
using dincl::SchemeKind;
using dincl::VarRole;
using dincl::Variable;
using dincl::VectorModel;

namespace {

// From tests/oracles/flow_values.py.
constexpr double kExp01 = 1.1051709180756477;

std::vector<dincl::Expr> exprs(std::initializer_list<const char*> texts, std::size_t n) {
  std::vector<dincl::Expr> out;
  for (const char* t : texts) out.push_back(dincl::parse(t, n));
  return out;
}

InputAffineSystem harmonic(double a2) { return InputAffineSystem(exprs({"x2", "-x1"}, 2), {{exprs({"0", "1"}, 2), a2}}); }

InputAffineSystem van_der_pol() {
  return InputAffineSystem(exprs({"x2", "-x1 + 2*(1 - x1^2)*x2"}, 2), {{exprs({"0", "1"}, 2), 0.08}});
}

EvolutionConfig vdp_config(double h, double t) {
  EvolutionConfig cfg{.system = van_der_pol(), .initial = Box{Interval(0.1, 0.105), Interval(1.5, 1.505)}};
  cfg.step = h;
  cfg.steps = static_cast<int>(std::lround(t / h));
  cfg.region = Box{Interval(0, 2), Interval(-1, 3)};
  cfg.max_params = 20;
  cfg.model.max_degree = 3;
  cfg.model.sweep_threshold = 1e-10;
  return cfg;
}

// Random model over a domain of state and input variables.
VectorModel random_set(std::mt19937_64& rng, std::size_t params) {
  std::uniform_real_distribution<double> u(-1, 1);
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}, Variable{VarRole::State, 0, 1, 0, 1}};
  for (std::size_t p = 0; p < params; ++p) d.push_back(Variable{VarRole::Input, 0, 1, static_cast<int>(p), 0});
  auto dom = dincl::make_domain(d);
  VectorModel x;
  for (int c = 0; c < 2; ++c) {
    std::vector<dincl::Term> terms{{Monomial{}, u(rng)}};
    for (std::size_t v = 0; v < dom->size(); ++v) terms.push_back({Monomial::variable(v), 0.3 * u(rng)});
    terms.push_back({Monomial::product(Monomial::variable(0), Monomial::variable(1)), 0.2 * u(rng)});
    terms.push_back({Monomial::product(Monomial::variable(0), Monomial::variable(0)), 0.2 * u(rng)});
    terms.push_back({Monomial::product(Monomial::variable(1), Monomial::variable(2)), 0.1 * u(rng)});
    x.push_back(PolynomialModel::from_terms(dom, terms, 0.01 * (1 + u(rng))));
  }
  return x;
}

bool inside(const VectorModel& m, const std::vector<double>& z, const std::vector<double>& value, double slack = 1e-13) {
  for (std::size_t c = 0; c < m.size(); ++c)
    if (std::fabs(m[c].evaluate(z) - value[c]) > m[c].error() + slack) return false;
  return true;
}

}  // namespace

TEST(Reach, StationaryFieldKeepsBox) {
  InputAffineSystem sys(exprs({"0*x1"}, 1), {});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(0, 1)}};
  cfg.step = 0.25;
  cfg.steps = 8;
  cfg.scheme = SchemeKind::Zero;
  auto trace = dincl::evolve(cfg);
  ASSERT_EQ(trace.sets.size(), 9u);
  for (const auto& at : trace.sets) EXPECT_EQ(final_box(at[0]), (Box{Interval(0, 1)}));
  for (const auto& d : trace.diagnostics) EXPECT_EQ(d[0].epsilon, 0.0);
}

TEST(Reach, LinearGrowthOneStep) {
  InputAffineSystem sys(exprs({"x1"}, 1), {});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(1.0)}};
  cfg.step = 0.1;
  cfg.steps = 1;
  cfg.scheme = SchemeKind::Zero;
  auto trace = dincl::evolve(cfg);
  Box b = final_box(trace.final_sets()[0]);
  EXPECT_TRUE(b[0].contains(kExp01));
  EXPECT_LE(b[0].width(), 1e-6);
}

TEST(Reach, HarmonicSingleStepRadius) {
  // Both inputs with bound 0.1, one step from (1, 0).
  InputAffineSystem sys(exprs({"x2", "-x1"}, 2), {{exprs({"1", "0"}, 2), 0.1}, {exprs({"0", "1"}, 2), 0.1}});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(1.0), Interval(0.0)}};
  cfg.step = 0.01;
  cfg.steps = 1;
  cfg.forced_order = 3;
  auto trace = dincl::evolve(cfg);
  EXPECT_EQ(trace.diagnostics[0][0].order, dincl::ErrorOrder::O3_Additive);
  EXPECT_NEAR(dincl::radius(final_box(trace.final_sets()[0])), 0.00100759, 0.00100759 * 0.05);
}

TEST(Reach, ForcedOrderIsHonored) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(1.0), Interval(0.0)}};
  cfg.step = 0.1;
  cfg.steps = 2;
  cfg.scheme = SchemeKind::Constant;
  cfg.forced_order = 2;
  auto trace = dincl::evolve(cfg);
  for (const auto& d : trace.diagnostics) EXPECT_EQ(d[0].order, dincl::ErrorOrder::O2_Constant);
  cfg.forced_order = 3;
  EXPECT_THROW(dincl::evolve(cfg), dincl::InapplicableError);
}

TEST(Reach, RegionExceeded) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(0.9, 1.1), Interval(-0.1, 0.1)}};
  cfg.step = 0.1;
  cfg.steps = 20;
  cfg.region = Box{Interval(-1.2, 1.2), Interval(-0.3, 0.3)};
  EXPECT_THROW(dincl::evolve(cfg), dincl::RegionExceededError);
}

TEST(Reach, ConfigValidation) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(1.0), Interval(0.0)}};
  EXPECT_THROW(dincl::evolve(cfg), std::invalid_argument);  // no steps
  cfg.step = 0.1;
  cfg.steps = 2;
  cfg.max_params = 1;
  EXPECT_THROW(dincl::evolve(cfg), std::invalid_argument);
  cfg.max_params = 0;
  cfg.region = Box{Interval(2, 3), Interval(0, 1)};
  EXPECT_THROW(dincl::evolve(cfg), std::invalid_argument);
  cfg.region.reset();
  cfg.splits = {{0.1, 5}};
  EXPECT_THROW(dincl::evolve(cfg), std::invalid_argument);
  cfg.splits.clear();
  cfg.grid = {0.0, 0.2, 0.1};
  EXPECT_THROW(dincl::evolve(cfg), std::invalid_argument);
}

TEST(Reach, ExplicitGrid) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(1.0), Interval(0.0)}};
  cfg.grid = {0.0, 0.1, 0.15, 0.3};
  auto trace = dincl::evolve(cfg);
  EXPECT_EQ(trace.times, cfg.grid);
  EXPECT_DOUBLE_EQ(trace.diagnostics[1][0].t1 - trace.diagnostics[1][0].t0, 0.05);
}

TEST(Reach, SplitScheduleDoublesBranches) {
  auto cfg = vdp_config(0.01, 0.1);
  cfg.splits = {{0.03, 0}, {0.06, 1}};
  auto trace = dincl::evolve(cfg);
  std::vector<std::size_t> expected{1, 1, 1, 1, 2, 2, 2, 4, 4, 4, 4};
  ASSERT_EQ(trace.sets.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(trace.sets[k].size(), expected[k]) << k;
  for (std::size_t k = 1; k < trace.times.size(); ++k) EXPECT_GT(trace.times[k], trace.times[k - 1]);
}

TEST(Reach, BudgetRespectedEveryStep) {
  auto cfg = vdp_config(0.01, 0.2);
  cfg.max_params = 8;
  auto trace = dincl::evolve(cfg);
  for (const auto& d : trace.diagnostics) EXPECT_LE(d[0].parameters, 8u);
  for (const auto& at : trace.sets) EXPECT_LE(at[0].model.front().arity(), 8u);
}

TEST(Reach, StopPredicate) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(1.0), Interval(0.0)}};
  cfg.step = 0.1;
  cfg.steps = 50;
  auto trace = dincl::evolve(cfg, [](const dincl::EvolutionTrace& t) { return t.times.size() > 0 && t.sets.size() == 4; });
  EXPECT_EQ(trace.sets.size(), 4u);
  EXPECT_EQ(trace.times.size(), 4u);
  EXPECT_EQ(trace.diagnostics.size(), 3u);
}

TEST(FinalBox, DiameterAndRadius) {
  Box b{Interval(0, 1), Interval(0, 3)};
  EXPECT_EQ(dincl::diameter(b), 3.0);
  EXPECT_EQ(dincl::radius(b), 1.5);
  EXPECT_EQ(dincl::diameter(Box{Interval(2.0), Interval(-1.0)}), 0.0);
}

TEST(Reduce, BudgetAboveCountIsIdentity) {
  std::mt19937_64 rng(3);
  auto x = random_set(rng, 4);
  auto y = dincl::reduce_parameters(x, 10, 10);
  ASSERT_EQ(y.front().arity(), x.front().arity());
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(y[c].terms(), x[c].terms());
    EXPECT_EQ(y[c].error(), x[c].error());
  }
}

TEST(Reduce, SweepingOneLinearTerm) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}};
  for (int p = 0; p < 5; ++p) d.push_back(Variable{VarRole::Input, 0, 1, p + 1, 0});
  auto dom = dincl::make_domain(d);
  std::vector<dincl::Term> terms{{Monomial::variable(0), 1.0}, {Monomial::variable(5), 0.1}};
  for (int p = 1; p < 5; ++p) terms.push_back({Monomial::variable(p), 0.5});
  VectorModel x{PolynomialModel::from_terms(dom, terms, 0.0)};
  auto y = dincl::reduce_parameters(x, 5, 6, 100);
  EXPECT_EQ(y[0].arity(), 5u);
  EXPECT_EQ(y[0].error(), 0.1);
}

TEST(Reduce, OldParametersGoFirst) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}, Variable{VarRole::Input, 0, 1, 1, 0},
                  Variable{VarRole::Input, 0, 1, 9, 0}};
  auto dom = dincl::make_domain(d);
  VectorModel x{PolynomialModel::from_terms(
      dom, {{Monomial::variable(0), 1.0}, {Monomial::variable(1), 0.5}, {Monomial::variable(2), 0.01}}, 0.0)};
  auto y = dincl::reduce_parameters(x, 2, 10, 3);
  EXPECT_EQ(y[0].error(), 0.5);
  EXPECT_EQ((*y[0].domain())[1].step, 9);
}

TEST(Reduce, DropsUnusedParameters) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}, Variable{VarRole::Input, 0, 1, 1, 0},
                  Variable{VarRole::State, 0, 1, 0, 1}};
  auto dom = dincl::make_domain(d);
  VectorModel x{PolynomialModel::from_terms(dom, {{Monomial::variable(0), 1.0}}, 0.0),
                PolynomialModel::from_terms(dom, {{Monomial{}, 2.0}}, 0.0)};
  auto y = dincl::reduce_parameters(x, 0, 1);
  EXPECT_EQ(y[0].arity(), 2u);  // unused state variables stay
}

TEST(ReduceProperty, SweptSetContainsOriginal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_set(rng, 8);
    auto y = dincl::reduce_parameters(x, 4, 10, 3);
    ASSERT_EQ(y.front().arity(), 4u);
    // Kept variables keep their relative order; find them by identity.
    const auto& dx = *x.front().domain();
    const auto& dy = *y.front().domain();
    std::vector<int> where(dx.size(), -1);
    for (std::size_t j = 0, i = 0; j < dy.size(); ++j) {
      while (!(dx[i] == dy[j])) ++i;
      where[i++] = static_cast<int>(j);
    }
    for (int s = 0; s < 100; ++s) {
      std::vector<double> z(dx.size()), zy(dy.size());
      for (std::size_t v = 0; v < z.size(); ++v) {
        z[v] = u(rng);
        if (where[v] >= 0) zy[where[v]] = z[v];
      }
      std::vector<double> value{x[0].evaluate(z), x[1].evaluate(z)};
      ASSERT_TRUE(inside(y, zy, value));
    }
  }
}

TEST(Recondition, ErrorBecomesParameter) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}};
  auto dom = dincl::make_domain(d);
  VectorModel x{PolynomialModel::from_terms(dom, {{Monomial{}, 1.0}, {Monomial::variable(0), 0.5}}, 0.25),
                PolynomialModel::from_terms(dom, {{Monomial{}, 2.0}}, 1e-15)};
  auto y = dincl::recondition(x, 4, 1e-12);
  ASSERT_EQ(y[0].arity(), 2u);
  EXPECT_EQ(y[0].error(), 0.0);
  EXPECT_EQ(y[0].coefficient(Monomial::variable(1)), 0.25);
  EXPECT_EQ(y[0].range(), x[0].range());
  EXPECT_EQ(y[1].error(), 1e-15);
  EXPECT_EQ((*y[0].domain())[1].role, VarRole::Error);
  EXPECT_EQ((*y[0].domain())[1].step, 4);
}

TEST(Split, IdentityHalves) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}};
  auto dom = dincl::make_domain(d);
  VectorModel x{PolynomialModel::variable(dom, 0)};
  auto [lo, hi] = dincl::split(x, 0);
  EXPECT_EQ(lo[0].range(), Interval(-1, 0));
  EXPECT_EQ(hi[0].range(), Interval(0, 1));
}

TEST(Split, RejectsNonStateAxis) {
  dincl::Domain d{Variable{VarRole::State, 0, 1, 0, 0}, Variable{VarRole::Input, 0, 1, 1, 0}};
  auto dom = dincl::make_domain(d);
  VectorModel x{PolynomialModel::variable(dom, 1)};
  EXPECT_THROW(dincl::split(x, 1), std::invalid_argument);
  EXPECT_EQ(dincl::split_target(x, 0, dincl::SplitMode::Dominant), 1u);
}

TEST(SplitProperty, ChildrenCoverParent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = random_set(rng, 3);
    for (std::size_t axis : {0u, 1u}) {
      auto [lo, hi] = dincl::split(x, axis);
      for (int s = 0; s < 100; ++s) {
        std::vector<double> z(x.front().arity());
        for (auto& zi : z) zi = u(rng);
        std::vector<double> value{x[0].evaluate(z), x[1].evaluate(z)};
        auto zc = z;
        // z = (z' - 1)/2 on the lower half, (z' + 1)/2 on the upper one.
        bool lower = z[axis] <= 0;
        zc[axis] = lower ? 2 * z[axis] + 1 : 2 * z[axis] - 1;
        ASSERT_TRUE(inside(lower ? lo : hi, zc, value));
      }
    }
  }
}

TEST(Poincare, UnitDrift) {
  InputAffineSystem sys(exprs({"1 + 0*x1"}, 1), {});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(-0.05)}};
  cfg.step = 0.01;
  cfg.steps = 10;
  cfg.scheme = SchemeKind::Zero;
  auto trace = dincl::evolve(cfg);
  auto c = dincl::poincare_crossing(trace, 0, 1);
  EXPECT_TRUE(c.time.contains(0.05));
  EXPECT_NEAR(c.time.lower(), 0.04, 1e-12);
  EXPECT_NEAR(c.time.upper(), 0.06, 1e-12);
  EXPECT_TRUE(c.hull[0].contains(0.0));
  EXPECT_TRUE(c.hull[0].subset_of(c.enclosure[0]));
  EXPECT_THROW(dincl::poincare_crossing(trace, 0, -1), dincl::NoCrossingError);
}

TEST(Poincare, FinerStepNarrowsInterval) {
  InputAffineSystem sys(exprs({"x2", "-x1"}, 2), {});
  auto width = [&](double h) {
    EvolutionConfig cfg{.system = sys, .initial = Box{Interval(-1.001, -0.999), Interval(-0.001, 0.001)}};
    cfg.step = h;
    cfg.steps = static_cast<int>(std::lround(2.0 / h));
    cfg.scheme = SchemeKind::Zero;
    auto c = dincl::poincare_crossing(dincl::evolve(cfg), 0, 1);
    EXPECT_TRUE(c.time.contains(std::numbers::pi / 2));
    return c.time.width();
  };
  EXPECT_LT(width(0.025), width(0.05));
}

TEST(ReachProperty, MonteCarloCrossings) {
  InputAffineSystem sys(exprs({"x2", "-x1"}, 2), {{exprs({"0", "1"}, 2), 0.01}});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(-1.001, -0.999), Interval(-0.001, 0.001)}};
  cfg.step = 0.05;
  cfg.steps = 40;
  cfg.scheme = SchemeKind::Affine;
  auto trace = dincl::evolve(cfg);
  dincl::CrossingQuery q{0, 1, dincl::poincare_crossing(trace, 0, 1)};
  auto rep = dincl::monte_carlo_check(cfg, trace, 100, 3, 10, 4, 1e-10, q);
  EXPECT_EQ(rep.crossings, 100);
  EXPECT_EQ(rep.crossing_violations, 0);

  // A crossing interval that misses pi/2 must be caught.
  q.crossing.time = Interval(q.crossing.time.lower(), q.crossing.time.lower() + 1e-3);
  auto bad = dincl::monte_carlo_check(cfg, trace, 100, 3, 10, 4, 1e-10, q);
  EXPECT_GT(bad.crossing_violations, 0);
}

TEST(ReachProperty, HarmonicMonteCarlo) {
  EvolutionConfig cfg{.system = harmonic(0.1), .initial = Box{Interval(0.99, 1.01), Interval(-0.01, 0.01)}};
  cfg.step = 2 * std::numbers::pi / 100;
  cfg.steps = 100;
  auto trace = dincl::evolve(cfg);
  auto rep = dincl::monte_carlo_check(cfg, trace, 50, 21);
  EXPECT_EQ(rep.violations, 0) << rep.worst_excess;
  EXPECT_EQ(rep.checks, 50 * 101);
  EXPECT_TRUE(rep.final_hull.subset_of(final_box(trace.final_sets()[0])));
}

TEST(ReachProperty, VanDerPolMonteCarloWithSplits) {
  auto cfg = vdp_config(0.01, 0.5);
  cfg.splits = {{0.2, 0}, {0.4, 1}};
  auto trace = dincl::evolve(cfg);
  auto rep = dincl::monte_carlo_check(cfg, trace, 50, 22);
  EXPECT_EQ(rep.violations, 0) << rep.worst_excess;
}

TEST(ReachProperty, ZeroNoiseFlowpipe) {
  // Without inputs the trace is a validated flowpipe of the ODE.
  InputAffineSystem sys(exprs({"x2", "-x1 + 2*(1 - x1^2)*x2"}, 2), {});
  EvolutionConfig cfg{.system = sys, .initial = Box{Interval(0.1, 0.105), Interval(1.5, 1.505)}};
  cfg.step = 0.01;
  cfg.steps = 30;
  cfg.scheme = SchemeKind::Zero;
  cfg.max_params = 12;
  cfg.model.max_degree = 3;
  cfg.model.sweep_threshold = 1e-10;
  auto trace = dincl::evolve(cfg);
  for (const auto& d : trace.diagnostics) EXPECT_EQ(d[0].epsilon, 0.0);
  auto rep = dincl::monte_carlo_check(cfg, trace, 30, 23);
  EXPECT_EQ(rep.violations, 0);
}
