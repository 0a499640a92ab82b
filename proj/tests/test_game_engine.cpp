#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

#include "gaussgame/games.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/strategies.hpp"

namespace gg = gaussgame;

namespace {

// int bump(x + a) dgamma_1(x) for bump(0, w, 0, 1), by completing the square.
double bump_mean(double w, double a) {
  const double s2 = 1.0 + w * w;
  return w / std::sqrt(s2) * std::exp(-a * a / (2.0 * s2));
}

gg::GameConfig config(double dt, std::size_t paths, std::uint64_t seed = 3) {
  gg::GameConfig cfg;
  cfg.dt = dt;
  cfg.paths = paths;
  cfg.seed = seed;
  return cfg;
}

gg::ResponderFactory zero_responder() {
  return gg::responder_factory<gg::FunctionResponder>(
      gg::FunctionResponder::Fn([](const gg::StepContext&, std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); }));
}

}  // namespace

TEST(GameConfig, RejectsStepsThatDoNotDivideOne) {
  EXPECT_THROW(config(0.3, 10).validate(), gg::PreconditionError);
  EXPECT_THROW(config(0.0, 10).validate(), gg::PreconditionError);
  EXPECT_THROW(config(0.01, 0).validate(), gg::PreconditionError);
  EXPECT_EQ(config(1.0 / 1024, 1).steps(), 1024u);
  EXPECT_EQ(config(1e-3, 1).steps(), 1000u);
}

TEST(GameEngine, UncontrolledGameIsGaussianIntegral) {
  const double w = 0.7;
  const auto f = gg::fields::bump(0.0, w);
  const auto est = gg::payoff_J(f, gg::strategy_factory<gg::ZeroStrategy>(), zero_responder(), config(0.05, 20000));
  EXPECT_NEAR(est.mean, bump_mean(w, 0.0), 3.0 * est.std_error);
  EXPECT_DOUBLE_EQ(est.discount_mean, 1.0);
  EXPECT_EQ(est.running_mean, 0.0);
}

TEST(GameEngine, ConstantDriftShiftsTheTerminalPoint) {
  const double w = 0.7, a = 0.8;
  const auto f = gg::fields::bump(0.0, w);
  const auto est = gg::payoff_J(f, [a] { return std::unique_ptr<gg::Strategy>(new gg::ConstantStrategy({a})); },
                                zero_responder(), config(0.05, 20000));
  EXPECT_NEAR(est.mean, bump_mean(w, a), 3.0 * est.std_error);
}

TEST(GameEngine, ConstantFieldGivesZeroGapAndExactPayoff) {
  const auto cfg = config(0.01, 200);
  const auto g = gg::make_phi_game(gg::ScalarField::constant(1, 0.5), cfg);
  const auto est = gg::payoff_J(g.vf->field(), g.strategy(), g.responder(cfg.dt, cfg.dt), cfg);
  EXPECT_DOUBLE_EQ(est.mean, 0.5);
  EXPECT_EQ(est.std_error, 0.0);
  const auto tab = gg::lower_bound_gap(g, g.strategy(), {0.5, 0.25, 0.05}, cfg);
  for (const auto& r : tab.rows) EXPECT_NEAR(r.gap, 0.0, 1e-15);
}

TEST(GameEngine, OptimalPairReproducesTheValue) {
  const auto cfg = config(1.0 / 200, 4000);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  const auto est = gg::payoff_J(f, g.strategy(), g.responder(cfg.dt, cfg.dt), cfg);
  EXPECT_NEAR(est.mean, g.v00, 3.0 * est.std_error + 0.01);
  EXPECT_GT(est.discount_mean, 0.0);
  EXPECT_LT(est.discount_mean, 1.0);
}

TEST(GameEngine, SignFlipMirrorsTheValue) {
  // Phi^{-1}(1 - u) = -Phi^{-1}(u) and x -> -x is measure preserving.
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto mf = gg::fields::bump(0.3, 0.6, 0.0, -1.0);
  gg::ValueFunction vf(f), vm(mf);
  for (double x : {-1.0, 0.0, 0.4, 2.0}) EXPECT_NEAR(vm.value(0.25, x), -vf.value(0.25, x), 1e-12);
}

TEST(GameValue, TableAgreesWithPointwiseQuadrature) {
  const auto f = gg::fields::bump(0.2, 0.5);
  auto vf = std::make_shared<const gg::ValueFunction>(f);
  const double dt = 1.0 / 64;
  gg::TabulatedValue tab(vf, dt);
  gg::PointwiseValue pw(vf);
  gg::NormalSampler rng(gg::RngStream(9, 0));
  double worst_v = 0.0, worst_g = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double t = static_cast<double>(i % 64) * dt;
    const double x = 2.0 * rng();
    double g1 = 0.0, g2 = 0.0;
    const double v1 = tab.evaluate(t, std::span<const double>(&x, 1), std::span<double>(&g1, 1));
    const double v2 = pw.evaluate(t, std::span<const double>(&x, 1), std::span<double>(&g2, 1));
    worst_v = std::max(worst_v, std::abs(v1 - v2));
    worst_g = std::max(worst_g, std::abs(g1 - g2));
  }
  EXPECT_LT(worst_v, 1e-6);
  EXPECT_LT(worst_g, 1e-4);
  // Off the time grid the table defers to quadrature.
  double g = 0.0, x = 0.1;
  EXPECT_DOUBLE_EQ(tab.evaluate(0.3, std::span<const double>(&x, 1), std::span<double>(&g, 1)), vf->value(0.3, x));
}

TEST(Responder, FirstBlockIsMinusGradientAtOrigin) {
  const auto cfg = config(1.0 / 100, 1);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  double g0 = 0.0, zero = 0.0;
  g.value->evaluate(0.0, std::span<const double>(&zero, 1), std::span<double>(&g0, 1));
  gg::GameSpec spec;
  spec.terminal = f;
  for (auto alpha : {g.strategy(), gg::strategy_factory<gg::ConstantStrategy>(std::vector<double>{3.0})}) {
    auto a = alpha();
    gg::DiscreteResponder r(g.value, 0.25, cfg.dt);
    gg::PathTrace tr;
    gg::simulate_path(spec, *a, r, cfg, 0, &tr);
    for (std::size_t k = 0; k < 25; ++k) EXPECT_EQ(tr.beta[k], -g0);
    // Frozen within each later block.
    for (std::size_t k = 25; k < 100; ++k) EXPECT_EQ(tr.beta[k], tr.beta[k - k % 25]);
  }
}

TEST(Responder, BlockOfOneStepIsThePerStepFeedback) {
  const auto cfg = config(1.0 / 100, 1);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  gg::GameSpec spec;
  spec.terminal = f;
  auto v = g.value;
  gg::FunctionResponder feedback([v](const gg::StepContext& ctx, std::span<double> b) {
    v->evaluate(ctx.t, ctx.x, b);
    b[0] = -b[0];
  });
  gg::DiscreteResponder block(g.value, cfg.dt, cfg.dt);
  auto a1 = g.strategy()(), a2 = g.strategy()();
  gg::PathTrace t1, t2;
  const auto r1 = gg::simulate_path(spec, *a1, feedback, cfg, 5, &t1);
  const auto r2 = gg::simulate_path(spec, *a2, block, cfg, 5, &t2);
  EXPECT_EQ(t1.beta, t2.beta);
  EXPECT_EQ(r1.total, r2.total);
}

TEST(Responder, DeltaValidation) {
  EXPECT_THROW(gg::DiscreteResponder::block_steps(0.0, 0.01), gg::PreconditionError);
  EXPECT_THROW(gg::DiscreteResponder::block_steps(0.3, 0.01), gg::PreconditionError);
  EXPECT_THROW(gg::DiscreteResponder::block_steps(1.0 / 3, 0.01), gg::PreconditionError);
  EXPECT_THROW(gg::DiscreteResponder::block_steps(1.0 / 256, 1e-3), gg::PreconditionError);
  EXPECT_EQ(gg::DiscreteResponder::block_steps(0.25, 1.0 / 1024), 256u);
  EXPECT_EQ(gg::DiscreteResponder::block_steps(1e-3, 1e-3), 1u);
}

TEST(Causality, ShippedStrategiesPassTheReplayAudit) {
  const auto cfg = config(1.0 / 50, 1);
  const auto f = gg::fields::bump(0.0, 0.8);
  const auto g = gg::make_phi_game(f, cfg);
  gg::GameSpec spec;
  spec.terminal = f;
  const std::vector<std::size_t> splits{0, 7, 25, 49};
  EXPECT_TRUE(gg::audit_causality(spec, g.strategy(), cfg, splits).passed());
  for (const auto& h : gg::heuristic_strategies(g.value, g.c)) {
    EXPECT_TRUE(gg::audit_causality(spec, h.make, cfg, splits).passed()) << h.name;
  }
}

TEST(Causality, AuditFlagsAStrategyWithHiddenState) {
  // Both replays share a counter, so outputs diverge before the split.
  const auto cfg = config(1.0 / 50, 1);
  gg::GameSpec spec;
  spec.terminal = gg::fields::bump(0.0, 0.8);
  auto calls = std::make_shared<int>(0);
  auto cheat = gg::strategy_factory<gg::FunctionStrategy>(gg::FunctionStrategy::Fn(
      [calls](const gg::StepContext&, std::span<const double>, std::span<double> a) { a[0] = (*calls)++; }));
  EXPECT_THROW(gg::audit_causality(spec, cheat, cfg, {10}), gg::CausalityError);
  const auto rep = gg::audit_causality(spec, cheat, cfg, {10, 20}, 2, false);
  EXPECT_EQ(rep.checks, 4u);
  EXPECT_EQ(rep.mismatches, 4u);
}

TEST(Battery, OptimalStrategyHoldsAgainstEveryAdversary) {
  const auto cfg = config(1.0 / 100, 1500);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  const auto battery = gg::adversary_battery(g.value);
  ASSERT_EQ(battery.size(), 20u);
  for (const auto& r : battery) {
    const auto est = gg::payoff_J(f, g.strategy(), r.make, cfg);
    EXPECT_GE(est.mean, g.v00 - 3.0 * est.std_error - 0.01) << r.name;
  }
}

TEST(Battery, HeuristicStrategiesDoNotBeatTheValue) {
  const auto cfg = config(1.0 / 100, 1500);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  const double slack = 0.1 * std::sqrt(cfg.dt);
  for (const auto& h : gg::heuristic_strategies(g.value, g.c)) {
    const auto est = gg::payoff_J(f, h.make, g.responder(cfg.dt, cfg.dt), cfg);
    EXPECT_LE(est.mean, g.v00 + slack + 3.0 * est.std_error) << h.name;
  }
}

TEST(GameEngine, ThreadCountDoesNotChangeTheEstimate) {
  auto cfg = config(1.0 / 50, 600, 17);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  const auto e1 = gg::payoff_J(f, g.strategy(), g.responder(0.1, cfg.dt), cfg);
  cfg.threads = 3;
  const auto e3 = gg::payoff_J(f, g.strategy(), g.responder(0.1, cfg.dt), cfg);
  EXPECT_EQ(std::memcmp(&e1.mean, &e3.mean, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&e1.std_error, &e3.std_error, sizeof(double)), 0);
}

TEST(ProjectedGame, ConstantFieldsGiveTheirValue) {
  const auto cfg = config(1.0 / 50, 50);
  {
    const auto f = gg::ScalarField::constant(1, 0.0);
    const auto g = gg::make_projected_game(f, {1.0}, 1, 0.5, cfg.dt);
    const auto est = gg::payoff_J_projected(f, g.B, 1, 0.5, g.strategy(), g.responder(cfg.dt), cfg);
    EXPECT_EQ(est.mean, 0.0);
  }
  {
    const auto f = gg::ScalarField::constant(1, -0.2);
    const auto g = gg::make_projected_game(f, {1.0, 0.0}, 2, 0.3, cfg.dt);
    EXPECT_NEAR(g.target, -0.2, 1e-12);
    const auto est = gg::payoff_J_projected(f, g.B, 2, 0.3, g.strategy(), g.responder(cfg.dt), cfg);
    EXPECT_DOUBLE_EQ(est.mean, -0.2);
  }
}

TEST(ProjectedGame, OptimalPairReachesTheTransformedMean) {
  const auto cfg = config(1.0 / 200, 3000);
  const auto f = gg::fields::bump(0.2, 0.7, -0.6, 0.0);
  const std::vector<double> B{0.6, 0.8};
  const double c = 0.4;
  const auto g = gg::make_projected_game(f, B, 2, c, cfg.dt);
  // Oracle: Phi_c^{-1}(int Phi_c(f) dgamma_1) by Simpson on [-12, 12].
  const gg::PhiCTransform T(c);
  double s = 0.0;
  const int panels = 20000;
  const double h = 24.0 / panels;
  for (int i = 0; i <= panels; ++i) {
    const double x = -12.0 + i * h;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * T.forward(f(x)) * gg::normal_pdf(x);
  }
  const double oracle = T.inverse(s * h / 3.0);
  // Order-64 Gauss-Hermite is good to ~6e-9 on this field.
  EXPECT_NEAR(g.target, oracle, 1e-8);
  const auto est = gg::payoff_J_projected(f, B, 2, c, g.strategy(), g.responder(cfg.dt), cfg);
  EXPECT_NEAR(est.mean, oracle, 3.0 * est.std_error + 0.01);
}

TEST(ProjectedGame, RejectsNonCoisometryAndPositiveFields) {
  EXPECT_THROW(gg::make_projected_game(gg::ScalarField::constant(1, -0.1), {1.0, 1.0}, 2, 0.5, 0.01), gg::FrameError);
  EXPECT_THROW(gg::make_projected_game(gg::fields::bump(0.0, 1.0), {1.0}, 1, 0.5, 0.01), gg::PreconditionError);
}

TEST(NonconvexExample, ZeroExtraControlIsBitIdenticalToTheBaseGame) {
  const auto cfg = config(1.0 / 50, 300, 23);
  const auto f = gg::fields::bump(0.3, 0.6);
  const auto g = gg::make_phi_game(f, cfg);
  const auto base = gg::payoff_J(f, g.strategy(), g.responder(0.1, cfg.dt), cfg);
  const auto ext =
      gg::payoff_nonconvex_example(f, g.strategy(), gg::strategy_factory<gg::ZeroStrategy>(), g.responder(0.1, cfg.dt), cfg);
  EXPECT_EQ(std::memcmp(&base.mean, &ext.mean, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&base.std_error, &ext.std_error, sizeof(double)), 0);
}

TEST(LowerBound, GapsShrinkWithTheBlockLength) {
  const auto cfg = config(1.0 / 256, 3000, 29);
  const auto g = gg::make_phi_game(gg::fields::bump(0.0, 0.5), cfg);
  const auto tab = gg::lower_bound_gap(g, g.strategy(), {0.25, 1.0 / 16, 1.0 / 64}, cfg);
  ASSERT_EQ(tab.rows.size(), 3u);
  EXPECT_TRUE(tab.non_increasing);
  EXPECT_EQ(tab.fitted_points, 3u);
  EXPECT_GE(tab.slope, 0.3);
  EXPECT_THROW(gg::lower_bound_gap(g, g.strategy(), {0.25, 0.5}, cfg), gg::PreconditionError);
}
