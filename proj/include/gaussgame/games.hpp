#pragma once

// Ready-made game setups (value function + optimal pair) and the
// lower-bound convergence study against block-frozen responders.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/game_engine.hpp"
#include "gaussgame/game_value.hpp"
#include "gaussgame/strategies.hpp"
#include "gaussgame/value_function.hpp"

namespace gaussgame {

struct PhiGame {
  std::shared_ptr<const ValueFunction> vf;
  std::shared_ptr<const GameValue> value;
  double c = 0.0;
  double v00 = 0.0;  // quadrature value v(0, 0)

  StrategyFactory strategy() const { return optimal_strategy(value, c); }
  ResponderFactory responder(double delta, double dt) const { return discrete_responder(value, delta, dt); }
};

// Phi-game for f. c defaults to max(sup f)/2 + 0.01.
inline PhiGame make_phi_game(const ScalarField& f, const GameConfig& cfg,
                             const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder),
                             bool tabulate = true) {
  PhiGame g;
  g.vf = std::make_shared<const ValueFunction>(f, MeanSpec::phi(), rule);
  g.c = cfg.c ? *cfg.c : g.vf->default_c();
  if (2.0 * g.c < g.vf->sup_estimate()) {
    throw PreconditionError("Isaacs constant too small: need 2c >= sup f (c=" + std::to_string(g.c) + ")");
  }
  g.value = make_game_value(g.vf, cfg.dt, tabulate, cfg.threads);
  const std::vector<double> zero(f.dimension(), 0.0);
  g.v00 = g.vf->value(0.0, zero);
  return g;
}

// s + f for a constant s.
inline ScalarField shifted(const ScalarField& f, double s) {
  ScalarField g(f.dimension(), [f, s](std::span<const double> x) { return s + f(x); }, f.lo() + s, f.hi() + s,
                f.smoothness(), f.description() + "+shift");
  if (f.has_gradient()) g.with_gradient([f](std::span<const double> x, std::span<double> out) { f.gradient(x, out); });
  if (f.lipschitz()) g.with_lipschitz(*f.lipschitz());
  return g;
}

// The projected game: v_g(t, x) = v~(t, Bx) where v~ is the Phi-value of
// g = Phi^{-1}(c) + f on R^m. The optimal strategy is
// (Phi^{-1}(c)/2 - v_g) grad v_g with the engine adding Phi^{-1}(c)/2 * beta.
struct ProjectedGame {
  std::shared_ptr<const ValueFunction> vf;  // of g on R^m
  std::shared_ptr<const GameValue> value;   // v_g on R^n
  std::vector<double> B;
  std::size_t n = 0;
  double c = 0.0;
  double half_shift = 0.0;  // Phi^{-1}(c) / 2
  double target = 0.0;      // Phi_c^{-1}(int Phi_c(f) dgamma_m) by quadrature

  StrategyFactory strategy() const { return strategy_factory<OptimalStrategy>(value, half_shift, 0.0); }
  ResponderFactory responder(double dt) const { return discrete_responder(value, dt, dt); }
};

inline ProjectedGame make_projected_game(const ScalarField& f, std::vector<double> B, std::size_t n, double c,
                                         double dt) {
  const std::size_t m = f.dimension();
  if (B.size() != m * n) throw PreconditionError("B must be an m x n matrix");
  if (const double d = coisometry_defect(B, m, n); d > 1e-12) {
    throw FrameError("B B* differs from the identity by " + std::to_string(d));
  }
  if (f.hi() > 0.0) throw PreconditionError("projected game needs f <= 0");
  ProjectedGame g;
  g.c = c;
  const double s = phi_inv(c);
  g.half_shift = 0.5 * s;
  g.vf = std::make_shared<const ValueFunction>(shifted(f, s));
  g.B = B;
  g.n = n;
  g.value = std::make_shared<ProjectedValue>(make_game_value(g.vf, dt), std::move(B), n);
  const std::vector<double> zero(m, 0.0);
  g.target = g.vf->value(0.0, zero) - s;
  return g;
}

struct ConvergenceRow {
  double delta = 0.0;
  GameEstimate estimate;
  double gap = 0.0;  // payoff - v(0,0)
};

struct ConvergenceTable {
  std::string strategy;
  double value = 0.0;  // v(0,0)
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;      // least-squares slope of log gap on log delta (positive gaps)
  double intercept = 0.0;
  std::size_t fitted_points = 0;
  double sqrt_constant = 0.0;  // max over rows of gap / sqrt(delta)
  bool non_increasing = false;
};

// Plays `alpha` against the block-frozen responder for each delta, on common
// random numbers, with the martingale sum of D_k <grad v, dW_k> removed from
// every path as a control variate (it has mean zero for any adapted controls).
inline ConvergenceTable lower_bound_gap(const PhiGame& game, const StrategyFactory& alpha,
                                        const std::vector<double>& deltas, const GameConfig& cfg,
                                        bool control_variate = true, std::string name = "optimal") {
  if (deltas.empty()) throw PreconditionError("lower_bound_gap needs at least one delta");
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] < deltas[i - 1])) throw PreconditionError("deltas must be strictly decreasing");
  }
  for (double d : deltas) DiscreteResponder::block_steps(d, cfg.dt);
  ConvergenceTable tab;
  tab.strategy = std::move(name);
  tab.value = game.v00;
  GameSpec spec;
  spec.terminal = game.vf->field();
  spec.dimension = spec.terminal.dimension();
  if (control_variate) spec.control_variate = game.value;
  for (double d : deltas) {
    ConvergenceRow row;
    row.delta = d;
    row.estimate = play(spec, alpha, game.responder(d, cfg.dt), cfg);
    row.gap = row.estimate.mean - game.v00;
    tab.rows.push_back(row);
  }
  tab.non_increasing = true;
  for (std::size_t i = 1; i < tab.rows.size(); ++i) {
    if (tab.rows[i].gap > tab.rows[i - 1].gap) tab.non_increasing = false;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (const auto& r : tab.rows) {
    tab.sqrt_constant = std::max(tab.sqrt_constant, r.gap / std::sqrt(r.delta));
    if (r.gap > 0.0) {
      const double lx = std::log(r.delta), ly = std::log(r.gap);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++k;
    }
  }
  tab.fitted_points = k;
  if (k >= 2) {
    const double den = static_cast<double>(k) * sxx - sx * sx;
    tab.slope = (static_cast<double>(k) * sxy - sx * sy) / den;
    tab.intercept = (sy - tab.slope * sx) / static_cast<double>(k);
  }
  return tab;
}

}  // namespace gaussgame
