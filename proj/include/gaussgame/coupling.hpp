#pragma once

// Three Phi-games on one probability space: terminal fields F, G, H driven by
// W, W~ and W_bar = lambda W + mu W~, where W and W~ have componentwise
// correlation rho = (1 - lambda^2 - mu^2) / (2 lambda mu). The minimizing
// player of the H game picks beta (from X_bar); the F and G games reuse it,
// and the H game is played with alpha_h = lambda alpha_f + mu alpha_g, so
// X_bar = lambda X_f + mu X_g along every path. If
//   lambda F(x) + mu G(y) <= H(lambda x + mu y)
// then lambda P_f + mu P_g <= P_h path by path: the running costs cancel.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "gaussgame/envelope.hpp"
#include "gaussgame/errors.hpp"
#include "gaussgame/game_engine.hpp"
#include "gaussgame/games.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

// Throws AdmissibilityError naming the first violated condition.
inline void check_borell_admissible(double lambda, double mu) {
  if (!(lambda >= 0.0 && mu >= 0.0)) throw AdmissibilityError("lambda >= 0 and mu >= 0", lambda, mu);
  if (!(lambda + mu >= 1.0)) throw AdmissibilityError("lambda + mu >= 1", lambda, mu);
  if (!(std::abs(lambda - mu) <= 1.0)) throw AdmissibilityError("|lambda - mu| <= 1", lambda, mu);
}

// Correlation making lambda W + mu W~ a standard Brownian motion. When one
// coefficient vanishes the other is 1 and any rho works; we take rho = 1.
inline double borell_rho(double lambda, double mu) {
  check_borell_admissible(lambda, mu);
  if (lambda == 0.0 || mu == 0.0) return 1.0;
  return std::clamp((1.0 - lambda * lambda - mu * mu) / (2.0 * lambda * mu), -1.0, 1.0);
}

struct CoupledGames {
  double lambda = 0.0, mu = 0.0, rho = 0.0;
  std::vector<GameEstimate> estimates;  // J_F on W, J~_G on W~, J_bar_H on W_bar
  std::vector<double> values;           // v_F(0,0), v_G(0,0), v_H(0,0) by quadrature
  SampleStats combination;              // lambda P_f + mu P_g - P_h
  double max_combination = -std::numeric_limits<double>::infinity();
  double max_state_gap = 0.0;           // max |X_bar - (lambda X_f + mu X_g)| at t = 1
};

// fields = {F, G, H}, real valued (the Phi-game terminals).
inline CoupledGames coupled_payoffs(const std::vector<ScalarField>& fields, double lambda, double mu,
                                    const GameConfig& cfg) {
  if (fields.size() != 3) throw PreconditionError("coupled games need three fields F, G, H");
  const std::size_t n = fields[0].dimension();
  for (const auto& f : fields) {
    if (f.dimension() != n) throw PreconditionError("coupled games: fields must share a dimension");
  }
  cfg.validate();
  CoupledGames out;
  out.lambda = lambda;
  out.mu = mu;
  out.rho = borell_rho(lambda, mu);

  GameConfig own = cfg;
  own.c.reset();  // each game gets its own Isaacs constant
  std::vector<PhiGame> games;
  for (const auto& f : fields) {
    games.push_back(make_phi_game(f, own));
    out.values.push_back(games.back().v00);
  }

  const std::size_t paths = cfg.paths, steps = cfg.steps();
  const double dt = cfg.dt;
  std::vector<double> pf(paths), pg(paths), ph(paths), comb(paths), gap(paths), disc(paths);
  for_each_path(paths, cfg.threads, [&](std::size_t p) {
    auto sf = games[0].strategy()(), sg = games[1].strategy()();
    auto rh = games[2].responder(dt, dt)();
    NormalSampler rng(RngStream(cfg.seed, p));
    std::vector<double> w(n, 0.0), wt(n, 0.0), wb(n, 0.0), xf(n), xg(n), xb(n);
    std::vector<double> df(n, 0.0), dg(n, 0.0), db(n, 0.0);
    std::vector<double> b(n), af(n), ag(n), dw(n), dwt(n);
    double log_d = 0.0, run_f = 0.0, run_g = 0.0, run_h = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t i = 0; i < n; ++i) {
        xf[i] = w[i] + df[i];
        xg[i] = wt[i] + dg[i];
        xb[i] = wb[i] + db[i];
      }
      rh->control({k, t, dt, wb, xb}, b);
      sf->respond({k, t, dt, w, xf}, b, af);
      sg->respond({k, t, dt, wt, xg}, b, ag);
      const double d = std::exp(log_d);
      double ib_f = 0.0, ib_g = 0.0, ib_h = 0.0, b2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ah = lambda * af[i] + mu * ag[i];
        ib_f += af[i] * b[i];
        ib_g += ag[i] * b[i];
        ib_h += ah * b[i];
        b2 += b[i] * b[i];
      }
      run_f += d * ib_f * dt;
      run_g += d * ib_g * dt;
      run_h += d * ib_h * dt;
      log_d -= 0.5 * b2 * dt;
      correlated_increments(out.rho, dt, rng, dw, dwt);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] += dw[i];
        wt[i] += dwt[i];
        wb[i] += lambda * dw[i] + mu * dwt[i];
        df[i] += af[i] * dt;
        dg[i] += ag[i] * dt;
        db[i] += (lambda * af[i] + mu * ag[i]) * dt;
      }
    }
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xf[i] = w[i] + df[i];
      xg[i] = wt[i] + dg[i];
      xb[i] = wb[i] + db[i];
      g = std::max(g, std::abs(xb[i] - (lambda * xf[i] + mu * xg[i])));
    }
    const double D = std::exp(log_d);
    pf[p] = run_f + D * fields[0](xf);
    pg[p] = run_g + D * fields[1](xg);
    ph[p] = run_h + D * fields[2](xb);
    if (!std::isfinite(pf[p] + pg[p] + ph[p])) throw NumericalError("NaN payoff on coupled path " + std::to_string(p));
    comb[p] = lambda * pf[p] + mu * pg[p] - ph[p];
    gap[p] = g;
    disc[p] = D;
  });

  for (const auto* v : {&pf, &pg, &ph}) {
    GameEstimate e;
    const auto s = sample_stats(*v);
    e.mean = s.mean;
    e.std_error = s.std_error;
    e.paths = paths;
    e.steps = steps;
    const auto ds = sample_stats(disc);
    e.discount_mean = ds.mean;
    e.discount_se = ds.std_error;
    out.estimates.push_back(e);
  }
  out.combination = sample_stats(comb);
  for (std::size_t p = 0; p < paths; ++p) {
    out.max_combination = std::max(out.max_combination, comb[p]);
    out.max_state_gap = std::max(out.max_state_gap, gap[p]);
  }
  return out;
}

// Phi-game terminals for the Borell coupling of probability fields f, g on R:
// Phi^{-1} f, Phi^{-1} g and a cubic table of the probit envelope. The table
// is lifted by `lift` plus its largest measured shortfall against the exact
// envelope at interior points of each cell (kinks make cubic tables dip).
inline std::vector<ScalarField> borell_game_fields(const ScalarField& f, const ScalarField& g, double lambda, double mu,
                                                   double half_width = 8.0, double dx = 0.01, double lift = 1e-6,
                                                   EnvelopeOptions opt = {}) {
  check_borell_admissible(lambda, mu);
  if (f.dimension() != 1 || g.dimension() != 1) throw PreconditionError("Borell game fields: one dimension only");
  const auto probit = Transform::probit();
  const auto H = fields::transformed(Envelope::two_coefficient(f, g, lambda, mu, opt).field(), probit);
  const auto table = fields::tabulated(H, -half_width, half_width, dx);
  double shortfall = 0.0;
  for (double z = -half_width; z < half_width; z += dx) {
    for (double s : {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}) {
      const double x = z + s * dx;
      shortfall = std::max(shortfall, H(std::span<const double>(&x, 1)) - table(std::span<const double>(&x, 1)));
    }
  }
  return {fields::transformed(f, probit), fields::transformed(g, probit),
          fields::tabulated(H, -half_width, half_width, dx, lift + shortfall)};
}

}  // namespace gaussgame
