#pragma once

// Monte Carlo simulation of the discretized game
//
//   J = E[ sum_k D_k <P alpha_k, beta_k> dt + D_N f(B X_N) ],
//   D_k = exp(-1/2 sum_{j<k} (|beta_j|^2 + |alpha~_j|^2) dt),
//   X_{k+1} = X_k + (alpha_k + alpha~_k + kappa beta_k) dt + dW_k,
//
// which covers J_f (P = B = I, kappa = 0, no alpha~), the projected payoff
// J^{B,c} (P = B*B, kappa = Phi^{-1}(c)/2) and the three-control example
// (alpha~ present). Within a step the responder moves first, then the
// strategy sees beta_k; the Brownian increment of step k is drawn after both.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/game_value.hpp"
#include "gaussgame/parallel.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

struct GameConfig {
  double dt = 1e-3;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  std::optional<double> c;  // Isaacs constant; default derived from sup f
  std::size_t threads = 1;  // 0 = hardware concurrency

  // Number of steps N with N * dt == 1 (to 1e-12); rejects other dt.
  std::size_t steps() const {
    if (!(dt > 0.0 && dt <= 1.0)) throw PreconditionError("dt must lie in (0, 1]");
    const double r = 1.0 / dt;
    const auto n = static_cast<std::size_t>(std::llround(r));
    if (n == 0 || std::abs(static_cast<double>(n) * dt - 1.0) > 1e-12) {
      throw PreconditionError("dt = " + std::to_string(dt) + " does not divide 1");
    }
    return n;
  }

  void validate() const {
    steps();
    if (paths == 0) throw PreconditionError("paths must be >= 1");
  }
};

struct GameEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t steps = 0;
  double discount_mean = 0.0;  // E[D_N]
  double discount_se = 0.0;
  double running_mean = 0.0;
  double terminal_mean = 0.0;
  bool control_variate = false;
};

// What a control sees at step k: the driver W_{t_k} and the controlled state
// X_{t_k}, both revealed before the step's increment.
struct StepContext {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  std::span<const double> w;
  std::span<const double> x;
};

// The minimizing player's control, produced progressively.
class Responder {
 public:
  virtual ~Responder() = default;
  virtual void control(const StepContext& ctx, std::span<double> beta) = 0;
};

// The maximizing player's causal strategy: alpha_k may use beta_0..beta_k.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual void respond(const StepContext& ctx, std::span<const double> beta, std::span<double> alpha) = 0;
};

using ResponderFactory = std::function<std::unique_ptr<Responder>()>;
using StrategyFactory = std::function<std::unique_ptr<Strategy>()>;

struct GameSpec {
  ScalarField terminal;        // f on R^m
  std::size_t dimension = 1;   // n, dimension of W and of the controls
  std::vector<double> B;       // row-major m x n; empty means identity
  double kappa = 0.0;          // drift gain on beta
  bool project_running = false;  // running cost <B*B alpha, beta> instead of <alpha, beta>
  StrategyFactory extra;       // alpha~, discounted and added to the drift
  std::shared_ptr<const GameValue> control_variate;  // adds -sum D_k <grad v, dW_k>
};

struct PathTrace {
  std::vector<double> alpha, beta, alpha_tilde, dw;  // step-major, n per step
};

struct PathResult {
  double total = 0.0;
  double running = 0.0;
  double terminal = 0.0;
  double discount = 1.0;
  double cv = 0.0;
};

namespace detail {

inline void check_spec(const GameSpec& spec) {
  if (!spec.terminal.valid()) throw PreconditionError("game needs a terminal field");
  if (spec.dimension == 0) throw PreconditionError("game dimension must be positive");
  const std::size_t m = spec.terminal.dimension();
  if (spec.B.empty()) {
    if (m != spec.dimension) throw PreconditionError("terminal field dimension differs from game dimension");
  } else if (spec.B.size() != m * spec.dimension) {
    throw PreconditionError("projection matrix must be m x n");
  }
  if (spec.control_variate && spec.control_variate->dimension() != spec.dimension) {
    throw PreconditionError("control-variate value has the wrong dimension");
  }
}

}  // namespace detail

// One path with seed stream (cfg.seed, path_index).
inline PathResult simulate_path(const GameSpec& spec, Strategy& alpha, Responder& beta, const GameConfig& cfg,
                                std::uint64_t path_index, PathTrace* trace = nullptr,
                                Strategy* alpha_tilde = nullptr) {
  const std::size_t n = spec.dimension;
  const std::size_t m = spec.terminal.dimension();
  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  const double sdt = std::sqrt(dt);
  NormalSampler rng(RngStream(cfg.seed, path_index));

  std::vector<double> w(n, 0.0), drift(n, 0.0), x(n, 0.0), a(n), b(n), at(n, 0.0), pa(n), dw(n), gcv(n);
  std::vector<double> y(m);
  double log_d = 0.0;
  double running = 0.0, running_c = 0.0;
  double cv = 0.0, cv_c = 0.0;
  if (trace) {
    trace->alpha.assign(steps * n, 0.0);
    trace->beta.assign(steps * n, 0.0);
    trace->alpha_tilde.assign(steps * n, 0.0);
    trace->dw.assign(steps * n, 0.0);
  }
  auto kahan = [](double& sum, double& comp, double term) {
    const double yk = term - comp;
    const double tk = sum + yk;
    comp = (tk - sum) - yk;
    sum = tk;
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
    const StepContext ctx{k, t, dt, w, x};
    beta.control(ctx, b);
    alpha.respond(ctx, b, a);
    if (alpha_tilde) alpha_tilde->respond(ctx, b, at);

    // P alpha with P = B*B when the running cost is projected.
    if (spec.project_running && !spec.B.empty()) {
      std::fill(pa.begin(), pa.end(), 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        double ba = 0.0;
        for (std::size_t j = 0; j < n; ++j) ba += spec.B[r * n + j] * a[j];
        for (std::size_t j = 0; j < n; ++j) pa[j] += spec.B[r * n + j] * ba;
      }
    } else {
      std::copy(a.begin(), a.end(), pa.begin());
    }

    const double d = std::exp(log_d);
    double inner = 0.0, b2 = 0.0, at2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inner += pa[i] * b[i];
      b2 += b[i] * b[i];
      at2 += at[i] * at[i];
    }
    kahan(running, running_c, d * inner * dt);
    log_d -= 0.5 * (b2 + at2) * dt;

    for (std::size_t i = 0; i < n; ++i) dw[i] = sdt * rng();
    if (spec.control_variate) {
      spec.control_variate->evaluate(t, x, gcv);
      double gd = 0.0;
      for (std::size_t i = 0; i < n; ++i) gd += gcv[i] * dw[i];
      kahan(cv, cv_c, d * gd);
    }
    if (trace) {
      std::copy(a.begin(), a.end(), trace->alpha.begin() + static_cast<std::ptrdiff_t>(k * n));
      std::copy(b.begin(), b.end(), trace->beta.begin() + static_cast<std::ptrdiff_t>(k * n));
      std::copy(at.begin(), at.end(), trace->alpha_tilde.begin() + static_cast<std::ptrdiff_t>(k * n));
      std::copy(dw.begin(), dw.end(), trace->dw.begin() + static_cast<std::ptrdiff_t>(k * n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += dw[i];
      drift[i] += (a[i] + at[i] + spec.kappa * b[i]) * dt;
    }
    if (!std::isfinite(log_d) || !std::isfinite(running)) {
      throw NumericalError("non-finite payoff at step " + std::to_string(k) + " of path " +
                           std::to_string(path_index));
    }
  }

  for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
  double fval;
  if (spec.B.empty()) {
    fval = spec.terminal(x);
  } else {
    for (std::size_t r = 0; r < m; ++r) {
      y[r] = 0.0;
      for (std::size_t j = 0; j < n; ++j) y[r] += spec.B[r * n + j] * x[j];
    }
    fval = spec.terminal(y);
  }
  PathResult res;
  res.discount = std::exp(log_d);
  res.terminal = res.discount * fval;
  res.running = running;
  res.cv = cv;
  res.total = running + res.terminal - cv;
  if (!std::isfinite(res.total)) throw NumericalError("NaN payoff on path " + std::to_string(path_index));
  return res;
}

template <class Fn>
void for_each_path(std::size_t paths, std::size_t threads, Fn&& fn) {
  for_each_index(paths, threads, std::forward<Fn>(fn));
}

// Mean and standard error of per-path samples, accumulated in path order.
struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

inline SampleStats sample_stats(std::span<const double> xs) {
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  const double var = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  return {mean, k > 0 ? std::sqrt(var / static_cast<double>(k)) : 0.0};
}

inline GameEstimate play(const GameSpec& spec, const StrategyFactory& alpha, const ResponderFactory& beta,
                         const GameConfig& cfg) {
  detail::check_spec(spec);
  cfg.validate();
  if (!alpha || !beta) throw PreconditionError("game needs a strategy and a responder factory");
  const std::size_t paths = cfg.paths;
  std::vector<double> total(paths), disc(paths), run(paths), term(paths);
  for_each_path(paths, cfg.threads, [&](std::size_t p) {
    auto a = alpha();
    auto b = beta();
    std::unique_ptr<Strategy> at = spec.extra ? spec.extra() : nullptr;
    const PathResult r = simulate_path(spec, *a, *b, cfg, p, nullptr, at.get());
    total[p] = r.total;
    disc[p] = r.discount;
    run[p] = r.running;
    term[p] = r.terminal;
  });
  GameEstimate est;
  const auto s = sample_stats(total);
  est.mean = s.mean;
  est.std_error = s.std_error;
  est.paths = paths;
  est.steps = cfg.steps();
  const auto ds = sample_stats(disc);
  est.discount_mean = ds.mean;
  est.discount_se = ds.std_error;
  est.running_mean = sample_stats(run).mean;
  est.terminal_mean = sample_stats(term).mean;
  est.control_variate = static_cast<bool>(spec.control_variate);
  return est;
}

// J_f[alpha, beta].
inline GameEstimate payoff_J(const ScalarField& f, const StrategyFactory& alpha, const ResponderFactory& beta,
                             const GameConfig& cfg) {
  GameSpec spec;
  spec.terminal = f;
  spec.dimension = f.dimension();
  return play(spec, alpha, beta, cfg);
}

// B B* = I_m to within tol (row-major m x n).
inline double coisometry_defect(std::span<const double> B, std::size_t m, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += B[i * n + k] * B[j * n + k];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// J^{B,c}_f[alpha, beta] for f <= 0 on R^m and a co-isometry B: R^n -> R^m.
inline GameEstimate payoff_J_projected(const ScalarField& f, const std::vector<double>& B, std::size_t n, double c,
                                       const StrategyFactory& alpha, const ResponderFactory& beta,
                                       const GameConfig& cfg) {
  const std::size_t m = f.dimension();
  if (B.size() != m * n) throw PreconditionError("B must be an m x n matrix");
  if (const double d = coisometry_defect(B, m, n); d > 1e-12) {
    throw FrameError("B B* differs from the identity by " + std::to_string(d));
  }
  if (f.hi() > 0.0) throw PreconditionError("projected payoff needs f <= 0");
  GameSpec spec;
  spec.terminal = f;
  spec.dimension = n;
  spec.B = B;
  spec.kappa = 0.5 * phi_inv(c);
  spec.project_running = true;
  return play(spec, alpha, beta, cfg);
}

// Three-control payoff: discount exp(-1/2 int |alpha~|^2 + |beta|^2), drift
// alpha + alpha~. With alpha~ = 0 the arithmetic is the same as payoff_J.
inline GameEstimate payoff_nonconvex_example(const ScalarField& f, const StrategyFactory& alpha,
                                             const StrategyFactory& alpha_tilde, const ResponderFactory& beta,
                                             const GameConfig& cfg) {
  if (f.lo() < 0.0) throw PreconditionError("three-control example needs f >= 0");
  GameSpec spec;
  spec.terminal = f;
  spec.dimension = f.dimension();
  spec.extra = alpha_tilde;
  return play(spec, alpha, beta, cfg);
}

}  // namespace gaussgame
