#pragma once

// Concrete strategies and responders for the game engine: the closed-form
// optimal pair, the block-frozen responder, fixed heuristic batteries, and a
// replay audit for causality.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/game_engine.hpp"
#include "gaussgame/game_value.hpp"

namespace gaussgame {

class ZeroStrategy final : public Strategy {
 public:
  void respond(const StepContext&, std::span<const double>, std::span<double> alpha) override {
    std::fill(alpha.begin(), alpha.end(), 0.0);
  }
};

class ConstantStrategy final : public Strategy {
 public:
  explicit ConstantStrategy(std::vector<double> a) : a_(std::move(a)) {}
  void respond(const StepContext&, std::span<const double>, std::span<double> alpha) override {
    std::copy(a_.begin(), a_.end(), alpha.begin());
  }

 private:
  std::vector<double> a_;
};

// alpha_k = (c - v(t_k, X_k)) grad v(t_k, X_k) + beta_gain * beta_k, with X the
// controlled state. For J_f, beta_gain = c gives the strategy
// alpha~*(beta) = alpha*(beta) + c beta; for the projected payoff
// beta_gain = 0 and the engine adds kappa * beta to the drift.
class OptimalStrategy final : public Strategy {
 public:
  OptimalStrategy(std::shared_ptr<const GameValue> v, double c, double beta_gain)
      : v_(std::move(v)), c_(c), beta_gain_(beta_gain), g_(v_->dimension()) {}

  void respond(const StepContext& ctx, std::span<const double> beta, std::span<double> alpha) override {
    const double v = v_->evaluate(ctx.t, ctx.x, g_);
    for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = (c_ - v) * g_[i] + beta_gain_ * beta[i];
  }

 private:
  std::shared_ptr<const GameValue> v_;
  double c_, beta_gain_;
  std::vector<double> g_;
};

// beta frozen on blocks [j delta, (j+1) delta) at -grad v(j delta, X_{j delta}).
class DiscreteResponder final : public Responder {
 public:
  DiscreteResponder(std::shared_ptr<const GameValue> v, double delta, double dt)
      : v_(std::move(v)), held_(v_->dimension(), 0.0) {
    block_ = block_steps(delta, dt);
  }

  // Number of simulation steps per block; delta must be 1/N and a multiple of dt.
  static std::size_t block_steps(double delta, double dt) {
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("delta must lie in (0, 1]");
    const double inv = 1.0 / delta;
    if (std::abs(inv - std::nearbyint(inv)) > 1e-9 * inv) {
      throw PreconditionError("delta = " + std::to_string(delta) + " is not 1/N");
    }
    const double r = delta / dt;
    const double rr = std::nearbyint(r);
    if (rr < 1.0 || std::abs(r - rr) > 1e-9 * r) {
      throw PreconditionError("delta = " + std::to_string(delta) + " is not a multiple of dt = " + std::to_string(dt));
    }
    return static_cast<std::size_t>(rr);
  }

  void control(const StepContext& ctx, std::span<double> beta) override {
    if (ctx.step % block_ == 0) {
      v_->evaluate(ctx.t, ctx.x, held_);
      for (double& h : held_) h = -h;
    }
    std::copy(held_.begin(), held_.end(), beta.begin());
  }

  std::size_t block() const noexcept { return block_; }

 private:
  std::shared_ptr<const GameValue> v_;
  std::vector<double> held_;
  std::size_t block_ = 1;
};

// Arbitrary feedback responder beta_k = fn(ctx).
class FunctionResponder final : public Responder {
 public:
  using Fn = std::function<void(const StepContext&, std::span<double>)>;
  explicit FunctionResponder(Fn fn) : fn_(std::move(fn)) {}
  void control(const StepContext& ctx, std::span<double> beta) override { fn_(ctx, beta); }

 private:
  Fn fn_;
};

// Arbitrary causal strategy alpha_k = fn(ctx, beta_k).
class FunctionStrategy final : public Strategy {
 public:
  using Fn = std::function<void(const StepContext&, std::span<const double>, std::span<double>)>;
  explicit FunctionStrategy(Fn fn) : fn_(std::move(fn)) {}
  void respond(const StepContext& ctx, std::span<const double> beta, std::span<double> alpha) override {
    fn_(ctx, beta, alpha);
  }

 private:
  Fn fn_;
};

// Replays a fixed per-step sequence (step-major, n per step).
class ScriptedResponder final : public Responder {
 public:
  explicit ScriptedResponder(std::vector<double> script) : script_(std::move(script)) {}
  void control(const StepContext& ctx, std::span<double> beta) override {
    const std::size_t n = beta.size();
    if ((ctx.step + 1) * n > script_.size()) throw PreconditionError("scripted responder ran out of steps");
    std::copy_n(script_.begin() + static_cast<std::ptrdiff_t>(ctx.step * n), n, beta.begin());
  }

 private:
  std::vector<double> script_;
};

template <class T, class... Args>
StrategyFactory strategy_factory(Args... args) {
  return [=] { return std::unique_ptr<Strategy>(std::make_unique<T>(args...)); };
}

template <class T, class... Args>
ResponderFactory responder_factory(Args... args) {
  return [=] { return std::unique_ptr<Responder>(std::make_unique<T>(args...)); };
}

inline StrategyFactory optimal_strategy(std::shared_ptr<const GameValue> v, double c) {
  return strategy_factory<OptimalStrategy>(std::move(v), c, c);
}

inline ResponderFactory discrete_responder(std::shared_ptr<const GameValue> v, double delta, double dt) {
  DiscreteResponder::block_steps(delta, dt);
  return responder_factory<DiscreteResponder>(std::move(v), delta, dt);
}

// --- Heuristic batteries -----------------------------------------------------

inline constexpr const char* kBatteryVersion = "battery-v1";

struct NamedResponder {
  std::string name;
  ResponderFactory make;
};

struct NamedStrategy {
  std::string name;
  StrategyFactory make;
};

// Twenty opponent controls used to try to push the optimal strategy below
// v(0,0): constants, sinusoids, gradient chasers and bang-bang switches.
inline std::vector<NamedResponder> adversary_battery(std::shared_ptr<const GameValue> v) {
  std::vector<NamedResponder> out;
  auto fill = [](std::span<double> b, double s) { std::fill(b.begin(), b.end(), s); };
  for (double k : {0.0, 0.5, -0.5, 1.5, -1.5}) {
    out.push_back({"constant(" + std::to_string(k) + ")", responder_factory<FunctionResponder>(
                                                             FunctionResponder::Fn([k, fill](const StepContext&, std::span<double> b) { fill(b, k); }))});
  }
  for (auto [amp, freq] : {std::pair{1.0, 1.0}, std::pair{1.0, 3.0}, std::pair{2.0, 0.5}, std::pair{0.5, 8.0}}) {
    out.push_back({"sinusoid(" + std::to_string(amp) + "," + std::to_string(freq) + ")",
                   responder_factory<FunctionResponder>(FunctionResponder::Fn(
                       [amp, freq, fill](const StepContext& ctx, std::span<double> b) {
                         fill(b, amp * std::sin(2.0 * std::numbers::pi * freq * ctx.t));
                       }))});
  }
  for (double gain : {0.5, 2.0, -1.0, 3.0}) {
    out.push_back({"gradient_chase(" + std::to_string(gain) + ")",
                   responder_factory<FunctionResponder>(FunctionResponder::Fn(
                       [v, gain](const StepContext& ctx, std::span<double> b) {
                         v->evaluate(ctx.t, ctx.x, b);
                         for (double& bi : b) bi *= -gain;
                       }))});
  }
  for (double amp : {1.0, -1.0, 2.0}) {
    out.push_back({"bang_bang_state(" + std::to_string(amp) + ")",
                   responder_factory<FunctionResponder>(FunctionResponder::Fn(
                       [amp](const StepContext& ctx, std::span<double> b) {
                         for (std::size_t i = 0; i < b.size(); ++i) b[i] = ctx.x[i] >= 0.0 ? amp : -amp;
                       }))});
  }
  for (double amp : {1.0, 2.0}) {
    out.push_back({"bang_bang_time(" + std::to_string(amp) + ")",
                   responder_factory<FunctionResponder>(FunctionResponder::Fn(
                       [amp, fill](const StepContext& ctx, std::span<double> b) {
                         fill(b, std::sin(8.0 * std::numbers::pi * ctx.t) >= 0.0 ? amp : -amp);
                       }))});
  }
  out.push_back({"noise_driven(1)", responder_factory<FunctionResponder>(FunctionResponder::Fn(
                                        [](const StepContext& ctx, std::span<double> b) {
                                          for (std::size_t i = 0; i < b.size(); ++i) b[i] = -std::tanh(ctx.w[i]);
                                        }))});
  out.push_back({"late_push(2)", responder_factory<FunctionResponder>(FunctionResponder::Fn(
                                     [fill](const StepContext& ctx, std::span<double> b) { fill(b, ctx.t > 0.7 ? -2.0 : 0.0); }))});
  return out;
}

// Strategies that are not the optimal one, for the sub-optimality check.
inline std::vector<NamedStrategy> heuristic_strategies(std::shared_ptr<const GameValue> v, double c) {
  std::vector<NamedStrategy> out;
  out.push_back({"zero", strategy_factory<ZeroStrategy>()});
  for (double k : {0.5, -0.5}) {
    out.push_back({"constant(" + std::to_string(k) + ")",
                   [k] { return std::unique_ptr<Strategy>(std::make_unique<ConstantStrategy>(std::vector<double>{k})); }});
  }
  out.push_back({"gradient_follow", strategy_factory<FunctionStrategy>(FunctionStrategy::Fn(
                                        [v](const StepContext& ctx, std::span<const double>, std::span<double> a) {
                                          v->evaluate(ctx.t, ctx.x, a);
                                        }))});
  out.push_back({"mirror_beta", strategy_factory<FunctionStrategy>(FunctionStrategy::Fn(
                                    [](const StepContext&, std::span<const double> b, std::span<double> a) {
                                      for (std::size_t i = 0; i < a.size(); ++i) a[i] = -b[i];
                                    }))});
  out.push_back({"wrong_c(" + std::to_string(2.0 * c) + ")", strategy_factory<OptimalStrategy>(v, 2.0 * c, 2.0 * c)});
  out.push_back({"no_beta_feedback", strategy_factory<OptimalStrategy>(v, c, 0.0)});
  return out;
}

// --- Causality audit ---------------------------------------------------------

struct CausalityReport {
  std::size_t checks = 0;
  std::size_t mismatches = 0;
  bool passed() const noexcept { return mismatches == 0; }
};

// For each split step k, plays the strategy against two scripted opponents
// that agree on steps 0..k and differ afterwards, on the same noise. The
// strategy's outputs on steps 0..k must agree bit for bit. Throws
// CausalityError on the first mismatch unless `throw_on_failure` is false.
inline CausalityReport audit_causality(const GameSpec& spec, const StrategyFactory& alpha, const GameConfig& cfg,
                                       const std::vector<std::size_t>& split_steps, std::size_t paths = 4,
                                       bool throw_on_failure = true) {
  detail::check_spec(spec);
  const std::size_t steps = cfg.steps();
  const std::size_t n = spec.dimension;
  CausalityReport rep;
  for (std::size_t p = 0; p < paths; ++p) {
    NormalSampler script_rng(RngStream(cfg.seed ^ 0xca05a1ULL, p));
    std::vector<double> base(steps * n);
    for (double& b : base) b = script_rng();
    for (std::size_t k : split_steps) {
      if (k >= steps) throw PreconditionError("split step beyond the horizon");
      std::vector<double> other = base;
      for (std::size_t j = (k + 1) * n; j < other.size(); ++j) other[j] = -other[j] + 0.25;
      PathTrace t1, t2;
      auto a1 = alpha();
      auto a2 = alpha();
      ScriptedResponder r1(base), r2(other);
      std::unique_ptr<Strategy> x1 = spec.extra ? spec.extra() : nullptr;
      std::unique_ptr<Strategy> x2 = spec.extra ? spec.extra() : nullptr;
      simulate_path(spec, *a1, r1, cfg, p, &t1, x1.get());
      simulate_path(spec, *a2, r2, cfg, p, &t2, x2.get());
      ++rep.checks;
      for (std::size_t j = 0; j < (k + 1) * n; ++j) {
        if (t1.alpha[j] != t2.alpha[j] || t1.alpha_tilde[j] != t2.alpha_tilde[j]) {
          ++rep.mismatches;
          if (throw_on_failure) {
            throw CausalityError("strategy output at step " + std::to_string(j / n) +
                                 " depends on opponent controls after step " + std::to_string(k));
          }
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace gaussgame
