#pragma once

// Generalized means M_F(f) = F^{-1}(int F(f) dgamma) beyond Phi: the
// Hardy-Littlewood-Polya convexity test, the conjugate R = (-F'/F'')*, the
// Bellman residual for general F, and the control representation
//   K_f[alpha, beta] = E[ G_1 f(W_1 + int alpha)
//                         - 1/2 int G_t R(beta_t) |alpha_t|^2 dt ],
//   G_t = exp(1/2 int_0^t beta_s |alpha_s|^2 ds),
// whose supremum over controls is M_F(f) when F is HLP-convex.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/game_engine.hpp"
#include "gaussgame/game_value.hpp"
#include "gaussgame/mean_spec.hpp"
#include "gaussgame/parallel.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/scalar_field.hpp"
#include "gaussgame/strategies.hpp"
#include "gaussgame/value_function.hpp"

namespace gaussgame {

// --- Convexity test ------------------------------------------------------------

struct HlpVerdict {
  enum class Kind { convex, not_convex, rejected };
  Kind kind = Kind::convex;
  std::optional<double> witness;  // first grid point where the test fails
  std::string reason;

  bool convex() const noexcept { return kind == Kind::convex; }
  const char* name() const noexcept {
    switch (kind) {
      case Kind::convex: return "convex";
      case Kind::not_convex: return "not-convex";
      case Kind::rejected: return "rejected";
    }
    return "?";
  }
};

struct HlpOptions {
  std::size_t points = 2001;
  double tolerance = 1e-9;  // relative slack in the midpoint test
};

// M_F is convex iff F is convex and F'/F'' is concave. F'' <= 0 somewhere
// with a negative value gives not-convex; F'' == 0 everywhere is linear F,
// hence convex; isolated zeros of F'' with F'' >= 0 are rejected.
inline HlpVerdict hlp_check(const MeanSpec& spec, double lo, double hi, HlpOptions opt = {}) {
  if (!(lo < hi)) throw PreconditionError("hlp_check: empty interval");
  if (opt.points < 3) throw PreconditionError("hlp_check: need at least three grid points");
  const std::size_t N = opt.points;
  std::vector<double> x(N), d2(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = i + 1 == N ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(N - 1);
    d2[i] = spec.d2F(x[i]);
  }
  HlpVerdict out;
  const bool any_negative = std::any_of(d2.begin(), d2.end(), [](double v) { return v < 0.0; });
  const std::size_t zeros = static_cast<std::size_t>(std::count(d2.begin(), d2.end(), 0.0));
  if (any_negative) {
    const auto it = std::find_if(d2.begin(), d2.end(), [](double v) { return v <= 0.0; });
    out.kind = HlpVerdict::Kind::not_convex;
    out.witness = x[static_cast<std::size_t>(it - d2.begin())];
    out.reason = "F'' <= 0";
    return out;
  }
  if (zeros == N) {
    out.reason = "F'' vanishes identically (linear F)";
    return out;
  }
  if (zeros > 0) {
    const auto it = std::find(d2.begin(), d2.end(), 0.0);
    out.kind = HlpVerdict::Kind::rejected;
    out.witness = x[static_cast<std::size_t>(it - d2.begin())];
    out.reason = "F'' has isolated zeros";
    return out;
  }
  std::vector<double> r(N);
  for (std::size_t i = 0; i < N; ++i) r[i] = spec.dF(x[i]) / d2[i];
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double mid = 0.5 * (r[i - 1] + r[i + 1]);
    if (r[i] < mid - opt.tolerance * std::max(1.0, std::abs(r[i]))) {
      out.kind = HlpVerdict::Kind::not_convex;
      out.witness = x[i];
      out.reason = "F'/F'' fails the midpoint concavity test";
      return out;
    }
  }
  out.reason = "F'' > 0 and F'/F'' concave";
  return out;
}

inline HlpVerdict hlp_check(const MeanSpec& spec, HlpOptions opt = {}) {
  return hlp_check(spec, spec.lo(), spec.hi(), opt);
}

// --- Conjugate R = (-F'/F'')* ---------------------------------------------------

struct FenchelOptions {
  std::size_t v_points = 10000;
  double truncation = 1e8;         // |v| cap on an unbounded side
  double singular_offset = 1e-12;  // distance kept from a singular endpoint
  double slope_threshold = 1e6;    // outward slope above 1/threshold at a cap means +inf
  int golden_iterations = 100;
};

struct ConjugateTable {
  std::vector<double> b;
  std::vector<double> R;       // +inf where the sup diverges
  std::vector<double> argmax;  // maximizing v (NaN where R = +inf)
  double domain_lo = std::numeric_limits<double>::quiet_NaN();  // first and last finite node
  double domain_hi = std::numeric_limits<double>::quiet_NaN();

  // Exact node value, linear interpolation between finite nodes, else +inf.
  double value(double q) const {
    const double inf = std::numeric_limits<double>::infinity();
    if (b.empty() || !(q >= b.front() && q <= b.back())) return inf;
    const auto it = std::lower_bound(b.begin(), b.end(), q);
    const auto j = static_cast<std::size_t>(it - b.begin());
    if (*it == q) return R[j];
    const double r0 = R[j - 1], r1 = R[j];
    if (!std::isfinite(r0) || !std::isfinite(r1)) return inf;
    const double s = (q - b[j - 1]) / (b[j] - b[j - 1]);
    return (1.0 - s) * r0 + s * r1;
  }

  // Smallest chord excess over consecutive finite triples; >= -1e-8 for a
  // convex table.
  double convexity_defect() const {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < b.size(); ++i) {
      if (!std::isfinite(R[i - 1]) || !std::isfinite(R[i]) || !std::isfinite(R[i + 1])) continue;
      const double h1 = b[i] - b[i - 1], h2 = b[i + 1] - b[i];
      const double chord = (h2 * R[i - 1] + h1 * R[i + 1]) / (h1 + h2);
      worst = std::min(worst, chord - R[i]);
    }
    return worst;
  }

  std::size_t finite_count() const {
    return static_cast<std::size_t>(std::count_if(R.begin(), R.end(), [](double r) { return std::isfinite(r); }));
  }
};

// Uniform grid on [-4, 4] at spacing 1e-3 with 0 and, for power means,
// -1/(p-1) inserted.
inline std::vector<double> default_b_grid(const MeanSpec& spec, double half_width = 4.0, double step = 1e-3) {
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / step));
  std::vector<double> b;
  b.reserve(n + 3);
  for (std::size_t i = 0; i <= n; ++i) {
    b.push_back(static_cast<double>(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n / 2)) * step);
  }
  b.push_back(0.0);
  if (spec.kind() == MeanSpec::Kind::power && spec.param() != 1.0) b.push_back(spec.beta_star(1.0));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

namespace detail {

// asinh-spaced nodes on the natural domain of rho, capped at +-truncation,
// log-spaced away from a singular left endpoint.
inline std::vector<double> conjugate_v_grid(const MeanSpec& spec, const FenchelOptions& opt) {
  const auto dom = spec.rho_domain();
  const std::size_t N = opt.v_points;
  std::vector<double> v(N);
  if (dom.lo_open_singular) {
    const double hi = std::min(dom.hi, opt.truncation);
    const double u0 = std::log(opt.singular_offset), u1 = std::log(hi - dom.lo);
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = dom.lo + std::exp(u0 + (u1 - u0) * static_cast<double>(i) / static_cast<double>(N - 1));
    }
  } else {
    const double lo = std::max(dom.lo, -opt.truncation), hi = std::min(dom.hi, opt.truncation);
    const double u0 = std::asinh(lo), u1 = std::asinh(hi);
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = std::sinh(u0 + (u1 - u0) * static_cast<double>(i) / static_cast<double>(N - 1));
    }
  }
  return v;
}

}  // namespace detail

// R(b) = sup_v { v b + F'(v)/F''(v) } over the v grid, refined by golden
// section around the best node.
inline ConjugateTable fenchel_R(const MeanSpec& spec, std::vector<double> b_grid, FenchelOptions opt = {}) {
  if (const auto h = hlp_check(spec); !h.convex()) {
    throw PreconditionError("fenchel_R needs an HLP-convex mean; '" + spec.name() + "' is " + h.name() +
                            (h.witness ? " (witness x = " + std::to_string(*h.witness) + ")" : ""));
  }
  if (opt.v_points < 3) throw PreconditionError("fenchel_R: need at least three v points");
  std::sort(b_grid.begin(), b_grid.end());
  b_grid.erase(std::unique(b_grid.begin(), b_grid.end()), b_grid.end());
  const auto v = detail::conjugate_v_grid(spec, opt);
  const std::size_t N = v.size();
  std::vector<double> rho(N);
  for (std::size_t i = 0; i < N; ++i) rho[i] = spec.rho(v[i]);
  const auto dom = spec.rho_domain();
  const bool left_cap = !dom.lo_open_singular;
  const double inf = std::numeric_limits<double>::infinity();

  ConjugateTable T;
  T.b = b_grid;
  T.R.resize(b_grid.size());
  T.argmax.resize(b_grid.size());
  for (std::size_t k = 0; k < b_grid.size(); ++k) {
    const double b = b_grid[k];
    auto obj = [&](double x) { return x * b + spec.rho(x); };
    std::size_t best = 0;
    double bv = v[0] * b + rho[0];
    for (std::size_t i = 1; i < N; ++i) {
      const double o = v[i] * b + rho[i];
      if (o > bv) {
        bv = o;
        best = i;
      }
    }
    auto outward_slope = [&](std::size_t e, std::size_t in) {
      return (v[e] * b + rho[e] - (v[in] * b + rho[in])) / std::abs(v[e] - v[in]);
    };
    if ((best == N - 1 && outward_slope(N - 1, N - 2) > 1.0 / opt.slope_threshold) ||
        (best == 0 && left_cap && outward_slope(0, 1) > 1.0 / opt.slope_threshold)) {
      T.R[k] = inf;
      T.argmax[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double lo = v[best == 0 ? 0 : best - 1], hi = v[best + 1 == N ? N - 1 : best + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = obj(x1), f2 = obj(x2);
    for (int it = 0; it < opt.golden_iterations && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = obj(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = obj(x1);
      }
    }
    double arg = v[best];
    if (f1 > bv) bv = f1, arg = x1;
    if (f2 > bv) bv = f2, arg = x2;
    T.R[k] = bv;
    T.argmax[k] = arg;
  }
  for (std::size_t k = 0; k < T.b.size(); ++k) {
    if (std::isfinite(T.R[k])) {
      if (std::isnan(T.domain_lo)) T.domain_lo = T.b[k];
      T.domain_hi = T.b[k];
    }
  }
  return T;
}

inline ConjugateTable fenchel_R(const MeanSpec& spec, FenchelOptions opt = {}) {
  return fenchel_R(spec, default_b_grid(spec), opt);
}

// Fenchel-Young on finite nodes: the largest v b + rho(v) - R(b) over the
// sample v's and nodes b (<= 0 up to refinement error), and the largest gap
// R(b*) - (v b* + rho(v)) at b* = -rho'(v) where b* is inside the domain.
struct FenchelYoung {
  double max_violation = -std::numeric_limits<double>::infinity();
  double max_equality_gap = 0.0;
  std::size_t equality_points = 0;
};

inline FenchelYoung fenchel_young(const MeanSpec& spec, const ConjugateTable& T, std::span<const double> vs) {
  FenchelYoung out;
  for (double v : vs) {
    const double r = spec.rho(v);
    for (std::size_t k = 0; k < T.b.size(); ++k) {
      if (std::isfinite(T.R[k])) out.max_violation = std::max(out.max_violation, v * T.b[k] + r - T.R[k]);
    }
    const double bs = spec.beta_star(v);
    const double Rb = T.value(bs);
    if (std::isfinite(Rb)) {
      out.max_equality_gap = std::max(out.max_equality_gap, std::abs(Rb - (v * bs + r)));
      ++out.equality_points;
    }
  }
  return out;
}

// |dv/dt + Lap v / 2 + (F''/F')(v) |grad v|^2 / 2| for the F-value function.
inline double bellman_residual(const MeanSpec& spec, const ScalarField& f, double t, std::span<const double> x,
                               const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder)) {
  return ValueFunction(f, spec, rule).pde_residual(t, x);
}

inline double bellman_residual(const MeanSpec& spec, const ScalarField& f, double t, double x,
                               const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder)) {
  return bellman_residual(spec, f, t, std::span<const double>(&x, 1), rule);
}

// --- Representation -------------------------------------------------------------

// The pair (alpha_k, beta_k) chosen from the history up to t_k. alpha is
// n-dimensional, beta scalar.
class RepresentationControl {
 public:
  virtual ~RepresentationControl() = default;
  virtual double control(const StepContext& ctx, std::span<double> alpha) = 0;
};

using RepresentationFactory = std::function<std::unique_ptr<RepresentationControl>()>;

class ConstantRepresentation final : public RepresentationControl {
 public:
  ConstantRepresentation(std::vector<double> alpha, double beta) : alpha_(std::move(alpha)), beta_(beta) {}
  double control(const StepContext&, std::span<double> alpha) override {
    if (alpha_.empty()) {
      std::fill(alpha.begin(), alpha.end(), 0.0);
    } else {
      std::copy(alpha_.begin(), alpha_.end(), alpha.begin());
    }
    return beta_;
  }

 private:
  std::vector<double> alpha_;
  double beta_;
};

// alpha* = (F''/F')(v) grad v and beta* = F'F'''/F''^2 - 1 at v(t, X_t), with
// v clamped into the control interval of the mean.
class OptimalRepresentation final : public RepresentationControl {
 public:
  OptimalRepresentation(std::shared_ptr<const GameValue> v, MeanSpec spec)
      : v_(std::move(v)), spec_(std::move(spec)), g_(v_->dimension()) {}

  double control(const StepContext& ctx, std::span<double> alpha) override {
    const double v = std::clamp(v_->evaluate(ctx.t, ctx.x, g_), spec_.control_lo(), spec_.control_hi());
    const double k = spec_.curvature_ratio(v);
    for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = k * g_[i];
    return spec_.beta_star(v);
  }

 private:
  std::shared_ptr<const GameValue> v_;
  MeanSpec spec_;
  std::vector<double> g_;
};

inline RepresentationFactory zero_representation() {
  return [] { return std::unique_ptr<RepresentationControl>(std::make_unique<ConstantRepresentation>(std::vector<double>{}, 0.0)); };
}

// Value function, game value and optimal controls of M_F(f).
struct Representation {
  MeanSpec spec;
  std::shared_ptr<const ValueFunction> vf;
  std::shared_ptr<const GameValue> value;
  double v00 = 0.0;  // M_F(f) by quadrature

  RepresentationFactory optimal() const {
    auto v = value;
    auto s = spec;
    return [v, s] { return std::unique_ptr<RepresentationControl>(std::make_unique<OptimalRepresentation>(v, s)); };
  }
};

inline Representation make_representation(const MeanSpec& spec, const ScalarField& f, const GameConfig& cfg,
                                          const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder),
                                          bool tabulate = true) {
  Representation r{spec, std::make_shared<const ValueFunction>(f, spec, rule), nullptr, 0.0};
  r.value = make_game_value(r.vf, cfg.dt, tabulate, cfg.threads);
  const std::vector<double> zero(f.dimension(), 0.0);
  r.v00 = r.vf->value(0.0, zero);
  return r;
}

namespace detail {

inline void kahan_add(double& sum, double& comp, double term) {
  const double y = term - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

inline GameEstimate summarize(std::span<const double> total, std::span<const double> growth,
                              std::span<const double> run, std::span<const double> term, std::size_t steps) {
  GameEstimate e;
  const auto s = sample_stats(total);
  e.mean = s.mean;
  e.std_error = s.std_error;
  e.paths = total.size();
  e.steps = steps;
  const auto g = sample_stats(growth);
  e.discount_mean = g.mean;
  e.discount_se = g.std_error;
  e.running_mean = sample_stats(run).mean;
  e.terminal_mean = sample_stats(term).mean;
  return e;
}

}  // namespace detail

// K_f[alpha, beta] with R supplied as a function (+inf allowed). A step with
// alpha != 0 and R(beta) = +inf rejects the control.
inline GameEstimate payoff_K(const MeanSpec& spec, const ScalarField& f, const RepresentationFactory& controls,
                             const std::function<double(double)>& R, const GameConfig& cfg) {
  if (const auto h = hlp_check(spec); !h.convex()) {
    throw PreconditionError("payoff_K needs an HLP-convex mean; '" + spec.name() + "' is " + h.name());
  }
  if (f.lo() < spec.lo() || f.hi() > spec.hi()) {
    throw RangeError("field range leaves the interval of mean '" + spec.name() + "'");
  }
  if (!controls || !R) throw PreconditionError("payoff_K needs controls and R");
  cfg.validate();
  const std::size_t n = f.dimension(), steps = cfg.steps(), paths = cfg.paths;
  const double dt = cfg.dt, sdt = std::sqrt(dt);
  std::vector<double> total(paths), growth(paths), run(paths), term(paths);
  for_each_path(paths, cfg.threads, [&](std::size_t p) {
    auto ctl = controls();
    NormalSampler rng(RngStream(cfg.seed, p));
    std::vector<double> w(n, 0.0), drift(n, 0.0), x(n), a(n);
    double log_g = 0.0, running = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
      const double beta = ctl->control({k, t, dt, w, x}, a);
      double a2 = 0.0;
      for (double ai : a) a2 += ai * ai;
      if (a2 > 0.0) {
        const double r = R(beta);
        if (!std::isfinite(r)) {
          throw PreconditionError("rejected control: R(beta) is infinite at beta = " + std::to_string(beta) +
                                  " (step " + std::to_string(k) + ")");
        }
        detail::kahan_add(running, comp, -0.5 * std::exp(log_g) * r * a2 * dt);
        log_g += 0.5 * beta * a2 * dt;
      }
      for (std::size_t i = 0; i < n; ++i) {
        w[i] += sdt * rng();
        drift[i] += a[i] * dt;
      }
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
    growth[p] = std::exp(log_g);
    term[p] = growth[p] * f(x);
    run[p] = running;
    total[p] = running + term[p];
    if (!std::isfinite(total[p])) throw NumericalError("NaN payoff on path " + std::to_string(p));
  });
  return detail::summarize(total, growth, run, term, steps);
}

inline GameEstimate payoff_K(const MeanSpec& spec, const ScalarField& f, const RepresentationFactory& controls,
                             const ConjugateTable& table, const GameConfig& cfg) {
  return payoff_K(spec, f, controls, [&table](double b) { return table.value(b); }, cfg);
}

inline GameEstimate payoff_K(const MeanSpec& spec, const ScalarField& f, const RepresentationFactory& controls,
                             const GameConfig& cfg) {
  return payoff_K(spec, f, controls, fenchel_R(spec), cfg);
}

// Two-control form for xe^x: with beta = -gamma^2 and eta = |gamma| alpha,
//   E[e^{-1/2 int |eta|^2} f(X_1) - 1/2 int e^{-1/2 int_0^t |eta|^2} (|eta|^2 + |alpha - eta|^2) dt].
class EtaControl {
 public:
  virtual ~EtaControl() = default;
  virtual void control(const StepContext& ctx, std::span<double> alpha, std::span<double> eta) = 0;
};

using EtaFactory = std::function<std::unique_ptr<EtaControl>()>;

// alpha* = (F''/F')(v) grad v, eta* = alpha* / (2 + v) for F = xe^x.
class OptimalEta final : public EtaControl {
 public:
  OptimalEta(std::shared_ptr<const GameValue> v, MeanSpec spec)
      : v_(std::move(v)), spec_(std::move(spec)), g_(v_->dimension()) {
    if (spec_.kind() != MeanSpec::Kind::xexp) throw PreconditionError("eta controls belong to the xexp mean");
  }

  void control(const StepContext& ctx, std::span<double> alpha, std::span<double> eta) override {
    const double v = std::clamp(v_->evaluate(ctx.t, ctx.x, g_), spec_.control_lo(), spec_.control_hi());
    const double k = spec_.curvature_ratio(v);
    const double gamma = std::sqrt(-spec_.beta_star(v));
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      alpha[i] = k * g_[i];
      eta[i] = gamma * alpha[i];
    }
  }

 private:
  std::shared_ptr<const GameValue> v_;
  MeanSpec spec_;
  std::vector<double> g_;
};

inline EtaFactory optimal_eta(const Representation& r) {
  auto v = r.value;
  auto s = r.spec;
  return [v, s] { return std::unique_ptr<EtaControl>(std::make_unique<OptimalEta>(v, s)); };
}

inline GameEstimate payoff_K_eta(const ScalarField& f, const EtaFactory& controls, const GameConfig& cfg) {
  if (!controls) throw PreconditionError("payoff_K_eta needs controls");
  cfg.validate();
  const std::size_t n = f.dimension(), steps = cfg.steps(), paths = cfg.paths;
  const double dt = cfg.dt, sdt = std::sqrt(dt);
  std::vector<double> total(paths), disc(paths), run(paths), term(paths);
  for_each_path(paths, cfg.threads, [&](std::size_t p) {
    auto ctl = controls();
    NormalSampler rng(RngStream(cfg.seed, p));
    std::vector<double> w(n, 0.0), drift(n, 0.0), x(n), a(n), e(n);
    double log_d = 0.0, running = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
      ctl->control({k, t, dt, w, x}, a, e);
      double e2 = 0.0, d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        e2 += e[i] * e[i];
        d2 += (a[i] - e[i]) * (a[i] - e[i]);
      }
      detail::kahan_add(running, comp, -0.5 * std::exp(log_d) * (e2 + d2) * dt);
      log_d -= 0.5 * e2 * dt;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] += sdt * rng();
        drift[i] += a[i] * dt;
      }
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = w[i] + drift[i];
    disc[p] = std::exp(log_d);
    term[p] = disc[p] * f(x);
    run[p] = running;
    total[p] = running + term[p];
    if (!std::isfinite(total[p])) throw NumericalError("NaN payoff on path " + std::to_string(p));
  });
  return detail::summarize(total, disc, run, term, steps);
}

// --- The 1 - e^{-x^2/2} example ------------------------------------------------

// Value function of F = 1 - e^{-x^2/2} with its three optimal controls: the
// Phi-game pair built on it (Isaacs constant c) and alpha~ = grad v / v.
struct NonconvexExample {
  std::shared_ptr<const ValueFunction> vf;
  std::shared_ptr<const GameValue> value;
  double c = 0.0;
  double v00 = 0.0;  // sqrt(-2 log int e^{-f^2/2} dgamma)

  StrategyFactory alpha() const { return optimal_strategy(value, c); }
  ResponderFactory beta(double dt) const { return discrete_responder(value, dt, dt); }
  StrategyFactory alpha_tilde() const {
    auto v = value;
    return [v] {
      return std::unique_ptr<Strategy>(std::make_unique<FunctionStrategy>(
          [v, g = std::vector<double>(v->dimension())](const StepContext& ctx, std::span<const double>,
                                                      std::span<double> at) mutable {
            const double val = v->evaluate(ctx.t, ctx.x, g);
            for (std::size_t i = 0; i < at.size(); ++i) at[i] = g[i] / val;
          }));
    };
  }
};

inline NonconvexExample make_nonconvex_example(const ScalarField& f, const GameConfig& cfg,
                                               const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder),
                                               bool tabulate = true) {
  if (f.lo() < 0.0) throw PreconditionError("three-control example needs f >= 0");
  NonconvexExample ex;
  ex.vf = std::make_shared<const ValueFunction>(f, MeanSpec::gauss_tail(), rule);
  ex.c = cfg.c ? *cfg.c : ex.vf->default_c();
  if (2.0 * ex.c < ex.vf->sup_estimate()) throw PreconditionError("Isaacs constant too small: need 2c >= sup f");
  ex.value = make_game_value(ex.vf, cfg.dt, tabulate, cfg.threads);
  const std::vector<double> zero(f.dimension(), 0.0);
  ex.v00 = ex.vf->value(0.0, zero);
  return ex;
}

// --- Jensen and convexity of M_F ----------------------------------------------

// lambda f + (1 - lambda) g.
inline ScalarField mix(const ScalarField& f, const ScalarField& g, double lambda) {
  if (f.dimension() != g.dimension()) throw PreconditionError("mix: dimension mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw PreconditionError("mix: lambda must lie in [0,1]");
  const double mu = 1.0 - lambda;
  ScalarField h(f.dimension(), [=](std::span<const double> x) { return lambda * f(x) + mu * g(x); },
                lambda * f.lo() + mu * g.lo(), lambda * f.hi() + mu * g.hi(),
                std::max(f.smoothness(), g.smoothness()), "mix");
  if (f.has_gradient() && g.has_gradient()) {
    h.with_gradient([=](std::span<const double> x, std::span<double> out) {
      std::vector<double> gg(out.size());
      f.gradient(x, out);
      g.gradient(x, gg);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * out[i] + mu * gg[i];
    });
  }
  return h;
}

// One-dimensional test fields with ranges inside I intersected with [-3, 3],
// shrunk by a tenth of its length on each side.
inline std::vector<ScalarField> mean_battery(const MeanSpec& spec) {
  double lo = std::max(spec.lo(), -3.0), hi = std::min(spec.hi(), 3.0);
  const double m = 0.1 * (hi - lo);
  lo += m;
  hi -= m;
  const double mid = 0.5 * (lo + hi), s = 0.25 * (hi - lo);
  return {ScalarField::constant(1, mid),
          fields::linear(mid, s, lo, hi),
          fields::linear(mid, -s, lo, hi),
          fields::erf_ramp(0.5, 0.8, lo, hi),
          fields::bump(0.0, 0.6, lo, hi),
          fields::bump(-1.0, 1.0, lo, hi),
          fields::logistic_ramp(-0.5, 0.4, lo, hi)};
}

struct MeanCounterexample {
  bool found = false;
  std::size_t f_index = 0, g_index = 0;
  double lambda = 0.0;
  double excess = -std::numeric_limits<double>::infinity();  // M(mix) - mix of M
};

// Largest M_F(lambda f + (1-lambda) g) - lambda M_F(f) - (1-lambda) M_F(g)
// over battery pairs; found when it exceeds `threshold`.
inline MeanCounterexample convexity_counterexample(const MeanSpec& spec, const std::vector<ScalarField>& battery,
                                                   std::vector<double> lambdas = {0.25, 0.5, 0.75},
                                                   double threshold = 1e-6,
                                                   const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder)) {
  std::vector<double> means;
  for (const auto& f : battery) means.push_back(generalized_mean(spec, f, rule));
  MeanCounterexample out;
  for (std::size_t i = 0; i < battery.size(); ++i) {
    for (std::size_t j = i + 1; j < battery.size(); ++j) {
      for (double l : lambdas) {
        const double e = generalized_mean(spec, mix(battery[i], battery[j], l), rule) - l * means[i] -
                         (1.0 - l) * means[j];
        if (e > out.excess) {
          out.excess = e;
          out.f_index = i;
          out.g_index = j;
          out.lambda = l;
        }
      }
    }
  }
  out.found = out.excess > threshold;
  return out;
}

// M_F(f) - int f dgamma for each field; nonnegative when F is convex.
inline std::vector<double> jensen_gaps(const MeanSpec& spec, const std::vector<ScalarField>& battery,
                                       const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder)) {
  std::vector<double> out;
  for (const auto& f : battery) {
    const GaussianIntegrator integ(rule, f.dimension());
    out.push_back(generalized_mean(spec, f, rule) - integ.integrate([&](std::span<const double> x) { return f(x); }).value);
  }
  return out;
}

}  // namespace gaussgame
