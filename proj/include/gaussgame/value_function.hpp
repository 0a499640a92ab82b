#pragma once

// v(t,x) = F^{-1}(u(t,x)), u(t,x) = E[F(f(x + W_{1-t}))], evaluated pointwise
// by quadrature, with finite-difference derivatives and the residual of
//   dv/dt + (1/2) Lap v + (1/2) (F''/F')(v) |grad v|^2 = 0.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/gaussian.hpp"
#include "gaussgame/mean_spec.hpp"
#include "gaussgame/quadrature.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

class ValueFunction {
 public:
  struct Options {
    double h_fd = 1e-4;      // spatial central-difference step
    double h_t = 1e-4;       // time central-difference step
    double t_margin = 1e-3;  // residuals need t <= 1 - t_margin
    bool allow_monte_carlo = false;
    std::size_t mc_samples = 20000;
    std::uint64_t mc_seed = 0x5eed;
  };

  explicit ValueFunction(ScalarField f, MeanSpec spec = MeanSpec::phi(),
                         QuadratureRule rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder))
      : ValueFunction(std::move(f), std::move(spec), std::move(rule), Options{}) {}

  ValueFunction(ScalarField f, MeanSpec spec, QuadratureRule rule, Options opt)
      : f_(std::move(f)), spec_(std::move(spec)), opt_(opt),
        integ_(std::move(rule), f_.dimension(),
               GaussianIntegrator::Options{opt.allow_monte_carlo, opt.mc_samples, opt.mc_seed}) {
    if (!f_.valid()) throw PreconditionError("value function needs a field");
    if (f_.smoothness() == Smoothness::measurable) {
      throw PreconditionError("value function refuses measurable fields; smooth '" + f_.description() +
                              "' first (mollify or use a Lipschitz approximation)");
    }
    if (f_.lo() < spec_.lo() || f_.hi() > spec_.hi()) {
      throw RangeError("field range [" + std::to_string(f_.lo()) + ", " + std::to_string(f_.hi()) +
                       "] leaves the interval of mean '" + spec_.name() + "'");
    }
    if (!(opt_.h_fd > 0.0 && opt_.h_t > 0.0 && opt_.t_margin > 0.0)) {
      throw PreconditionError("finite-difference steps and t_margin must be positive");
    }
  }

  std::size_t dimension() const noexcept { return f_.dimension(); }
  const ScalarField& field() const noexcept { return f_; }
  const MeanSpec& spec() const noexcept { return spec_; }
  const Options& options() const noexcept { return opt_; }
  const GaussianIntegrator& integrator() const noexcept { return integ_; }
  std::size_t quadrature_order() const noexcept { return integ_.uses_monte_carlo() ? 0 : integ_.rule().order(); }

  // u(t, x); at t >= 1 this is F(f(x)).
  double u(double t, std::span<const double> x) const {
    check_point(x);
    if (t >= 1.0) return spec_.F(f_(x));
    const double s = std::sqrt(1.0 - t);
    std::vector<double> y(x.size());
    double sum = 0.0, comp = 0.0;
    integ_.visit([&](std::span<const double> z, double w) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + s * z[i];
      const double term = w * spec_.F(f_(y)) - comp;
      const double tot = sum + term;
      comp = (tot - sum) - term;
      sum = tot;
    });
    return sum;
  }

  double value(double t, std::span<const double> x) const {
    check_point(x);
    if (t >= 1.0) return f_(x);
    const double s = std::sqrt(1.0 - t);
    std::vector<double> y(x.size());
    double v;
    if (spec_.kind() == MeanSpec::Kind::phi) {
      // Accumulate both tails so that Phi^{-1} is always applied to the
      // smaller of u and 1 - u.
      double lower = 0.0, upper = 0.0;
      integ_.visit([&](std::span<const double> z, double w) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + s * z[i];
        const double fy = f_(y);
        lower += w * phi(fy);
        upper += w * phi(-fy);
      });
      if (lower <= upper) {
        v = lower > 0.0 ? phi_inv_clamped(lower).value : f_.lo();
      } else {
        v = upper > 0.0 ? -phi_inv_clamped(upper).value : f_.hi();
      }
    } else {
      v = spec_.inverse(u(t, x));
    }
    return std::clamp(v, f_.lo(), f_.hi());
  }

  double value(double t, double x) const { return value(t, std::span<const double>(&x, 1)); }

  // Central-difference gradient with step h_fd.
  void gradient(double t, std::span<const double> x, std::span<double> g) const {
    check_point(x);
    std::vector<double> xp(x.begin(), x.end());
    const double h = opt_.h_fd;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + h;
      const double vp = value(t, xp);
      xp[i] = x[i] - h;
      const double vm = value(t, xp);
      xp[i] = x[i];
      g[i] = (vp - vm) / (2.0 * h);
    }
  }

  std::vector<double> gradient(double t, std::span<const double> x) const {
    std::vector<double> g(x.size());
    gradient(t, x, g);
    return g;
  }

  // grad v = E[F'(f) grad f] / F'(v), using the field's analytic gradient.
  void chain_rule_gradient(double t, std::span<const double> x, std::span<double> g) const {
    check_point(x);
    if (!f_.has_gradient()) throw PreconditionError("chain-rule gradient needs an analytic field gradient");
    const std::size_t n = x.size();
    if (t >= 1.0) {
      f_.gradient(x, g);
      return;
    }
    const double s = std::sqrt(1.0 - t);
    std::vector<double> y(n), gf(n), acc(n, 0.0);
    integ_.visit([&](std::span<const double> z, double w) {
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + s * z[i];
      const double fp = spec_.dF(f_(y));
      f_.gradient(y, gf);
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * fp * gf[i];
    });
    const double denom = spec_.dF(value(t, x));
    for (std::size_t i = 0; i < n; ++i) g[i] = acc[i] / denom;
  }

  // v and grad v together. With an analytic field gradient this is a single
  // quadrature pass (chain rule); otherwise central differences.
  double value_and_gradient(double t, std::span<const double> x, std::span<double> g) const {
    check_point(x);
    if (!f_.has_gradient()) {
      gradient(t, x, g);
      return value(t, x);
    }
    const std::size_t n = x.size();
    if (t >= 1.0) {
      f_.gradient(x, g);
      return f_(x);
    }
    const double s = std::sqrt(1.0 - t);
    std::vector<double> y(n), gf(n);
    std::fill(g.begin(), g.end(), 0.0);
    double lower = 0.0, upper = 0.0, plain = 0.0;
    const bool is_phi = spec_.kind() == MeanSpec::Kind::phi;
    integ_.visit([&](std::span<const double> z, double w) {
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + s * z[i];
      const double fy = f_(y);
      if (is_phi) {
        lower += w * phi(fy);
        upper += w * phi(-fy);
      } else {
        plain += w * spec_.F(fy);
      }
      const double fp = spec_.dF(fy);
      f_.gradient(y, gf);
      for (std::size_t i = 0; i < n; ++i) g[i] += w * fp * gf[i];
    });
    double v;
    if (is_phi) {
      if (lower <= upper) {
        v = lower > 0.0 ? phi_inv_clamped(lower).value : f_.lo();
      } else {
        v = upper > 0.0 ? -phi_inv_clamped(upper).value : f_.hi();
      }
    } else {
      v = spec_.inverse(plain);
    }
    v = std::clamp(v, f_.lo(), f_.hi());
    const double denom = spec_.dF(v);
    for (std::size_t i = 0; i < n; ++i) g[i] /= denom;
    return v;
  }

  double time_derivative(double t, std::span<const double> x) const {
    const double h = opt_.h_t;
    return (value(t + h, x) - value(t - h, x)) / (2.0 * h);
  }

  double laplacian(double t, std::span<const double> x) const {
    std::vector<double> xp(x.begin(), x.end());
    const double h = opt_.h_fd;
    const double v0 = value(t, x);
    double lap = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + h;
      const double vp = value(t, xp);
      xp[i] = x[i] - h;
      const double vm = value(t, xp);
      xp[i] = x[i];
      lap += (vp - 2.0 * v0 + vm) / (h * h);
    }
    return lap;
  }

  // |dv/dt + Lap v / 2 + (F''/F')(v) |grad v|^2 / 2|.
  double pde_residual(double t, std::span<const double> x) const {
    if (!(t > 0.0 && t <= 1.0 - opt_.t_margin)) {
      throw PreconditionError("pde_residual: t must lie in (0, 1 - t_margin], got " + std::to_string(t));
    }
    const double v = value(t, x);
    const auto g = gradient(t, x);
    double g2 = 0.0;
    for (double gi : g) g2 += gi * gi;
    return std::abs(time_derivative(t, x) + 0.5 * laplacian(t, x) + 0.5 * spec_.curvature_ratio(v) * g2);
  }

  double pde_residual(double t, double x) const { return pde_residual(t, std::span<const double>(&x, 1)); }

  // max(declared upper bound, f sampled on the quadrature nodes).
  double sup_estimate() const {
    double s = f_.hi();
    integ_.visit([&](std::span<const double> z, double) { s = std::max(s, f_(z)); });
    return s;
  }

  // Default constant for the optimal strategy: 2c >= sup f with a margin.
  double default_c() const { return sup_estimate() / 2.0 + 0.01; }

 private:
  void check_point(std::span<const double> x) const {
    if (x.size() != f_.dimension()) {
      throw PreconditionError("point has dimension " + std::to_string(x.size()) + ", field has " +
                              std::to_string(f_.dimension()));
    }
  }

  ScalarField f_;
  MeanSpec spec_;
  Options opt_;
  GaussianIntegrator integ_;
};

// M_F(f) = F^{-1}(int F(f) dgamma_n).
inline double generalized_mean(const MeanSpec& spec, const ScalarField& f,
                               const QuadratureRule& rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder),
                               bool allow_monte_carlo = false) {
  ValueFunction::Options opt;
  opt.allow_monte_carlo = allow_monte_carlo;
  ValueFunction vf(f, spec, rule, opt);
  std::vector<double> zero(f.dimension(), 0.0);
  return vf.value(0.0, zero);
}

}  // namespace gaussgame
