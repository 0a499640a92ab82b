#pragma once

// Real-valued fields on R^n with the metadata the rest of the library leans
// on: a declared range, an optional Lipschitz bound and gradient, a smoothness
// tag, and optional exact evaluations of T(f(x)) for the transforms used by the
// inequality checks (these avoid probit saturation on sharp profiles).

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/gaussian.hpp"

namespace gaussgame {

enum class Smoothness { smooth, lipschitz, measurable };

inline const char* to_string(Smoothness s) {
  switch (s) {
    case Smoothness::smooth: return "smooth";
    case Smoothness::lipschitz: return "lipschitz";
    case Smoothness::measurable: return "measurable";
  }
  return "?";
}

// Monotone maps (0,1] -> R applied to probabilities: log, Phi^{-1}, Phi_c^{-1}.
class Transform {
 public:
  enum class Kind { log, probit, phi_c };

  static Transform log() { return Transform(Kind::log, 0.0); }
  static Transform probit() { return Transform(Kind::probit, 0.0); }
  static Transform phi_c(double c) {
    Transform t(Kind::phi_c, c);
    t.phic_ = std::make_shared<PhiCTransform>(c);
    return t;
  }

  Kind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }

  std::string name() const {
    switch (kind_) {
      case Kind::log: return "log";
      case Kind::probit: return "probit";
      case Kind::phi_c: return "phi_c:" + std::to_string(c_);
    }
    return "?";
  }

  bool same_as(const Transform& o) const noexcept { return kind_ == o.kind_ && c_ == o.c_; }

  // Largest value the transform can take (T(1)); +inf for probit.
  double upper() const noexcept { return kind_ == Kind::probit ? INFINITY : 0.0; }

  // T(p) with probabilities below kProbitClip (or above 1 - kProbitClip for
  // probit) clamped; `saturated` records whether that happened.
  ClampedProbit apply(double p) const {
    if (std::isnan(p)) throw NumericalError("transform of NaN probability");
    switch (kind_) {
      case Kind::log:
        if (p > 1.0) throw RangeError("log transform: probability above 1");
        if (p < kProbitClip) return {std::log(kProbitClip), true};
        return {std::log(p), false};
      case Kind::probit:
        return phi_inv_clamped(p);
      case Kind::phi_c:
        if (p > 1.0) throw RangeError("phi_c transform: probability above 1");
        if (p < kProbitClip) return {phic_->inverse(kProbitClip), true};
        return {phic_->inverse(p), false};
    }
    return {};
  }

  double inverse(double y) const {
    switch (kind_) {
      case Kind::log: return std::exp(std::min(y, 0.0));
      case Kind::probit: return phi(y);
      case Kind::phi_c: return phic_->forward(std::min(y, 0.0));
    }
    return 0.0;
  }

 private:
  Transform(Kind k, double c) : kind_(k), c_(c) {}
  Kind kind_;
  double c_;
  std::shared_ptr<const PhiCTransform> phic_;
};

class ScalarField {
 public:
  using Eval = std::function<double(std::span<const double>)>;
  using Grad = std::function<void(std::span<const double>, std::span<double>)>;

  ScalarField() = default;

  ScalarField(std::size_t dimension, Eval eval, double lo, double hi, Smoothness smoothness = Smoothness::smooth,
              std::string description = "field")
      : dim_(dimension), eval_(std::move(eval)), lo_(lo), hi_(hi), smoothness_(smoothness),
        description_(std::move(description)) {
    if (dim_ == 0) throw PreconditionError("field dimension must be positive");
    if (!eval_) throw PreconditionError("field evaluator is empty");
    if (!(lo_ <= hi_)) throw PreconditionError("field range must satisfy lo <= hi");
  }

  static ScalarField constant(std::size_t dimension, double k) {
    ScalarField f(dimension, [k](std::span<const double>) { return k; }, k, k, Smoothness::smooth,
                  "const(" + std::to_string(k) + ")");
    f.grad_ = [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
    f.lipschitz_ = 0.0;
    return f;
  }

  std::size_t dimension() const noexcept { return dim_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  Smoothness smoothness() const noexcept { return smoothness_; }
  const std::string& description() const noexcept { return description_; }
  std::optional<double> lipschitz() const noexcept { return lipschitz_; }
  bool has_gradient() const noexcept { return static_cast<bool>(grad_); }
  bool valid() const noexcept { return static_cast<bool>(eval_); }

  double operator()(std::span<const double> x) const { return eval_(x); }
  double operator()(double x) const { return eval_(std::span<const double>(&x, 1)); }
  double operator()(std::initializer_list<double> x) const {
    return eval_(std::span<const double>(x.begin(), x.size()));
  }

  void gradient(std::span<const double> x, std::span<double> g) const {
    if (!grad_) throw PreconditionError("field '" + description_ + "' has no analytic gradient");
    grad_(x, g);
  }

  ScalarField& with_gradient(Grad g) {
    grad_ = std::move(g);
    return *this;
  }
  ScalarField& with_lipschitz(double L) {
    if (!(L >= 0.0)) throw PreconditionError("Lipschitz bound must be non-negative");
    lipschitz_ = L;
    return *this;
  }
  ScalarField& with_description(std::string d) {
    description_ = std::move(d);
    return *this;
  }
  ScalarField& with_range(double lo, double hi) {
    lo_ = lo;
    hi_ = hi;
    return *this;
  }
  // Exact evaluation of T(f(x)); must agree with T(f(x)) wherever the latter
  // is not saturated.
  ScalarField& with_transformed(Transform t, Eval eval) {
    hints_.emplace_back(std::move(t), std::move(eval));
    return *this;
  }

  const Eval* transformed_hint(const Transform& t) const {
    for (const auto& [k, e] : hints_) {
      if (k.same_as(t)) return &e;
    }
    return nullptr;
  }

  // T(f(x)), through the exact hint when one is attached.
  ClampedProbit transformed(const Transform& t, std::span<const double> x) const {
    if (const Eval* h = transformed_hint(t)) return {std::min((*h)(x), t.upper()), false};
    return t.apply(eval_(x));
  }

  const Eval& evaluator() const noexcept { return eval_; }

 private:
  std::size_t dim_ = 0;
  Eval eval_;
  double lo_ = 0.0, hi_ = 0.0;
  Smoothness smoothness_ = Smoothness::smooth;
  std::string description_;
  std::optional<double> lipschitz_;
  Grad grad_;
  std::vector<std::pair<Transform, Eval>> hints_;
};

namespace fields {

namespace detail {
inline double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }
inline double logistic(double u) { return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }
}  // namespace detail

// a + b x, smoothly clipped into (clip_lo, clip_hi) by a softplus difference of
// width `soft`. Only the first coordinate is used, so it embeds in any R^n.
inline ScalarField linear(double a, double b, double clip_lo = -8.0, double clip_hi = 8.0, double soft = -1.0,
                          std::size_t dimension = 1) {
  if (!(clip_lo < clip_hi)) throw PreconditionError("linear: clip_lo must be below clip_hi");
  if (soft <= 0.0) soft = std::min(0.25, (clip_hi - clip_lo) / 8.0);
  auto clip = [=](double y) {
    return std::clamp(
        clip_lo + soft * (detail::softplus((y - clip_lo) / soft) - detail::softplus((y - clip_hi) / soft)), clip_lo,
        clip_hi);
  };
  ScalarField f(dimension, [=](std::span<const double> x) { return clip(a + b * x[0]); }, clip_lo, clip_hi,
                Smoothness::smooth, "linear");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     const double y = a + b * x[0];
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = b * (detail::logistic((y - clip_lo) / soft) - detail::logistic((y - clip_hi) / soft));
   }).with_lipschitz(std::abs(b));
  return f;
}

// lo + (hi - lo) Phi((x - center) / sigma).
inline ScalarField erf_ramp(double center, double sigma, double lo = 0.0, double hi = 1.0,
                            std::size_t dimension = 1) {
  if (!(sigma > 0.0)) throw PreconditionError("erf_ramp: sigma must be positive");
  if (!(lo < hi)) throw PreconditionError("erf_ramp: lo must be below hi");
  ScalarField f(dimension, [=](std::span<const double> x) { return lo + (hi - lo) * phi((x[0] - center) / sigma); },
                lo, hi, Smoothness::smooth, "erf_ramp");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = (hi - lo) * normal_pdf((x[0] - center) / sigma) / sigma;
   }).with_lipschitz((hi - lo) * kInvSqrt2Pi / sigma);
  if (lo == 0.0 && hi == 1.0) {
    f.with_transformed(Transform::probit(), [=](std::span<const double> x) { return (x[0] - center) / sigma; });
  }
  return f;
}

// Phi(q(x)) with q(x) = (x - center)/sigma - curvature (x - center)^2 / 2.
// q is concave, so the family is closed under the probit envelope of
// translates with common sigma and curvature; it tends to the halfspace
// {x > center} as sigma -> 0.
inline ScalarField probit_quadratic(double center, double sigma, double curvature = 0.5, std::size_t dimension = 1) {
  if (!(sigma > 0.0)) throw PreconditionError("probit_quadratic: sigma must be positive");
  if (!(curvature > 0.0)) throw PreconditionError("probit_quadratic: curvature must be positive");
  auto q = [=](double x) { return (x - center) / sigma - 0.5 * curvature * (x - center) * (x - center); };
  ScalarField f(dimension, [=](std::span<const double> x) { return phi(q(x[0])); }, 0.0,
                phi(0.5 / (curvature * sigma * sigma)), Smoothness::smooth, "probit_quadratic");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = normal_pdf(q(x[0])) * (1.0 / sigma - curvature * (x[0] - center));
  });
  f.with_transformed(Transform::probit(), [=](std::span<const double> x) { return q(x[0]); });
  return f;
}

// lo + (hi - lo) exp(-(x - center)^2 / (2 width^2)).
inline ScalarField bump(double center, double width, double lo = 0.0, double hi = 1.0, std::size_t dimension = 1) {
  if (!(width > 0.0)) throw PreconditionError("bump: width must be positive");
  ScalarField f(dimension,
                [=](std::span<const double> x) {
                  const double u = (x[0] - center) / width;
                  return lo + (hi - lo) * std::exp(-0.5 * u * u);
                },
                std::min(lo, hi), std::max(lo, hi), Smoothness::smooth, "bump");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     const double u = (x[0] - center) / width;
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = -(hi - lo) * u / width * std::exp(-0.5 * u * u);
   }).with_lipschitz(std::abs(hi - lo) / width * std::exp(-0.5));
  if (lo == 0.0 && hi > 0.0 && hi <= 1.0) {
    f.with_transformed(Transform::log(), [=](std::span<const double> x) {
      const double u = (x[0] - center) / width;
      return std::log(hi) - 0.5 * u * u;
    });
  }
  return f;
}

// Smoothed indicator of [left, right]: lo + (hi - lo)(Phi((x-left)/s) - Phi((x-right)/s)).
inline ScalarField interval(double left, double right, double sigma, double lo = 0.0, double hi = 1.0,
                            std::size_t dimension = 1) {
  if (!(left < right)) throw PreconditionError("interval: left must be below right");
  if (!(sigma > 0.0)) throw PreconditionError("interval: sigma must be positive");
  auto mass = [=](double x) {
    // Difference of tails evaluated on the side where it does not cancel.
    const double a = (x - left) / sigma, b = (x - right) / sigma;
    return a + b > 0 ? phi(-b) - phi(-a) : phi(a) - phi(b);
  };
  ScalarField f(dimension, [=](std::span<const double> x) { return lo + (hi - lo) * mass(x[0]); }, lo, hi,
                Smoothness::smooth, "interval");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = (hi - lo) * (normal_pdf((x[0] - left) / sigma) - normal_pdf((x[0] - right) / sigma)) / sigma;
   }).with_lipschitz((hi - lo) * kInvSqrt2Pi / sigma);
  return f;
}

// Indicator-like step on the first coordinate: left below `at`, right from
// `at` on. Measurable only; input to the regularizing approximations.
inline ScalarField step(double at, double left, double right, std::size_t dimension = 1) {
  return ScalarField(dimension, [=](std::span<const double> x) { return x[0] < at ? left : right; },
                     std::min(left, right), std::max(left, right), Smoothness::measurable, "step");
}

// f1(x_1) * f2(x_2) on the concatenated space.
inline ScalarField product(const ScalarField& f1, const ScalarField& f2) {
  const std::size_t n1 = f1.dimension(), n2 = f2.dimension();
  const double c[4] = {f1.lo() * f2.lo(), f1.lo() * f2.hi(), f1.hi() * f2.lo(), f1.hi() * f2.hi()};
  const Smoothness s = std::max(f1.smoothness(), f2.smoothness());
  ScalarField f(n1 + n2,
                [=](std::span<const double> x) { return f1(x.subspan(0, n1)) * f2(x.subspan(n1, n2)); },
                *std::min_element(c, c + 4), *std::max_element(c, c + 4), s, "product");
  if (f1.has_gradient() && f2.has_gradient()) {
    f.with_gradient([=](std::span<const double> x, std::span<double> g) {
      const auto x1 = x.subspan(0, n1), x2 = x.subspan(n1, n2);
      const double v1 = f1(x1), v2 = f2(x2);
      f1.gradient(x1, g.subspan(0, n1));
      f2.gradient(x2, g.subspan(n1, n2));
      for (std::size_t i = 0; i < n1; ++i) g[i] *= v2;
      for (std::size_t i = n1; i < n1 + n2; ++i) g[i] *= v1;
    });
  }
  if (f1.transformed_hint(Transform::log()) && f2.transformed_hint(Transform::log())) {
    const auto h1 = *f1.transformed_hint(Transform::log());
    const auto h2 = *f2.transformed_hint(Transform::log());
    f.with_transformed(Transform::log(),
                       [=](std::span<const double> x) { return h1(x.subspan(0, n1)) + h2(x.subspan(n1, n2)); });
  }
  return f;
}

// Lift a field on R^m to R^n through x -> B x for a row-major m x n matrix B.
inline ScalarField compose_linear(const ScalarField& f, std::vector<double> B, std::size_t n) {
  const std::size_t m = f.dimension();
  if (B.size() != m * n) throw PreconditionError("compose_linear: matrix size mismatch");
  ScalarField g(n,
                [=](std::span<const double> x) {
                  std::vector<double> y(m, 0.0);
                  for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) y[i] += B[i * n + j] * x[j];
                  return f(y);
                },
                f.lo(), f.hi(), f.smoothness(), f.description() + "@B");
  if (f.has_gradient()) {
    g.with_gradient([=](std::span<const double> x, std::span<double> out) {
      std::vector<double> y(m, 0.0), gy(m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += B[i * n + j] * x[j];
      f.gradient(y, gy);
      for (std::size_t j = 0; j < n; ++j) {
        out[j] = 0.0;
        for (std::size_t i = 0; i < m; ++i) out[j] += B[i * n + j] * gy[i];
      }
    });
  }
  return g;
}

// Smoothed halfspace {x >= center} (or {x <= center} when `lower`):
// eps + (1 - 2 eps) Phi(+-(x - center) / sigma), values in [eps, 1 - eps].
// The probit hint works through whichever tail is small, so it stays exact
// for eps far below the double resolution of 1 - eps.
inline ScalarField halfspace(double center, double sigma, double eps, bool lower = false, std::size_t dimension = 1) {
  if (!(sigma > 0.0)) throw PreconditionError("halfspace: sigma must be positive");
  if (!(eps > 0.0 && eps < 0.5)) throw PreconditionError("halfspace: eps must lie in (0, 1/2)");
  const double sgn = lower ? -1.0 : 1.0;
  // Largest double below 1 when 1 - eps rounds to 1.
  const double hi = std::min(1.0 - eps, std::nextafter(1.0, 0.0));
  ScalarField f(dimension, [=](std::span<const double> x) { return eps + (1.0 - 2.0 * eps) * phi(sgn * (x[0] - center) / sigma); },
                eps, hi, Smoothness::smooth, "halfspace");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = sgn * (1.0 - 2.0 * eps) * normal_pdf((x[0] - center) / sigma) / sigma;
   }).with_lipschitz((1.0 - 2.0 * eps) * kInvSqrt2Pi / sigma);
  f.with_transformed(Transform::probit(), [=](std::span<const double> x) {
    const double u = sgn * (x[0] - center) / sigma;
    if (u <= 0.0) return phi_inv(eps + (1.0 - 2.0 * eps) * phi(u));
    return -phi_inv(eps + (1.0 - 2.0 * eps) * phi(-u));
  });
  return f;
}

// Logistic ramp lo + (hi - lo) / (1 + exp(-(x - center) / sigma)), with the
// exact log hint when lo = 0, hi = 1.
inline ScalarField logistic_ramp(double center, double sigma, double lo = 0.0, double hi = 1.0,
                                 std::size_t dimension = 1) {
  if (!(sigma > 0.0)) throw PreconditionError("logistic_ramp: sigma must be positive");
  ScalarField f(dimension,
                [=](std::span<const double> x) { return lo + (hi - lo) * detail::logistic((x[0] - center) / sigma); },
                std::min(lo, hi), std::max(lo, hi), Smoothness::smooth, "logistic_ramp");
  f.with_gradient([=](std::span<const double> x, std::span<double> g) {
     const double p = detail::logistic((x[0] - center) / sigma);
     std::fill(g.begin(), g.end(), 0.0);
     g[0] = (hi - lo) * p * (1.0 - p) / sigma;
   }).with_lipschitz(std::abs(hi - lo) / (4.0 * sigma));
  if (lo == 0.0 && hi == 1.0) {
    f.with_transformed(Transform::log(),
                       [=](std::span<const double> x) { return -detail::softplus(-(x[0] - center) / sigma); });
  }
  return f;
}

// T(f(x)) as a field of its own, through the exact hint when f has one. The
// gradient is grad f / T'(f) where that quotient is representable.
inline ScalarField transformed(const ScalarField& f, const Transform& t) {
  const double lo = t.apply(std::max(f.lo(), 0.0)).value;
  const double hi = std::min(t.apply(std::min(f.hi(), 1.0)).value, t.upper());
  if (f.lo() < 0.0 || f.hi() > 1.0) throw RangeError("transformed field: values must lie in [0, 1]");
  ScalarField g(f.dimension(), [f, t](std::span<const double> x) { return f.transformed(t, x).value; }, lo, hi,
                f.smoothness(), t.name() + "(" + f.description() + ")");
  if (f.has_gradient()) {
    g.with_gradient([f, t](std::span<const double> x, std::span<double> out) {
      f.gradient(x, out);
      const double p = f(x);
      const double y = f.transformed(t, x).value;
      // dT/dp: 1/p (log), 1/phi(y) (probit), c/phi(y + Phi^{-1}(c)) (phi_c).
      double inv_slope = 0.0;
      switch (t.kind()) {
        case Transform::Kind::log: inv_slope = p; break;
        case Transform::Kind::probit: inv_slope = normal_pdf(y); break;
        case Transform::Kind::phi_c: inv_slope = normal_pdf(y + phi_inv(t.c())) / t.c(); break;
      }
      for (double& gi : out) gi = inv_slope > 0.0 ? gi / inv_slope : 0.0;
    });
  }
  return g;
}

// One-dimensional cubic Hermite table of f on [x_lo, x_hi] with step dx,
// slopes from f's gradient when present (else centered differences), shifted
// up by `lift`. Constant extrapolation outside the table.
inline ScalarField tabulated(const ScalarField& f, double x_lo, double x_hi, double dx, double lift = 0.0) {
  if (f.dimension() != 1) throw PreconditionError("tabulated: one-dimensional fields only");
  if (!(dx > 0.0 && x_hi > x_lo)) throw PreconditionError("tabulated: bad grid");
  const auto m = static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx)) + 1;
  auto v = std::make_shared<std::vector<double>>(m);
  auto d = std::make_shared<std::vector<double>>(m);
  for (std::size_t j = 0; j < m; ++j) (*v)[j] = f(x_lo + static_cast<double>(j) * dx) + lift;
  for (std::size_t j = 0; j < m; ++j) {
    const double x = x_lo + static_cast<double>(j) * dx;
    if (f.has_gradient()) {
      f.gradient(std::span<const double>(&x, 1), std::span<double>(&(*d)[j], 1));
    } else if (j == 0) {
      (*d)[j] = ((*v)[1] - (*v)[0]) / dx;
    } else if (j + 1 == m) {
      (*d)[j] = ((*v)[m - 1] - (*v)[m - 2]) / dx;
    } else {
      (*d)[j] = ((*v)[j + 1] - (*v)[j - 1]) / (2.0 * dx);
    }
  }
  auto locate = [=](double x, std::size_t& j, double& s) {
    const double u = std::clamp((x - x_lo) / dx, 0.0, static_cast<double>(m - 1));
    j = std::min(static_cast<std::size_t>(u), m - 2);
    s = u - static_cast<double>(j);
  };
  ScalarField g(1,
                [=](std::span<const double> x) {
                  std::size_t j;
                  double s;
                  locate(x[0], j, s);
                  const double s2 = s * s, s3 = s2 * s;
                  return (2 * s3 - 3 * s2 + 1) * (*v)[j] + dx * (s3 - 2 * s2 + s) * (*d)[j] +
                         (-2 * s3 + 3 * s2) * (*v)[j + 1] + dx * (s3 - s2) * (*d)[j + 1];
                },
                f.lo() + lift, f.hi() + lift, Smoothness::lipschitz, "table(" + f.description() + ")");
  g.with_gradient([=](std::span<const double> x, std::span<double> out) {
    if (x[0] <= x_lo || x[0] >= x_hi) {
      out[0] = 0.0;
      return;
    }
    std::size_t j;
    double s;
    locate(x[0], j, s);
    const double s2 = s * s;
    out[0] = ((6 * s2 - 6 * s) * (*v)[j] + (-6 * s2 + 6 * s) * (*v)[j + 1]) / dx + (3 * s2 - 4 * s + 1) * (*d)[j] +
             (3 * s2 - 2 * s) * (*d)[j + 1];
  });
  return g;
}

}  // namespace fields

// Range check on a sample of points; returns the largest excursion outside
// [lo, hi] (0 when none).
template <class Points>
double range_violation(const ScalarField& f, const Points& points) {
  double worst = 0.0;
  for (const auto& p : points) {
    const double y = f(std::span<const double>(p));
    worst = std::max({worst, f.lo() - y, y - f.hi()});
  }
  return worst;
}

}  // namespace gaussgame
