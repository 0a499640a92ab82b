#pragma once

// Scalar Gaussian primitives: the standard normal CDF and its inverse, the
// shifted-and-rescaled inverse Phi_c^{-1}(x) = Phi^{-1}(cx) - Phi^{-1}(c), and
// the principal branch of Lambert W on [0, inf).

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "gaussgame/errors.hpp"

namespace gaussgame {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Probabilities closer than this to 0 or 1 are clamped by phi_inv_clamped().
inline constexpr double kProbitClip = 1e-15;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Standard normal CDF through erfc, so both tails keep relative accuracy and
// phi(-x) + phi(x) == 1 up to a couple of ulps.
inline double phi(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

namespace detail {

// Wichura, AS 241 (PPND16). Relative accuracy about 1e-16 over (0, 1).
inline double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) < 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r < 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

}  // namespace detail

// Inverse CDF on the open interval (0, 1); anything else is rejected.
inline double phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw RangeError("phi_inv: probability must lie in (0,1), got " + std::to_string(p));
  }
  if (p > 0.5) {
    // 1 - p is exact for p > 0.5 (Sterbenz), so evaluate in the lower tail.
    return -detail::ppnd16(1.0 - p);
  }
  return detail::ppnd16(p);
}

// Phi^{-1}(1 - q) evaluated from the complement q, accurate when q is tiny.
inline double phi_inv_upper(double q) { return -phi_inv(q); }

struct ClampedProbit {
  double value = 0.0;
  bool saturated = false;
};

// Clamping variant: inputs outside [kProbitClip, 1 - kProbitClip] are moved to
// the nearest bound and flagged so reports can surface the saturation.
inline ClampedProbit phi_inv_clamped(double p) {
  if (std::isnan(p)) throw NumericalError("phi_inv_clamped: NaN probability");
  if (p < kProbitClip) return {detail::ppnd16(kProbitClip), true};
  if (p > 1.0 - kProbitClip) return {-detail::ppnd16(kProbitClip), true};
  return {phi_inv(p), false};
}

// The Phi_c family used by the Gaussian Barthe-type inequalities.
class PhiCTransform {
 public:
  explicit PhiCTransform(double c) : c_(c) {
    if (!(c > 0.0 && c < 1.0)) {
      throw RangeError("PhiCTransform: c must lie in (0,1), got " + std::to_string(c));
    }
    shift_ = phi_inv(c);
  }

  double c() const noexcept { return c_; }
  double shift() const noexcept { return shift_; }  // Phi^{-1}(c)

  // Phi_c^{-1}(x) = Phi^{-1}(cx) - Phi^{-1}(c) for x in (0,1]. x = 0 is the -inf
  // sentinel and must go through inverse_or_sentinel().
  double inverse(double x) const {
    if (!(x > 0.0 && x <= 1.0)) {
      throw RangeError("phi_c_inv: argument must lie in (0,1], got " + std::to_string(x));
    }
    if (x == 1.0) return 0.0;
    return phi_inv(c_ * x) - shift_;
  }

  std::optional<double> inverse_or_sentinel(double x) const {
    if (x == 0.0) return std::nullopt;
    return inverse(x);
  }

  // Phi_c(y) = Phi(y + Phi^{-1}(c)) / c, the inverse map on (-inf, 0].
  double forward(double y) const {
    if (y > 0.0) {
      throw RangeError("phi_c: argument must be <= 0, got " + std::to_string(y));
    }
    return std::min(1.0, phi(y + shift_) / c_);
  }

 private:
  double c_;
  double shift_ = 0.0;
};

inline double phi_c_inv(double x, const PhiCTransform& t) { return t.inverse(x); }
inline double phi_c(double y, const PhiCTransform& t) { return t.forward(y); }

// Principal branch W(y) for y >= 0 (W(y) e^{W(y)} = y), by Halley iteration.
inline double lambert_w(double y) {
  if (!(y >= 0.0)) throw RangeError("lambert_w: argument must be >= 0, got " + std::to_string(y));
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;
  double w = y < std::numbers::e ? std::log1p(y) * (1.0 - std::log1p(std::log1p(y)) / (2.0 + std::log1p(y)))
                                 : std::log(y) - std::log(std::log(y));
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double g = w * ew - y;
    const double wp1 = w + 1.0;
    const double step = g / (ew * wp1 - (w + 2.0) * g / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

}  // namespace gaussgame
