#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "gaussgame/gaussian.hpp"
#include "gaussgame/quadrature.hpp"
#include "gaussgame/rng.hpp"

namespace gg = gaussgame;

namespace {

// Independent oracle: Maclaurin series of erf, used only for moderate |x|.
double erf_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

double cdf_oracle(double x) { return 0.5 * (1.0 + erf_series(x / std::numbers::sqrt2)); }

double bisect_cdf(double p, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf_oracle(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double hermite_prob(int k, double x) {
  double h0 = 1.0, h1 = x;
  if (k == 0) return h0;
  for (int j = 1; j < k; ++j) {
    const double h2 = x * h1 - j * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace

TEST(Phi, CentreAndSymmetry) {
  EXPECT_EQ(gg::phi(0.0), 0.5);
  for (double x : {0.1, 0.5, 1.0, 2.5, 4.0, 7.5, 12.0}) {
    EXPECT_NEAR(gg::phi(x) + gg::phi(-x), 1.0, 1e-15) << x;
  }
}

TEST(Phi, NinetyFifthPercentileMatchesSeriesOracle) {
  // Frozen from the erf-series bisection below.
  const double x95 = bisect_cdf(0.95, 1.0, 2.0);
  EXPECT_NEAR(x95, 1.6448536269514722, 1e-13);
  EXPECT_NEAR(gg::phi(1.6448536269514722), 0.95, 1e-15);
}

TEST(Phi, AgreesWithSeriesOracleOnModerateRange) {
  // The alternating series loses digits to cancellation past |x| ~ 3.5.
  for (double x = -3.0; x <= 3.0; x += 0.125) EXPECT_NEAR(gg::phi(x), cdf_oracle(x), 2e-15) << x;
}

TEST(PhiInv, KnownValues) {
  EXPECT_EQ(gg::phi_inv(0.5), 0.0);
  EXPECT_NEAR(gg::phi_inv(gg::phi(2.0)), 2.0, 1e-12);
  // Newton iteration on the series CDF oracle gives -3 for this probability.
  double x = -2.5;
  const double p = 0.0013498980316300933;
  for (int i = 0; i < 50; ++i) {
    x -= (cdf_oracle(x) - p) / gg::normal_pdf(x);
  }
  EXPECT_NEAR(x, -3.0, 1e-9);
  EXPECT_NEAR(gg::phi_inv(p), -3.0, 1e-9);
}

TEST(PhiInv, RoundTripBothDirections) {
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    EXPECT_NEAR(gg::phi_inv(gg::phi(x)), x, 1e-12 * std::max(1.0, 1.0 / (1e-300 + std::abs(gg::normal_pdf(x)) * 1e4)))
        << x;
  }
  for (double p : {1e-10, 1e-7, 1e-3, 0.2, 0.5, 0.77, 0.999, 1.0 - 1e-10}) {
    EXPECT_NEAR(gg::phi(gg::phi_inv(p)), p, 1e-12) << p;
  }
}

TEST(PhiInv, StrictModeRejectsEndpoints) {
  EXPECT_THROW(gg::phi_inv(0.0), gg::RangeError);
  EXPECT_THROW(gg::phi_inv(1.0), gg::RangeError);
  EXPECT_THROW(gg::phi_inv(-0.1), gg::RangeError);
}

TEST(PhiInv, ClampedModeFlagsSaturation) {
  const auto lo = gg::phi_inv_clamped(0.0);
  EXPECT_TRUE(lo.saturated);
  EXPECT_NEAR(lo.value, gg::phi_inv(gg::kProbitClip), 1e-12);
  const auto hi = gg::phi_inv_clamped(1.0);
  EXPECT_TRUE(hi.saturated);
  EXPECT_NEAR(hi.value, -lo.value, 1e-12);
  const auto mid = gg::phi_inv_clamped(0.3);
  EXPECT_FALSE(mid.saturated);
  EXPECT_EQ(mid.value, gg::phi_inv(0.3));
}

TEST(PhiC, DefinitionAndEndpoint) {
  for (double c : {1e-12, 0.1, 0.5, 0.9, 0.999}) {
    gg::PhiCTransform t(c);
    EXPECT_EQ(gg::phi_c_inv(1.0, t), 0.0);
  }
  gg::PhiCTransform half(0.5);
  EXPECT_NEAR(gg::phi_c_inv(0.5, half), gg::phi_inv(0.25), 1e-15);
  EXPECT_FALSE(half.inverse_or_sentinel(0.0).has_value());
  EXPECT_THROW(gg::phi_c_inv(0.0, half), gg::RangeError);
  EXPECT_THROW(gg::PhiCTransform(1.0), gg::RangeError);
}

TEST(PhiC, SmallCLimitRatio) {
  gg::PhiCTransform t(1e-8);
  const double ratio = gg::phi_c_inv(0.5, t) * std::sqrt(-2.0 * std::log(1e-8)) / std::log(0.5);
  EXPECT_NEAR(ratio, 1.0, 0.15);
}

TEST(PhiC, MonotoneNegativeAndRoundTrip) {
  for (double c : {1e-6, 0.1, 0.5, 0.9}) {
    gg::PhiCTransform t(c);
    double prev = -INFINITY;
    for (int i = 1; i <= 1000; ++i) {
      const double x = i / 1000.0;
      const double y = t.inverse(x);
      EXPECT_GT(y, prev);
      if (x < 1.0) EXPECT_LT(y, 0.0);
      prev = y;
    }
    for (double x : {1e-6, 1e-4, 0.01, 0.3, 0.7, 0.99, 1.0}) {
      EXPECT_NEAR(t.forward(t.inverse(x)), x, 1e-10) << c << " " << x;
    }
  }
}

TEST(LambertW, KnownValuesAndIdentity) {
  EXPECT_EQ(gg::lambert_w(0.0), 0.0);
  EXPECT_NEAR(gg::lambert_w(std::numbers::e), 1.0, 1e-14);
  EXPECT_NEAR(gg::lambert_w(2.0 * std::exp(2.0)), 2.0, 1e-12);
  for (double y : {1e-12, 1e-4, 0.3, 1.0, 5.0, 42.0, 1e3, 1e8}) {
    const double w = gg::lambert_w(y);
    EXPECT_NEAR(w * std::exp(w), y, 1e-12 * std::max(1.0, y)) << y;
  }
  EXPECT_THROW(gg::lambert_w(-0.1), gg::RangeError);
}

TEST(Quadrature, HermiteMoments) {
  for (std::size_t order : {8u, 32u, 64u, 128u}) {
    const auto rule = gg::QuadratureRule::gauss_hermite(order);
    double wsum = 0.0;
    for (double w : rule.weights()) {
      EXPECT_GT(w, 0.0);
      wsum += w;
    }
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    auto moment = [&](int k) {
      return rule.integrate([k](std::span<const double> x) { return std::pow(x[0], k); }, 1);
    };
    EXPECT_NEAR(moment(1), 0.0, 1e-12);
    EXPECT_NEAR(moment(2), 1.0, 1e-12);
    EXPECT_NEAR(moment(3), 0.0, 1e-12);
    EXPECT_NEAR(moment(4), 3.0, 1e-12);
  }
}

TEST(Quadrature, HermitePolynomialsIntegrateToZero) {
  const std::size_t m = 16;
  const auto rule = gg::QuadratureRule::gauss_hermite(m);
  for (int k = 1; k <= static_cast<int>(2 * m - 1); ++k) {
    const double v = rule.integrate([k](std::span<const double> x) { return hermite_prob(k, x[0]); }, 1);
    // He_k grows like sqrt(k!) so compare relative to its L2 norm.
    double norm = 1.0;
    for (int j = 2; j <= k; ++j) norm *= j;
    EXPECT_NEAR(v / std::sqrt(norm), 0.0, 1e-10) << k;
  }
}

TEST(Quadrature, TensorProductAndComposite) {
  const auto rule = gg::QuadratureRule::gauss_hermite(20);
  const double v = rule.integrate([](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] * x[2] * x[2]; }, 3);
  EXPECT_NEAR(v, 2.0, 1e-12);
  const auto comp = gg::QuadratureRule::composite(12.0, 240, 10);
  const double step = comp.integrate([](std::span<const double> x) { return x[0] < 0.3 ? 1.0 : 0.0; }, 1);
  // Panel edges are 0.1 apart, so 0.3 is an edge and the step is integrated exactly.
  EXPECT_NEAR(step, gg::phi(0.3), 1e-12);
  EXPECT_THROW(rule.integrate([](std::span<const double>) { return 1.0; }, 4), gg::PreconditionError);
}

TEST(Quadrature, MonteCarloFallbackAboveThree) {
  EXPECT_THROW(gg::GaussianIntegrator(gg::QuadratureRule::gauss_hermite(8), 4), gg::PreconditionError);
  gg::GaussianIntegrator::Options opt;
  opt.allow_monte_carlo = true;
  opt.mc_samples = 40000;
  gg::GaussianIntegrator integ(gg::QuadratureRule::gauss_hermite(8), 5, opt);
  const auto est = integ.integrate([](std::span<const double> x) { return x[0] * x[0] + x[4]; });
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_EQ(est.quadrature_order, 0u);
  EXPECT_NEAR(est.value, 1.0, 4.0 * est.std_error + 1e-12);
}

TEST(Rng, PhiloxKnownAnswers) {
  // Random123 known-answer vectors for philox4x32-10.
  const auto zero = gg::Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero, (gg::Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  const auto ones =
      gg::Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones, (gg::Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  const auto pi = gg::Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi, (gg::Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  gg::NormalSampler a(gg::RngStream(7, 3)), b(gg::RngStream(7, 3)), c(gg::RngStream(7, 4));
  std::vector<double> xa(1000), xb(1000), xc(1000);
  a.fill(xa);
  b.fill(xb);
  c.fill(xc);
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
  double cross = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) cross += xa[i] * xc[i];
  EXPECT_LT(std::abs(cross / 1000.0), 4.0 / std::sqrt(1000.0));
}

TEST(Rng, NormalMoments) {
  gg::NormalSampler s(gg::RngStream(11, 0));
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(CorrelatedIncrements, PerfectCorrelationIsExact) {
  gg::NormalSampler s(gg::RngStream(1, 0));
  for (int i = 0; i < 100; ++i) {
    auto [dw, dwt] = gg::correlated_increments(1.0, 1e-3, 3, s);
    EXPECT_EQ(dw, dwt);
  }
  EXPECT_THROW(gg::correlated_increments(1.01, 1e-3, 1, s), gg::PreconditionError);
}

TEST(CorrelatedIncrements, IndependentWhenRhoZero) {
  gg::NormalSampler s(gg::RngStream(2, 0));
  const int n = 1000000;
  const double dt = 1e-3;
  double cross = 0.0;
  std::vector<double> dw(1), dwt(1);
  for (int i = 0; i < n; ++i) {
    gg::correlated_increments(0.0, dt, s, dw, dwt);
    cross += dw[0] * dwt[0] / dt;
  }
  EXPECT_NEAR(cross / n, 0.0, 3.0 / std::sqrt(n));
}

TEST(CorrelatedIncrements, AdmissibleCombinationIsBrownian) {
  // lambda = mu = 1 gives rho = -1/2 and lambda W + mu W~ is again standard.
  const double lambda = 1.0, mu = 1.0;
  const double rho = (1.0 - lambda * lambda - mu * mu) / (2.0 * lambda * mu);
  EXPECT_DOUBLE_EQ(rho, -0.5);
  for (auto [l, m] : {std::pair{1.0, 1.0}, std::pair{0.7, 0.6}, std::pair{1.2, 0.5}}) {
    const double r = (1.0 - l * l - m * m) / (2.0 * l * m);
    gg::NormalSampler s(gg::RngStream(3, 0));
    const int steps = 100000;
    const std::size_t n = 2;
    const double dt = 1e-3;
    std::vector<double> dw(n), dwt(n);
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < steps; ++k) {
      gg::correlated_increments(r, dt, s, dw, dwt);
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double bar = l * dw[i] + m * dwt[i];
        sq += bar * bar;
      }
      sum += sq;
      sum2 += sq * sq;
    }
    const double mean = sum / steps;
    const double sd = std::sqrt(sum2 / steps - mean * mean);
    EXPECT_NEAR(mean, n * dt, 3.0 * sd / std::sqrt(steps)) << l << "," << m;
  }
}
