#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gaussgame/approximation.hpp"
#include "gaussgame/coupling.hpp"
#include "gaussgame/envelope.hpp"
#include "gaussgame/frame.hpp"
#include "gaussgame/inequalities.hpp"

namespace gg = gaussgame;

namespace {

double at(const gg::ScalarField& f, double x) { return f(std::span<const double>(&x, 1)); }
double at2(const gg::ScalarField& f, double x, double y) {
  const double p[2] = {x, y};
  return f(std::span<const double>(p, 2));
}
double tat(const gg::ScalarField& f, const gg::Transform& t, double x) {
  return f.transformed(t, std::span<const double>(&x, 1)).value;
}

// Phi^{-1} by bisection on erfc in long double; independent of the library's
// rational approximation.
double probit_ref(double p) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (0.5L * std::erfc(-mid / std::sqrt(2.0L)) < static_cast<long double>(p)) lo = mid; else hi = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

std::string what_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

// --- frames ------------------------------------------------------------------

TEST(ProjectionFrame, ShippedFramesResolveTheIdentity) {
  EXPECT_LT(gg::ProjectionFrame::identity(2, {0.3, 0.7}).resolution_defect(), 1e-12);
  EXPECT_LT(gg::ProjectionFrame::orthogonal(3).resolution_defect(), 1e-12);
  const auto tri = gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0);
  EXPECT_LT(tri.resolution_defect(), 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(tri.coisometry_defect(i), 1e-12);
}

TEST(ProjectionFrame, ScalingAnyWeightByOnePercentIsRejected) {
  for (const auto& frame : {gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0), gg::ProjectionFrame::orthogonal(2),
                            gg::ProjectionFrame::identity(1, {0.4, 0.6})}) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      auto lambdas = frame.lambdas();
      lambdas[i] *= 1.01;
      std::vector<Eigen::MatrixXd> maps;
      for (std::size_t j = 0; j < frame.size(); ++j) maps.push_back(frame.map(j));
      EXPECT_THROW(gg::ProjectionFrame(frame.dimension(), lambdas, maps), gg::FrameError);
    }
  }
}

TEST(ProjectionFrame, RejectsNonCoisometries) {
  Eigen::MatrixXd b(1, 2);
  b << 1.0, 0.1;
  EXPECT_THROW(gg::ProjectionFrame(2, {1.0}, {b}), gg::FrameError);
  EXPECT_THROW(gg::ProjectionFrame(2, {-1.0}, {Eigen::MatrixXd::Identity(2, 2)}), gg::FrameError);
}

TEST(ProjectionFrame, TextRoundTrip) {
  const auto tri = gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0);
  const auto back = gg::ProjectionFrame::parse(tri.to_text());
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.lambda(i), tri.lambda(i));
    EXPECT_EQ((back.map(i) - tri.map(i)).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_NE(what_of([] { gg::ProjectionFrame::parse("2"); }).find("header"), std::string::npos);
  EXPECT_NE(what_of([] { gg::ProjectionFrame::parse("1 2\n1 1\n1"); }).find("fewer than 2"), std::string::npos);
  EXPECT_NE(what_of([] { gg::ProjectionFrame::parse("1 1\n1 1\n1\nx"); }).find("trailing"), std::string::npos);
  EXPECT_THROW(gg::ProjectionFrame::from_file("/nonexistent/frame.txt"), gg::FrameError);
}

// --- minimal_h ---------------------------------------------------------------

TEST(MinimalH, SingleIdentityFactorReturnsTheField) {
  const auto f = gg::fields::bump(0.3, 0.8, 0.1, 0.9);
  const auto h = gg::minimal_h({f}, gg::ProjectionFrame::identity(1, {1.0}), gg::Transform::probit());
  for (double x : {-3.0, -0.5, 0.0, 0.3, 1.7, 4.0}) EXPECT_NEAR(at(h, x), at(f, x), 1e-12);
}

TEST(MinimalH, ConstantsCombineInTransformedScale) {
  const double c = 0.5;
  const auto t = gg::Transform::phi_c(c);
  const std::vector<double> p{0.2, 0.5, 0.9};
  std::vector<gg::ScalarField> fs;
  double sum = 0.0;
  for (double pi : p) {
    fs.push_back(gg::ScalarField::constant(1, pi));
    sum += 2.0 / 3.0 * t.apply(pi).value;
  }
  const auto h = gg::minimal_h(fs, gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0), t);
  for (auto [x, y] : std::vector<std::pair<double, double>>{{0, 0}, {1, -2}, {3, 3}}) {
    EXPECT_NEAR(at2(h, x, y), t.inverse(sum), 1e-12);
  }
}

TEST(MinimalH, MatchesExhaustiveGridSupOnTheSquare) {
  // h(z) = sup over lam x + (1 - lam) y = z; the maximizers stay inside [-4, 4]^2.
  const double lam = 0.35;
  const auto f = gg::fields::bump(0.5, 0.9, 0.05, 0.9), g = gg::fields::bump(-0.8, 1.3, 0.1, 0.8);
  const auto t = gg::Transform::probit();
  const auto h = gg::minimal_h({f, g}, gg::ProjectionFrame::identity(1, {lam, 1.0 - lam}), t);
  for (double z : {-1.0, -0.2, 0.0, 0.6}) {
    double best = -INFINITY, bx = 0.0, by = 0.0;
    for (double x = -4.0; x <= 4.0; x += 1e-4) {
      const double y = (z - lam * x) / (1.0 - lam);
      if (std::abs(y) > 4.0) continue;
      const double v = lam * tat(f, t, x) + (1.0 - lam) * tat(g, t, y);
      if (v > best) best = v, bx = x, by = y;
    }
    ASSERT_LT(std::max(std::abs(bx), std::abs(by)), 3.9) << "oracle maximizer must be interior, z=" << z;
    EXPECT_NEAR(tat(h, t, z), best, 1e-6) << "z=" << z;
    EXPECT_GE(tat(h, t, z), best - 1e-12) << "z=" << z;
  }
}

TEST(MinimalH, FindsSupremaApproachedAtInfinity) {
  // lam F(x) + mu G(y) on lam x + mu y = z: for z << 0 an interior local max
  // competes with x -> +inf, y -> -inf where both fields sit on plateaus.
  const double lam = 0.8, mu = 0.6;
  const auto f = gg::fields::erf_ramp(0.3, 0.8, 0.05, 0.95), g = gg::fields::bump(-0.2, 0.9, 0.1, 0.9);
  const auto E = gg::Envelope::two_coefficient(f, g, lam, mu);
  const double limit = lam * gg::phi_inv(0.95) + mu * gg::phi_inv(0.1);
  for (double z : {-14.0, -9.0, -4.0}) {
    const double v = E.transformed_value(std::vector<double>{z});
    EXPECT_GE(v, limit - 1e-9) << "z=" << z;
    EXPECT_LE(v, limit + 1e-9) << "z=" << z;
  }
}

TEST(MinimalH, EmptyConstraintSliceIsAnError) {
  const auto f = gg::fields::bump(0.0, 1.0, 0.1, 0.9, 2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 1.0;
  const std::string msg = what_of([&] { gg::Envelope({{f, A, 1.0}}, gg::Transform::probit()); });
  EXPECT_NE(msg.find("empty constraint slice"), std::string::npos);
}

// --- Ehrhard -----------------------------------------------------------------

TEST(Ehrhard, IdenticalFieldsWithHEqualToThemGiveEquality) {
  // h = f satisfies the hypothesis only when Phi^{-1} f is concave; the
  // unclipped erf profile is probit-linear.
  gg::InequalityOptions opt;
  opt.require_interior = false;
  const auto f = gg::fields::erf_ramp(0.3, 0.6);
  for (double lam : {0.0, 0.3, 0.5, 1.0}) {
    const auto r = gg::verify_ehrhard(f, f, f, lam, opt);
    EXPECT_EQ(r.verdict(), "PASS");
    EXPECT_NEAR(r.slack, 0.0, 1e-10);
  }
  // For any field the two sides coincide; the audit then judges the triple.
  const auto b = gg::fields::bump(0.2, 0.7, 0.1, 0.9);
  const auto r = gg::verify_ehrhard(b, b, b, 0.3);
  EXPECT_NEAR(r.slack, 0.0, 1e-10);
  EXPECT_EQ(r.verdict(), "INVALID_HYPOTHESIS");
}

TEST(Ehrhard, EnvelopeOfIdenticalFieldsDominatesThem) {
  const auto f = gg::fields::interval(-0.5, 1.0, 0.4, 0.05, 0.95);
  const auto r = gg::verify_ehrhard(f, f, 0.3);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_GE(r.slack, -1e-8);
}

TEST(Ehrhard, RandomSmoothPairAtLambdaPointThree) {
  const auto f = gg::fields::erf_ramp(0.4, 0.7, 0.02, 0.97), g = gg::fields::bump(-0.6, 1.1, 0.05, 0.85);
  const auto r = gg::verify_ehrhard(f, g, 0.3);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_GE(r.slack, -1e-8);
  EXPECT_EQ(r.audit.samples, 1000u + 4u + 4u + 1u);
}

TEST(Ehrhard, ParallelHalfspacesAreEqualityCases) {
  // int Phi((x - a)/s) dgamma = Phi(-a / sqrt(1 + s^2)), so Phi^{-1} of the
  // integral is linear in a and the inequality is an equality for every s.
  gg::InequalityOptions opt;
  opt.rule = gg::QuadratureRule::composite(12, 480, 8);
  opt.require_interior = false;
  for (double lam : {0.3, 0.5}) {
    for (double s : {0.2, 0.1, 0.05}) {
      const auto r = gg::verify_ehrhard(gg::fields::erf_ramp(0.4, s), gg::fields::erf_ramp(-0.7, s), lam, opt);
      EXPECT_EQ(r.verdict(), "PASS");
      EXPECT_LE(std::abs(r.slack), 1e-10) << "lam=" << lam << " s=" << s;
      EXPECT_NEAR(r.integrals[0].integral, gg::phi(-0.4 / std::sqrt(1 + s * s)), 1e-12);
      EXPECT_NEAR(r.integrals[1].integral, gg::phi(0.7 / std::sqrt(1 + s * s)), 1e-12);
    }
  }
}

TEST(Ehrhard, CurvedHalfspaceSlackVanishesWithSigma) {
  // Probit-quadratic translates: the envelope is the same profile at the
  // mixed center, and the triples approach parallel halfspaces.
  gg::InequalityOptions opt;
  opt.rule = gg::QuadratureRule::composite(12, 480, 8);
  opt.require_interior = false;
  const double lam = 0.3, a = 0.4, b = -0.7, m = lam * a + (1 - lam) * b;
  double prev = INFINITY;
  for (double s : {0.2, 0.1, 0.05}) {
    const auto f = gg::fields::probit_quadratic(a, s), g = gg::fields::probit_quadratic(b, s);
    const auto h = gg::minimal_h({f, g}, gg::ProjectionFrame::identity(1, {lam, 1 - lam}), gg::Transform::probit());
    for (double x : {-1.5, -0.3, 0.2, 1.0}) {
      EXPECT_NEAR(tat(h, gg::Transform::probit(), x), tat(gg::fields::probit_quadratic(m, s), gg::Transform::probit(), x),
                  1e-6);
    }
    const auto r = gg::verify_ehrhard(f, g, lam, opt);
    EXPECT_EQ(r.verdict(), "PASS");
    EXPECT_GT(r.slack, 0.0);
    EXPECT_LT(r.slack, prev);
    prev = r.slack;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(Ehrhard, InvalidHypothesisIsReportedApartFromFailure) {
  const auto f = gg::fields::bump(0.0, 1.0, 0.2, 0.8);
  const auto r = gg::verify_ehrhard(f, f, gg::ScalarField::constant(1, 0.2), 0.5);
  EXPECT_FALSE(r.audit.passed());
  EXPECT_EQ(r.verdict(), "INVALID_HYPOTHESIS");
  EXPECT_FALSE(r.passed());
}

TEST(Ehrhard, Preconditions) {
  const auto f = gg::fields::bump(0.0, 1.0, 0.2, 0.8);
  EXPECT_THROW(gg::verify_ehrhard(f, f, 1.2), gg::PreconditionError);
  EXPECT_THROW(gg::verify_ehrhard(gg::fields::erf_ramp(0.0, 1.0), f, 0.5), gg::RangeError);
}

TEST(Ehrhard, LogTransformPassesWheneverProbitDoes) {
  const double lam = 0.4;
  const auto f = gg::fields::bump(0.7, 0.8, 0.05, 0.95), g = gg::fields::interval(-1.0, 0.5, 0.3, 0.1, 0.9);
  const auto h = gg::minimal_h({f, g}, gg::ProjectionFrame::identity(1, {lam, 1 - lam}), gg::Transform::probit());
  const auto probit = gg::verify_ehrhard(f, g, h, lam);
  ASSERT_EQ(probit.verdict(), "PASS");
  const auto logr = gg::check_inequality("log", gg::ehrhard_terms(f, g, lam), h, gg::Transform::log());
  EXPECT_EQ(logr.verdict(), "PASS");
  EXPECT_GE(logr.slack, -1e-8);
}

// --- Borell ------------------------------------------------------------------

TEST(Borell, UnitCoefficientsOnSmoothedHalfspaces) {
  const auto f = gg::fields::halfspace(0.3, 0.5, 0.02), g = gg::fields::halfspace(-0.4, 0.7, 0.05);
  const auto r = gg::verify_borell(f, g, 1.0, 1.0);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_GE(r.slack, -1e-8);
}

TEST(Borell, SingleCoefficientReducesToMonotonicity) {
  const auto f = gg::fields::bump(0.1, 0.9, 0.1, 0.9), g = gg::fields::bump(-1.0, 0.5, 0.2, 0.6);
  const auto h = gg::Envelope::two_coefficient(f, g, 1.0, 0.0).field();
  for (double x : {-2.0, 0.0, 0.4, 3.0}) EXPECT_NEAR(at(h, x), at(f, x), 1e-12);
  const auto r = gg::verify_borell(f, g, f, 1.0, 0.0);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_NEAR(r.slack, 0.0, 1e-12);
}

TEST(Borell, InadmissibleCoefficientsNameTheCondition) {
  const auto f = gg::fields::bump(0.0, 1.0, 0.2, 0.8);
  EXPECT_NE(what_of([&] { gg::verify_borell(f, f, 2.0, 0.5); }).find("|lambda - mu| <= 1"), std::string::npos);
  EXPECT_NE(what_of([&] { gg::verify_borell(f, f, 0.4, 0.4); }).find("lambda + mu >= 1"), std::string::npos);
  EXPECT_THROW(gg::verify_borell(f, f, 2.0, 0.5), gg::AdmissibilityError);
  EXPECT_THROW(gg::coupled_payoffs({f, f, f}, 0.4, 0.4, {}), gg::AdmissibilityError);
}

TEST(Borell, CorrelationOfTheCoupling) {
  EXPECT_EQ(gg::borell_rho(0.5, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(gg::borell_rho(1.0, 1.0), -0.5);
  EXPECT_EQ(gg::borell_rho(1.0, 0.0), 1.0);
  EXPECT_NEAR(gg::borell_rho(0.8, 0.6), 0.0, 1e-15);
}

TEST(Borell, CoupledGamesOrderPathByPath) {
  const auto f = gg::fields::erf_ramp(0.3, 0.8, 0.05, 0.95), g = gg::fields::bump(-0.2, 0.9, 0.1, 0.9);
  gg::GameConfig cfg;
  cfg.dt = 1.0 / 128;
  cfg.paths = 800;
  cfg.seed = 5;
  for (auto [lam, mu] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {0.8, 0.6}}) {
    const auto fields = gg::borell_game_fields(f, g, lam, mu);
    const auto r = gg::coupled_payoffs(fields, lam, mu, cfg);
    EXPECT_LE(r.max_combination, 0.0);
    EXPECT_LT(r.max_state_gap, 1e-12);
    EXPECT_LE(lam * r.values[0] + mu * r.values[1], r.values[2]);
    ASSERT_EQ(r.estimates.size(), 3u);
  }
}

// --- frames with Phi_c -------------------------------------------------------

TEST(Gbl, ThreeProjectionFrameAtMidC) {
  const auto frame = gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0);
  const std::vector<gg::ScalarField> fs{gg::fields::bump(0.3, 0.8, 0.05, 1.0), gg::fields::logistic_ramp(-0.2, 0.5),
                                        gg::fields::interval(-1.0, 0.8, 0.3, 0.02, 0.98)};
  const auto r = gg::verify_gbl(frame, fs, 0.5);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_GE(r.slack, -1e-8);
}

TEST(Gbl, SingleFactorFrameWithHEqualToF) {
  const auto f = gg::fields::bump(0.0, 1.0, 0.1, 1.0);
  const auto r = gg::verify_gbl(gg::ProjectionFrame::identity(1, {1.0}), {f}, f, 0.3);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_NEAR(r.slack, 0.0, 1e-12);
}

TEST(Gbl, OrthogonalFrameReproducesTheProductMeasure) {
  // gamma_2(A1 x A2) = gamma_1(A1) gamma_1(A2) for A1 = [-0.5, 1], A2 = [-1, 0.3].
  const double exact = (gg::phi(1.0) - gg::phi(-0.5)) * (gg::phi(0.3) - gg::phi(-1.0));
  const auto frame = gg::ProjectionFrame::orthogonal(2);
  const std::vector<gg::ScalarField> fs{gg::fields::interval(-0.5, 1.0, 0.02), gg::fields::interval(-1.0, 0.3, 0.02)};
  gg::InequalityOptions opt;
  opt.rule = gg::QuadratureRule::composite(8, 400, 4);
  const auto r = gg::verify_gbl(frame, fs, 0.5, opt);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_NEAR(r.integrals[2].integral, exact, 1e-3);
}

TEST(Gbl, SlackIsMonotoneInH) {
  const double c = 0.4;
  const auto t = gg::Transform::phi_c(c);
  const auto frame = gg::ProjectionFrame::identity(1, {0.5, 0.5});
  const std::vector<gg::ScalarField> fs{gg::fields::bump(0.5, 0.8, 0.1, 1.0), gg::fields::bump(-0.5, 0.8, 0.1, 1.0)};
  const auto h = gg::minimal_h(fs, frame, t);
  const gg::ScalarField bigger(1, [h](std::span<const double> x) { return std::min(1.0, h(x) + 0.05); }, h.lo(), 1.0,
                               gg::Smoothness::lipschitz, "bigger");
  const auto r = gg::verify_gbl(frame, fs, h, c), r2 = gg::verify_gbl(frame, fs, bigger, c);
  EXPECT_EQ(r.verdict(), "PASS");
  EXPECT_EQ(r2.verdict(), "PASS");
  EXPECT_GE(r2.slack, r.slack);
}

TEST(Gbl, RejectsMismatchedFields) {
  const auto frame = gg::ProjectionFrame::orthogonal(2);
  EXPECT_THROW(gg::verify_gbl(frame, {gg::fields::bump(0, 1, 0.1, 0.9)}, 0.5), gg::PreconditionError);
  EXPECT_THROW(gg::verify_gbl(frame, {gg::fields::bump(0, 1, 0.1, 0.9, 2), gg::fields::bump(0, 1, 0.1, 0.9)}, 0.5),
               gg::PreconditionError);
}

// --- limits ------------------------------------------------------------------

TEST(Limits, RatioApproachesOneAsCDecreases) {
  const std::vector<double> cs{1e-4, 1e-8, 1e-12};
  const auto tab = gg::limit_recovery(cs, 0.5);
  ASSERT_EQ(tab.rows.size(), 3u);
  EXPECT_TRUE(tab.strictly_decreasing);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double c = cs[i];
    const double ref = (probit_ref(0.5 * c) - probit_ref(c)) * std::sqrt(-2.0 * std::log(c)) / std::log(0.5);
    EXPECT_NEAR(tab.rows[i].ratio, ref, 1e-9) << "c=" << c;
  }
  EXPECT_LE(tab.rows.back().deviation, 0.15);
}

TEST(Limits, XEqualToOneGivesAnExactZeroRow) {
  const auto tab = gg::limit_recovery({1e-3, 1e-6}, 1.0);
  for (const auto& r : tab.rows) {
    EXPECT_TRUE(r.exact_zero);
    EXPECT_EQ(r.phic_inv, 0.0);
  }
  EXPECT_FALSE(tab.strictly_decreasing);
}

TEST(Limits, UpperEndMatchesTheDefinition) {
  const auto tab = gg::limit_recovery({1e-4}, 0.3);
  EXPECT_EQ(tab.upper_c, 0.999);
  EXPECT_LE(tab.upper_difference, 1e-2);
  EXPECT_NEAR(tab.upper_value, probit_ref(0.3 * 0.999) - probit_ref(0.999), 1e-9);
}

TEST(Limits, Preconditions) {
  EXPECT_THROW(gg::limit_recovery({1e-8, 1e-4}, 0.5), gg::PreconditionError);
  EXPECT_THROW(gg::limit_recovery({1e-4}, 0.0), gg::RangeError);
  EXPECT_THROW(gg::limit_recovery({1.5}, 0.5), gg::RangeError);
}

// --- approximations ------------------------------------------------------------

TEST(SupConvolution, ConstantIsFixed) {
  const auto t = gg::Transform::phi_c(0.3);
  const auto f = gg::ScalarField::constant(1, 0.4);
  for (double s : {0.1, 1.0}) {
    const auto fs = gg::sup_convolution(f, s, t);
    for (double x : {-5.0, 0.0, 2.5}) EXPECT_NEAR(at(fs, x), 0.4, 1e-14);
  }
}

TEST(SupConvolution, StepMatchesTheClosedFormCone) {
  // T(f^s)(x) = max(T(f(x)), T(0.9) - max(0, -x) / s) for the step 0.2 -> 0.9 at 0.
  const auto t = gg::Transform::phi_c(0.5);
  const auto f = gg::fields::step(0.0, 0.2, 0.9);
  const gg::ConeGrid grid;
  for (double s : {0.25, 0.5, 2.0}) {
    const auto fs = gg::sup_convolution(f, s, t, grid);
    for (double x = -3.0; x <= 1.0; x += 0.0137) {
      const double closed = std::max(t.apply(x < 0 ? 0.2 : 0.9).value, t.apply(0.9).value - std::max(0.0, -x) / s);
      EXPECT_NEAR(tat(fs, t, x), closed, grid.dx / s + 1e-12) << "s=" << s << " x=" << x;
    }
  }
}

TEST(SupConvolution, LipschitzDominatingAndOrdered) {
  const auto t = gg::Transform::probit();
  const auto f = gg::fields::interval(-0.4, 0.6, 0.05, 0.1, 0.9);
  const gg::ConeGrid grid{-6.0, 6.0, 1e-3};
  const auto f1 = gg::sup_convolution(f, 0.2, t, grid), f2 = gg::sup_convolution(f, 0.5, t, grid);
  const auto f0 = gg::sup_convolution(f, 0.02, t, grid);
  for (std::size_t j = 0; j < grid.nodes(); j += 97) {
    const double x = grid.node(j);
    EXPECT_GE(at(f1, x), at(f, x) - 1e-15);
    EXPECT_LE(at(f1, x), at(f2, x) + 1e-15);
    EXPECT_LE(at(f0, x), at(f1, x) + 1e-15);
    // Shrinking s moves f^s down toward f.
    EXPECT_LE(at(f0, x) - at(f, x), at(f1, x) - at(f, x) + 1e-15);
    const double y = x + 0.0371;
    EXPECT_LE(std::abs(tat(f1, t, y) - tat(f1, t, x)), 0.0371 / 0.2 + 1e-12);
  }
}

TEST(LipschitzLowerApprox, LipschitzFieldIsReproducedOnTheNodes) {
  const auto f = gg::fields::erf_ramp(0.2, 1.0, 0.1, 0.9);  // Lipschitz constant 0.8 phi(0) < 1
  const gg::ConeGrid grid{-6.0, 6.0, 1e-3};
  const auto fk = gg::lipschitz_lower_approx(f, 1.0, grid);
  for (std::size_t j = 0; j < grid.nodes(); j += 31) EXPECT_NEAR(at(fk, grid.node(j)), at(f, grid.node(j)), 1e-10);
  EXPECT_EQ(*fk.lipschitz(), 1.0);
}

TEST(LipschitzLowerApprox, StepGivesTheConeProfile) {
  const auto f = gg::fields::step(0.0, 0.2, 0.9);
  const gg::ConeGrid grid{-4.0, 4.0, 1e-3};
  for (double k : {0.5, 2.0, 10.0}) {
    const auto fk = gg::lipschitz_lower_approx(f, k, grid);
    for (double x = -2.0; x <= 2.0; x += 0.0173) {
      // Grid inf oracle: the cone rises from the last node left of the jump.
      double best = INFINITY;
      for (std::size_t j = 0; j < grid.nodes(); ++j) {
        const double y = grid.node(j);
        best = std::min(best, at(f, y) + k * std::abs(x - y));
      }
      EXPECT_NEAR(at(fk, x), best, 1e-12) << "k=" << k << " x=" << x;
      EXPECT_NEAR(at(fk, x), std::min(0.9, 0.2 + k * std::max(0.0, x)), k * grid.dx + 1e-12);
    }
  }
}

TEST(LipschitzLowerApprox, IncreasesWithKAndStaysBelowF) {
  const auto f = gg::fields::step(0.5, 0.7, 0.1);
  const gg::ConeGrid grid{-3.0, 3.0, 1e-3};
  const auto a = gg::lipschitz_lower_approx(f, 1.0, grid), b = gg::lipschitz_lower_approx(f, 4.0, grid);
  for (std::size_t j = 0; j < grid.nodes(); j += 13) {
    const double x = grid.node(j);
    EXPECT_LE(at(a, x), at(b, x) + 1e-15);
    EXPECT_LE(at(b, x), at(f, x) + 1e-15);
  }
}
