#pragma once

// Numerical checks of the functional Gaussian Brunn-Minkowski family:
//
//   sum_i w_i T(int f_i dgamma_{n_i}) <= T(int h dgamma_n)
//
// under the pointwise hypothesis sum_i w_i T(f_i(x_i)) <= T(h(sum_i A_i x_i)).
// Ehrhard: T = Phi^{-1}, A = (lambda, 1 - lambda). Borell: T = Phi^{-1},
// A = (lambda, mu). Frames: T = Phi_c^{-1}, A_i = lambda_i B_i^*.
//
// The hypothesis audit and the integral comparison share no intermediate
// values: the audit evaluates the fields directly on sampled tuples.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gaussgame/coupling.hpp"
#include "gaussgame/envelope.hpp"
#include "gaussgame/errors.hpp"
#include "gaussgame/frame.hpp"
#include "gaussgame/quadrature.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

struct InequalityOptions {
  QuadratureRule rule = QuadratureRule::gauss_hermite(kDefaultQuadratureOrder);
  bool allow_monte_carlo = false;
  std::size_t audit_samples = 1000;
  double audit_box = 5.0;
  double audit_tolerance = 1e-9;
  double slack_tolerance = 1e-8;
  // Ehrhard/Borell fields must stay in [eps, 1 - eps]. The parallel-halfspace
  // equality profiles Phi((x - a)/sigma) only live in (0, 1) and switch this off.
  bool require_interior = true;
  EnvelopeOptions envelope;
};

struct IntegralCheck {
  std::string name;
  double integral = 0.0;
  double error = 0.0;  // |rule - coarsened rule|, or the Monte Carlo standard error
  double transformed = 0.0;
};

struct HypothesisAudit {
  std::size_t samples = 0;
  double tolerance = 0.0;
  double max_violation = -std::numeric_limits<double>::infinity();  // max of lhs - rhs
  std::vector<double> worst_tuple;
  bool passed() const noexcept { return max_violation <= tolerance; }
};

struct InequalityReport {
  std::string kind;
  std::string transform;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double tolerance = 0.0;
  std::vector<IntegralCheck> integrals;  // the f_i in order, then h
  HypothesisAudit audit;
  std::vector<std::pair<std::string, double>> parameters;

  bool inequality_holds() const noexcept { return slack >= -tolerance; }
  bool passed() const noexcept { return inequality_holds() && audit.passed(); }
  // PASS, or which of the two independent checks failed.
  std::string verdict() const {
    if (!audit.passed()) return "INVALID_HYPOTHESIS";
    return inequality_holds() ? "PASS" : "FAIL";
  }
};

namespace detail {

inline double radical_inverse(std::size_t i, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

inline std::size_t nth_prime(std::size_t k) {
  static constexpr std::array<std::size_t, 16> p{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (k >= p.size()) throw PreconditionError("Halton audit supports at most 16 coordinates");
  return p[k];
}

// Halton points in [-box, box]^dim (skipping the origin-heavy start), then the
// corners, the axis points and the origin.
inline std::vector<std::vector<double>> audit_points(std::size_t dim, std::size_t count, double box) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] = box * (2.0 * radical_inverse(i + 20, nth_prime(d)) - 1.0);
    pts.push_back(std::move(p));
  }
  if (dim <= 10) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
      std::vector<double> p(dim);
      for (std::size_t d = 0; d < dim; ++d) p[d] = (mask >> d) & 1 ? box : -box;
      pts.push_back(std::move(p));
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    for (double s : {-box, box}) {
      std::vector<double> p(dim, 0.0);
      p[d] = s;
      pts.push_back(std::move(p));
    }
  }
  pts.emplace_back(dim, 0.0);
  return pts;
}

inline IntegralCheck integral_check(const std::string& name, const ScalarField& f, const Transform& t,
                                    const InequalityOptions& opt) {
  IntegralCheck ic;
  ic.name = name;
  const std::size_t n = f.dimension();
  GaussianIntegrator::Options io{opt.allow_monte_carlo, 20000, 0x5eed};
  GaussianIntegrator fine(opt.rule, n, io);
  const auto est = fine.integrate([&](std::span<const double> x) { return f(x); });
  ic.integral = est.value;
  if (fine.uses_monte_carlo()) {
    ic.error = est.std_error;
  } else {
    GaussianIntegrator coarse(opt.rule.coarsened(), n, io);
    ic.error = std::abs(coarse.integrate([&](std::span<const double> x) { return f(x); }).value - est.value);
  }
  ic.transformed = t.apply(std::clamp(ic.integral, 0.0, 1.0)).value;
  return ic;
}

}  // namespace detail

// One field in a weighted tuple: contributes w T(f(z)) on the left and A z to
// the argument of h.
struct TupleTerm {
  ScalarField f;
  Eigen::MatrixXd A;  // n x n_i
  double weight = 0.0;
};

// Max over sampled tuples of sum_i w_i T(f_i(z_i)) - T(h(sum_i A_i z_i)).
inline HypothesisAudit audit_hypothesis(const std::vector<TupleTerm>& terms, const ScalarField& h, const Transform& t,
                                        const InequalityOptions& opt) {
  std::size_t dim = 0;
  for (const auto& term : terms) dim += term.f.dimension();
  HypothesisAudit a;
  a.tolerance = opt.audit_tolerance;
  const auto pts = detail::audit_points(dim, opt.audit_samples, opt.audit_box);
  Eigen::VectorXd x(static_cast<Eigen::Index>(h.dimension()));
  for (const auto& z : pts) {
    double lhs = 0.0;
    x.setZero();
    std::size_t off = 0;
    for (const auto& term : terms) {
      const std::size_t ni = term.f.dimension();
      const std::span<const double> zi(z.data() + off, ni);
      if (term.weight != 0.0) lhs += term.weight * term.f.transformed(t, zi).value;
      x += term.A * Eigen::Map<const Eigen::VectorXd>(zi.data(), static_cast<Eigen::Index>(ni));
      off += ni;
    }
    const double rhs = h.transformed(t, std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))).value;
    const double v = lhs - rhs;
    ++a.samples;
    if (v > a.max_violation) {
      a.max_violation = v;
      a.worst_tuple = z;
    }
  }
  return a;
}

// The general comparison for an explicit h.
inline InequalityReport check_inequality(const std::string& kind, const std::vector<TupleTerm>& terms,
                                         const ScalarField& h, const Transform& t, const InequalityOptions& opt = {}) {
  if (terms.empty()) throw PreconditionError("inequality check needs at least one field");
  for (const auto& term : terms) {
    if (static_cast<std::size_t>(term.A.rows()) != h.dimension() ||
        static_cast<std::size_t>(term.A.cols()) != term.f.dimension()) {
      throw PreconditionError("inequality check: inconsistent dimensions");
    }
  }
  InequalityReport r;
  r.kind = kind;
  r.transform = t.name();
  r.tolerance = opt.slack_tolerance;
  r.audit = audit_hypothesis(terms, h, t, opt);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    r.integrals.push_back(detail::integral_check("f" + std::to_string(i + 1), terms[i].f, t, opt));
    r.lhs += terms[i].weight * r.integrals.back().transformed;
  }
  r.integrals.push_back(detail::integral_check("h", h, t, opt));
  r.rhs = r.integrals.back().transformed;
  r.slack = r.rhs - r.lhs;
  return r;
}

// --- Ehrhard -----------------------------------------------------------------

inline void check_unit_interior(const ScalarField& f, const std::string& name, const InequalityOptions& opt) {
  if (f.lo() < 0.0 || f.hi() > 1.0) throw RangeError(name + " must take values in [0, 1]");
  if (opt.require_interior && !(f.lo() > 0.0 && f.hi() < 1.0)) {
    throw RangeError(name + " must take values in [eps, 1 - eps] for some eps > 0");
  }
}

inline std::vector<TupleTerm> ehrhard_terms(const ScalarField& f, const ScalarField& g, double lam) {
  const auto n = static_cast<Eigen::Index>(f.dimension());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  return {{f, lam * I, lam}, {g, (1.0 - lam) * I, 1.0 - lam}};
}

// With an explicit h.
inline InequalityReport verify_ehrhard(const ScalarField& f, const ScalarField& g, const ScalarField& h, double lam,
                                       const InequalityOptions& opt = {}) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw PreconditionError("Ehrhard: lambda must lie in [0, 1]");
  if (f.dimension() != g.dimension() || f.dimension() != h.dimension()) {
    throw PreconditionError("Ehrhard: f, g, h must share a dimension");
  }
  check_unit_interior(f, "f", opt);
  check_unit_interior(g, "g", opt);
  auto r = check_inequality("ehrhard", ehrhard_terms(f, g, lam), h, Transform::probit(), opt);
  r.parameters = {{"lambda", lam}};
  return r;
}

// h = the minimal admissible envelope.
inline InequalityReport verify_ehrhard(const ScalarField& f, const ScalarField& g, double lam,
                                       const InequalityOptions& opt = {}) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw PreconditionError("Ehrhard: lambda must lie in [0, 1]");
  const auto frame = ProjectionFrame::identity(f.dimension(), {lam, 1.0 - lam});
  return verify_ehrhard(f, g, minimal_h({f, g}, frame, Transform::probit(), opt.envelope), lam, opt);
}

// --- Borell two-coefficient form ---------------------------------------------

inline InequalityReport verify_borell(const ScalarField& f, const ScalarField& g, const ScalarField& h, double lambda,
                                      double mu, const InequalityOptions& opt = {}) {
  check_borell_admissible(lambda, mu);
  if (f.dimension() != g.dimension() || f.dimension() != h.dimension()) {
    throw PreconditionError("Borell: f, g, h must share a dimension");
  }
  check_unit_interior(f, "f", opt);
  check_unit_interior(g, "g", opt);
  const auto n = static_cast<Eigen::Index>(f.dimension());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  auto r = check_inequality("borell", {{f, lambda * I, lambda}, {g, mu * I, mu}}, h, Transform::probit(), opt);
  r.parameters = {{"lambda", lambda}, {"mu", mu}};
  return r;
}

inline InequalityReport verify_borell(const ScalarField& f, const ScalarField& g, double lambda, double mu,
                                      const InequalityOptions& opt = {}) {
  check_borell_admissible(lambda, mu);
  const auto h = Envelope::two_coefficient(f, g, lambda, mu, opt.envelope).field();
  return verify_borell(f, g, h, lambda, mu, opt);
}

// --- Frames with the Phi_c transform -----------------------------------------

inline std::vector<TupleTerm> frame_terms(const ProjectionFrame& frame, const std::vector<ScalarField>& fields) {
  if (fields.size() != frame.size()) throw PreconditionError("one field per frame factor");
  std::vector<TupleTerm> terms;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (fields[i].dimension() != frame.factor_dimension(i)) {
      throw PreconditionError("field " + std::to_string(i + 1) + " must live on R^" +
                              std::to_string(frame.factor_dimension(i)));
    }
    if (fields[i].lo() < 0.0 || fields[i].hi() > 1.0) {
      throw RangeError("field " + std::to_string(i + 1) + " must take values in [0, 1]");
    }
    terms.push_back({fields[i], frame.lambda(i) * frame.map(i).transpose(), frame.lambda(i)});
  }
  return terms;
}

inline InequalityReport verify_frame(const ProjectionFrame& frame, const std::vector<ScalarField>& fields,
                                     const ScalarField& h, const Transform& t, const InequalityOptions& opt = {}) {
  frame.validate();
  if (h.dimension() != frame.dimension()) throw PreconditionError("h must live on R^n");
  auto r = check_inequality("frame", frame_terms(frame, fields), h, t, opt);
  for (std::size_t i = 0; i < frame.size(); ++i) r.parameters.push_back({"lambda" + std::to_string(i + 1), frame.lambda(i)});
  return r;
}

inline InequalityReport verify_gbl(const ProjectionFrame& frame, const std::vector<ScalarField>& fields,
                                   const ScalarField& h, double c, const InequalityOptions& opt = {}) {
  auto r = verify_frame(frame, fields, h, Transform::phi_c(c), opt);
  r.kind = "gbl";
  r.parameters.push_back({"c", c});
  return r;
}

inline InequalityReport verify_gbl(const ProjectionFrame& frame, const std::vector<ScalarField>& fields, double c,
                                   const InequalityOptions& opt = {}) {
  frame.validate();
  const auto t = Transform::phi_c(c);
  return verify_gbl(frame, fields, minimal_h(fields, frame, t, opt.envelope), c, opt);
}

}  // namespace gaussgame
