#pragma once

// The Isaacs Hamiltonian of the Phi-game,
//   H(a, b) = <a + c b, grad v + b> - v |b|^2 / 2,
// and a randomized check that a* = (c - v) grad v, b* = -grad v is a saddle.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/value_function.hpp"

namespace gaussgame {

inline double saddle_objective(std::span<const double> a, std::span<const double> b, std::span<const double> grad_v,
                               double v, double c) {
  if (a.size() != b.size() || a.size() != grad_v.size()) {
    throw PreconditionError("saddle_objective: dimension mismatch");
  }
  double inner = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inner += (a[i] + c * b[i]) * (grad_v[i] + b[i]);
    b2 += b[i] * b[i];
  }
  return inner - 0.5 * v * b2;
}

struct SaddleWitness {
  double t = 0.0;
  std::vector<double> x, a, b;
  double h_a_bstar = 0.0, h_star = 0.0, h_astar_b = 0.0;
};

struct SaddleReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double tolerance = 1e-12;
  double max_violation = 0.0;     // largest positive excess in either inequality
  double max_identity_error = 0.0;  // |H(a*,b) - ((2c-v)|b+grad v|^2 - v|grad v|^2)/2|
  double c = 0.0;
  double sup_f = 0.0;
  std::optional<SaddleWitness> witness;  // first violating draw
  bool passed() const noexcept { return violations == 0; }
};

// Draws (t, x, a, b) and checks H(a, b*) <= H(a*, b*) <= H(a*, b) at each draw.
// t is uniform on [0, 1 - t_margin], x ~ N(0, 4 I), a, b ~ N(0, 4 I).
inline SaddleReport verify_saddle(const ValueFunction& vf, double c, std::size_t samples, const RngStream& rng,
                                  double tolerance = 1e-12) {
  SaddleReport rep;
  rep.samples = samples;
  rep.tolerance = tolerance;
  rep.c = c;
  rep.sup_f = vf.sup_estimate();
  if (!(2.0 * c >= rep.sup_f)) {
    throw PreconditionError("verify_saddle: need 2c >= sup f (c=" + std::to_string(c) +
                            ", sup f=" + std::to_string(rep.sup_f) + ")");
  }
  const std::size_t n = vf.dimension();
  NormalSampler z(rng);
  std::vector<double> x(n), a(n), b(n), g(n), astar(n), bstar(n);
  const double t_hi = 1.0 - vf.options().t_margin;
  std::uint64_t counter = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = t_hi * rng.uniforms(~counter++).first;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 2.0 * z();
      a[i] = 2.0 * z();
      b[i] = 2.0 * z();
    }
    const double v = vf.value(t, x);
    vf.gradient(t, x, g);
    double g2 = 0.0, bg2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      astar[i] = (c - v) * g[i];
      bstar[i] = -g[i];
      g2 += g[i] * g[i];
      bg2 += (b[i] + g[i]) * (b[i] + g[i]);
    }
    const double lhs = saddle_objective(a, bstar, g, v, c);
    const double mid = saddle_objective(astar, bstar, g, v, c);
    const double rhs = saddle_objective(astar, b, g, v, c);
    rep.max_identity_error =
        std::max(rep.max_identity_error, std::abs(rhs - (0.5 * (2.0 * c - v) * bg2 - 0.5 * v * g2)));
    const double excess = std::max(lhs - mid, mid - rhs);
    if (excess > 0.0) rep.max_violation = std::max(rep.max_violation, excess);
    if (excess > tolerance) {
      ++rep.violations;
      if (!rep.witness) rep.witness = SaddleWitness{t, x, a, b, lhs, mid, rhs};
    }
  }
  return rep;
}

}  // namespace gaussgame
