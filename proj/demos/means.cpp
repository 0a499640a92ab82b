// Generalized means of one field: convexity verdict, value, Jensen gap and
// the conjugate R at a few slopes.

#include <cmath>
#include <cstdio>

#include "gaussgame.hpp"

namespace gg = gaussgame;

int main() {
  const auto f = gg::fields::bump(0.0, 0.8, 0.2, 1.4);
  const gg::GaussianIntegrator integ(gg::QuadratureRule::gauss_hermite(64), 1);
  const double avg = integ.integrate([&](std::span<const double> x) { return f(x); }).value;
  std::printf("f = bump(0, 0.8, 0.2, 1.4), average %.6f\n\n", avg);
  std::printf("%-11s %-11s %10s %11s %10s %10s %10s\n", "mean", "hlp", "M_F", "M_F - avg", "R(-4)", "R(-1)", "R(0)");
  for (const char* s : {"exp", "power:1.5", "power:2", "power:3", "xexp:3", "phi", "gauss_tail"}) {
    const auto spec = gg::MeanSpec::parse(s);
    const auto h = gg::hlp_check(spec);
    const double m = gg::generalized_mean(spec, f);
    std::printf("%-11s %-11s %10.6f %11.3e", s, h.name(), m, m - avg);
    if (h.convex()) {
      const auto T = gg::fenchel_R(spec);
      for (double b : {-4.0, -1.0, 0.0}) std::printf(" %10.4g", T.value(b));
    }
    std::printf("\n");
  }
}
