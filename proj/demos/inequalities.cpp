// Ehrhard, Borell and a three-projection frame on small fixed examples.

#include <cstdio>

#include "gaussgame.hpp"

namespace gg = gaussgame;

namespace {

void show(const char* label, const gg::InequalityReport& r) {
  std::printf("%-28s lhs %9.5f  rhs %9.5f  slack %10.3e  %s\n", label, r.lhs, r.rhs, r.slack, r.verdict().c_str());
}

}  // namespace

int main() {
  const auto f = gg::fields::erf_ramp(0.4, 0.7, 0.02, 0.97);
  const auto g = gg::fields::bump(-0.6, 1.1, 0.05, 0.85);
  for (double lam : {0.25, 0.5, 0.75}) {
    char label[64];
    std::snprintf(label, sizeof label, "ehrhard lam=%.2f", lam);
    show(label, gg::verify_ehrhard(f, g, lam));
  }
  show("borell lam=1 mu=1", gg::verify_borell(f, g, 1.0, 1.0));
  show("borell lam=0.8 mu=0.6", gg::verify_borell(f, g, 0.8, 0.6));
  try {
    gg::verify_borell(f, g, 2.0, 0.5);
  } catch (const gg::AdmissibilityError& e) {
    std::printf("%-28s %s\n", "borell lam=2 mu=0.5", e.what());
  }

  const auto frame = gg::ProjectionFrame::planar({0, 60, 120}, 2.0 / 3.0);
  const std::vector<gg::ScalarField> fs{gg::fields::bump(0.3, 0.8, 0.05, 1.0), gg::fields::logistic_ramp(-0.2, 0.5),
                                        gg::fields::interval(-1.0, 0.8, 0.3, 0.02, 0.98)};
  for (double c : {0.1, 0.5, 0.9}) {
    char label[64];
    std::snprintf(label, sizeof label, "frame 0/60/120 c=%.1f", c);
    show(label, gg::verify_gbl(frame, fs, c));
  }

  const auto lim = gg::limit_recovery({1e-2, 1e-4, 1e-8, 1e-12}, 0.5);
  std::printf("\n%10s %12s %12s\n", "c", "ratio", "deviation");
  for (const auto& r : lim.rows) std::printf("%10.0e %12.6f %12.6f\n", r.c, r.ratio, r.deviation);
}
