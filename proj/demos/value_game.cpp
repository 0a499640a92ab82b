// Plays the optimal strategy against block-frozen responders and prints the
// payoff next to the quadrature value v(0, 0).
//   value_game [field-spec] [paths]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "gaussgame.hpp"

namespace gg = gaussgame;

int main(int argc, char** argv) {
  const std::string spec = argc > 1 ? argv[1] : "bump(0,0.5)";
  gg::GameConfig cfg;
  cfg.dt = 1.0 / 1024;
  cfg.paths = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 20000;
  cfg.seed = 11;

  const auto f = gg::parse_field(spec);
  const auto game = gg::make_phi_game(f, cfg);
  std::printf("f = %s\nc = %.4f  v(0,0) = %.6f\n\n", gg::render(gg::parse_field_spec(spec)).c_str(), game.c, game.v00);
  std::printf("%10s %12s %10s %12s\n", "delta", "payoff", "se", "gap");
  const auto tab = gg::lower_bound_gap(game, game.strategy(), {0.25, 1.0 / 16, 1.0 / 64, 1.0 / 256}, cfg);
  for (const auto& r : tab.rows) {
    std::printf("%10.5f %12.6f %10.2e %12.3e\n", r.delta, r.estimate.mean, r.estimate.std_error, r.gap);
  }
  std::printf("\nlog-log slope %.3f over %zu points\n", tab.slope, tab.fitted_points);
}
