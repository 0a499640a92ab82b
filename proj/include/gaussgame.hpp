#pragma once

// Everything except the command-line front end (gaussgame/cli.hpp).

#include "gaussgame/approximation.hpp"
#include "gaussgame/coupling.hpp"
#include "gaussgame/envelope.hpp"
#include "gaussgame/errors.hpp"
#include "gaussgame/field_spec.hpp"
#include "gaussgame/frame.hpp"
#include "gaussgame/game_engine.hpp"
#include "gaussgame/game_value.hpp"
#include "gaussgame/games.hpp"
#include "gaussgame/gaussian.hpp"
#include "gaussgame/generalized_means.hpp"
#include "gaussgame/inequalities.hpp"
#include "gaussgame/mean_spec.hpp"
#include "gaussgame/parallel.hpp"
#include "gaussgame/quadrature.hpp"
#include "gaussgame/report.hpp"
#include "gaussgame/rng.hpp"
#include "gaussgame/saddle.hpp"
#include "gaussgame/scalar_field.hpp"
#include "gaussgame/strategies.hpp"
#include "gaussgame/value_function.hpp"
