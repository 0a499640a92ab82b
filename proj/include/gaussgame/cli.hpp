#pragma once

// Command-line front end. run_command parses argv, dispatches one
// subcommand and writes its report. Exit codes: 0 PASS, 2 an inequality or
// identity failed, 3 a precondition or usage error, 1 a numerical failure.
//
// Settings resolve as flags > config file (--config, `key = value` lines)
// > GAUSSGAME_SEED (seed only) > defaults.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaussgame/approximation.hpp"
#include "gaussgame/field_spec.hpp"
#include "gaussgame/frame.hpp"
#include "gaussgame/games.hpp"
#include "gaussgame/generalized_means.hpp"
#include "gaussgame/inequalities.hpp"
#include "gaussgame/report.hpp"
#include "gaussgame/saddle.hpp"

namespace gaussgame {

inline constexpr int kExitPass = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr const char* kSeedEnv = "GAUSSGAME_SEED";

struct CliSettings {
  std::string f, g, h, frame, mean = "phi", out, format = "json", config;
  std::vector<std::string> fields;
  std::string lam, mu, c, x, t, delta;
  double dt = 1e-3;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  std::size_t order = kDefaultQuadratureOrder;
  std::size_t threads = 1;
  std::size_t samples = 10000;
  std::string tol;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) throw PreconditionError(std::string("--") + what + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw PreconditionError(std::string("--") + what + " is empty");
  return out;
}

inline double one_value(const std::string& s, const char* what, std::optional<double> fallback = std::nullopt) {
  if (s.empty()) {
    if (fallback) return *fallback;
    throw PreconditionError(std::string("--") + what + " is required");
  }
  const auto v = parse_list(s, what);
  if (v.size() != 1) throw PreconditionError(std::string("--") + what + " takes a single value here");
  return v[0];
}

inline std::string required(const std::string& s, const char* what) {
  if (s.empty()) throw PreconditionError(std::string("--") + what + " is required");
  return s;
}

// Flags each subcommand reads, besides --out, --format, --config.
inline const std::map<std::string, std::set<std::string>>& subcommand_flags() {
  static const std::map<std::string, std::set<std::string>> m = {
      {"value", {"f", "mean", "t", "x", "order", "tol"}},
      {"game", {"f", "c", "dt", "paths", "seed", "threads", "delta", "order", "tol"}},
      {"convergence", {"f", "c", "dt", "paths", "seed", "threads", "delta", "order"}},
      {"ehrhard", {"f", "g", "h", "lam", "order"}},
      {"borell", {"f", "g", "h", "lam", "mu", "order"}},
      {"gbl", {"fields", "frame", "c", "order"}},
      {"limits", {"x", "c"}},
      {"gm", {"mean", "f", "dt", "paths", "seed", "threads", "order", "tol"}},
      {"saddle", {"f", "c", "samples", "seed", "order"}},
  };
  return m;
}

inline void add_inequality(RunReport& rep, const InequalityReport& r, std::size_t order) {
  std::vector<std::pair<std::string, double>> params(r.parameters.begin(), r.parameters.end());
  rep.add(r.kind, "lhs", r.lhs, static_cast<double>(order), "order", params);
  rep.add(r.kind, "rhs", r.rhs, static_cast<double>(order), "order", params);
  rep.add(r.kind, "slack", r.slack, static_cast<double>(order), "order", params, r.inequality_holds() ? "PASS" : "FAIL");
  for (const auto& ic : r.integrals) {
    rep.add(r.kind, "integral:" + ic.name, ic.integral, ic.error, "quadrature_error", params);
  }
  rep.add(r.kind, "hypothesis_max_violation", r.audit.max_violation, r.audit.tolerance, "tolerance", params,
          r.audit.passed() ? "PASS" : "INVALID_HYPOTHESIS");
  rep.note("transform", r.transform);
}

}  // namespace detail

// Runs one subcommand; the report goes to --out, or to `out` when no file
// is given. Diagnostics go to `err`.
inline int run_command(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CliSettings s;
  CLI::App app{"Gaussian inequalities through stochastic games", "gaussgame"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "Plain `key = value` settings file");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--f", s.f, "Field spec, e.g. linear(a=0.3,b=1)");
  app.add_option("--g", s.g, "Second field spec");
  app.add_option("--h", s.h, "Explicit h field spec");
  auto* fields_opt = app.add_option("--fields", s.fields, "Field specs, one per frame factor");
  app.add_option("--frame", s.frame, "Frame file");
  app.add_option("--mean", s.mean, "Mean registry name: phi, exp, power:p, xexp:C, gauss_tail");
  app.add_option("--lam", s.lam, "lambda");
  app.add_option("--mu", s.mu, "mu");
  app.add_option("--c", s.c, "Isaacs / Phi_c constant (comma list for limits)");
  app.add_option("--t", s.t, "Time");
  app.add_option("--x", s.x, "Point (comma list) or limits argument");
  app.add_option("--dt", s.dt, "Time step dividing 1");
  app.add_option("--paths", s.paths, "Monte Carlo paths");
  app.add_option("--delta", s.delta, "Responder block length(s), comma list");
  app.add_option("--order", s.order, "Gauss-Hermite order");
  auto* seed_opt = app.add_option("--seed", s.seed, "Seed");
  app.add_option("--threads", s.threads, "Worker threads (0 = all cores)");
  app.add_option("--samples", s.samples, "Saddle draws");
  app.add_option("--tol", s.tol, "Tolerance for the verdict");
  app.add_option("--out", s.out, "Report file (stdout when absent)");
  app.add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  auto* f_opt = app.get_option("--f");
  f_opt->excludes(fields_opt);

  for (const auto& [name, flags] : detail::subcommand_flags()) {
    app.add_subcommand(name, "run " + name)->set_help_flag("--help", "Print this help message and exit");
  }

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  // Flags on the command line must belong to the subcommand.
  const auto& allowed = detail::subcommand_flags().at(cmd);
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    std::string name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    if (name == "out" || name == "format" || name == "config" || name == "help") continue;
    if (!allowed.count(name)) {
      err << "error: --" << name << " is not used by '" << cmd << "'\n";
      return kExitPrecondition;
    }
  }
  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv(kSeedEnv); env && *env) {
      try {
        std::size_t used = 0;
        s.seed = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        err << "error: " << kSeedEnv << " is not an unsigned integer\n";
        return kExitPrecondition;
      }
    }
  }

  RunReport rep(cmd, args);
  rep.set_seed(s.seed);
  rep.set_threads(s.threads);
  auto& cfgj = rep.config();
  int code = kExitPass;
  try {
    const auto rule = QuadratureRule::gauss_hermite(s.order);
    GameConfig cfg;
    cfg.dt = s.dt;
    cfg.paths = s.paths;
    cfg.seed = s.seed;
    cfg.threads = s.threads;
    if (!s.f.empty()) cfgj["f"] = render(parse_field_spec(s.f));

    if (cmd == "value") {
      const auto spec = MeanSpec::parse(s.mean);
      const auto f = parse_field(detail::required(s.f, "f"));
      const double t = detail::one_value(s.t, "t", 0.0);
      std::vector<double> x = s.x.empty() ? std::vector<double>(f.dimension(), 0.0) : detail::parse_list(s.x, "x");
      const double tol = detail::one_value(s.tol, "tol", 1e-5);
      cfgj["mean"] = spec.name();
      cfgj["order"] = s.order;
      cfgj["t"] = t;
      cfgj["x"] = x;
      cfgj["tol"] = tol;
      const ValueFunction vf(f, spec, rule);
      rep.add("value", "v", vf.value(t, x), static_cast<double>(s.order), "order");
      rep.add("value", "u", vf.u(t, x), static_cast<double>(s.order), "order");
      // Residual on the 9 x 41 grid t = 0.1..0.9, x_1 = -2..2 (other
      // coordinates at the given point).
      double worst = 0.0;
      for (int i = 1; i <= 9; ++i) {
        for (int j = 0; j <= 40; ++j) {
          auto y = x;
          y[0] = -2.0 + 0.1 * j;
          worst = std::max(worst, vf.pde_residual(0.1 * i, y));
        }
      }
      const bool ok = worst < tol;
      rep.add("residual_grid", "max_residual", worst, static_cast<double>(s.order), "order", {}, ok ? "PASS" : "FAIL");
      rep.verdict("residual", ok ? "PASS" : "FAIL");
    } else if (cmd == "game" || cmd == "convergence") {
      const auto f = parse_field(detail::required(s.f, "f"));
      if (!s.c.empty()) cfg.c = detail::one_value(s.c, "c");
      const auto game = make_phi_game(f, cfg, rule);
      cfgj["c"] = game.c;
      cfgj["dt"] = s.dt;
      cfgj["paths"] = s.paths;
      cfgj["seed"] = s.seed;
      cfgj["order"] = s.order;
      rep.add("value", "v00", game.v00, static_cast<double>(s.order), "order");
      if (cmd == "game") {
        const double delta = detail::one_value(s.delta, "delta", s.dt);
        const double tol = detail::one_value(s.tol, "tol", 0.01);
        cfgj["delta"] = delta;
        cfgj["tol"] = tol;
        const auto e = payoff_J(f, game.strategy(), game.responder(delta, s.dt), cfg);
        const bool ok = std::abs(e.mean - game.v00) <= std::max(3.0 * e.std_error, tol);
        rep.add("game", "payoff", e.mean, e.std_error, "se", {{"delta", delta}});
        rep.add("game", "payoff_minus_v00", e.mean - game.v00, e.std_error, "se", {{"delta", delta}}, ok ? "PASS" : "FAIL");
        rep.add("game", "discount_mean", e.discount_mean, e.discount_se, "se", {{"delta", delta}});
        rep.verdict("value_identity", ok ? "PASS" : "FAIL");
      } else {
        const auto deltas =
            s.delta.empty() ? std::vector<double>{0.25, 0.0625, 0.015625, 0.00390625} : detail::parse_list(s.delta, "delta");
        cfgj["delta"] = deltas;
        const auto tab = lower_bound_gap(game, game.strategy(), deltas, cfg);
        for (const auto& r : tab.rows) {
          rep.add("convergence", "gap", r.gap, r.estimate.std_error, "se", {{"delta", r.delta}});
        }
        rep.add("convergence", "loglog_slope", tab.slope, static_cast<double>(tab.fitted_points), "exact");
        rep.add("convergence", "sqrt_constant", tab.sqrt_constant, 0.0, "exact");
        rep.verdict("non_increasing", tab.non_increasing ? "PASS" : "FAIL");
        rep.verdict("slope", tab.fitted_points >= 2 && tab.slope >= 0.3 ? "PASS" : "FAIL");
      }
    } else if (cmd == "ehrhard" || cmd == "borell") {
      if (cmd == "borell") check_borell_admissible(detail::one_value(s.lam, "lam"), detail::one_value(s.mu, "mu"));
      const auto f = parse_field(detail::required(s.f, "f"));
      const auto g = parse_field(detail::required(s.g, "g"));
      require_unit_range(f, "f");
      require_unit_range(g, "g");
      cfgj["g"] = render(parse_field_spec(s.g));
      InequalityOptions opt;
      opt.rule = rule;
      cfgj["order"] = s.order;
      const double lam = detail::one_value(s.lam, "lam");
      cfgj["lam"] = lam;
      InequalityReport r;
      if (cmd == "ehrhard") {
        if (s.h.empty()) {
          r = verify_ehrhard(f, g, lam, opt);
        } else {
          cfgj["h"] = render(parse_field_spec(s.h));
          r = verify_ehrhard(f, g, parse_field(s.h), lam, opt);
        }
      } else {
        const double mu = detail::one_value(s.mu, "mu");
        cfgj["mu"] = mu;
        if (s.h.empty()) {
          r = verify_borell(f, g, lam, mu, opt);
        } else {
          cfgj["h"] = render(parse_field_spec(s.h));
          r = verify_borell(f, g, parse_field(s.h), lam, mu, opt);
        }
      }
      detail::add_inequality(rep, r, s.order);
      rep.verdict(cmd, r.verdict());
    } else if (cmd == "gbl") {
      std::vector<std::string> specs;
      for (const auto& item : s.fields) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, '|')) specs.push_back(part);
      }
      if (specs.empty()) throw PreconditionError("--fields is required");
      std::vector<ScalarField> fs;
      std::vector<std::string> rendered;
      for (const auto& sp : specs) {
        fs.push_back(parse_field(sp));
        rendered.push_back(render(parse_field_spec(sp)));
      }
      const auto frame = ProjectionFrame::from_file(detail::required(s.frame, "frame"));
      const double c = detail::one_value(s.c, "c", 0.5);
      cfgj["fields"] = rendered;
      cfgj["frame"] = frame.to_text();
      cfgj["c"] = c;
      cfgj["order"] = s.order;
      InequalityOptions opt;
      opt.rule = rule;
      const auto r = verify_gbl(frame, fs, c, opt);
      detail::add_inequality(rep, r, s.order);
      rep.verdict("gbl", r.verdict());
    } else if (cmd == "limits") {
      const double x = detail::one_value(s.x, "x", 0.5);
      const auto cs = s.c.empty() ? std::vector<double>{1e-4, 1e-8, 1e-12} : detail::parse_list(s.c, "c");
      cfgj["x"] = x;
      cfgj["c"] = cs;
      const auto tab = limit_recovery(cs, x);
      for (const auto& r : tab.rows) {
        rep.add("limits", "ratio", r.ratio, 0.0, "exact", {{"c", r.c}});
        rep.add("limits", "deviation", r.deviation, 0.0, "exact", {{"c", r.c}});
      }
      rep.add("limits", "upper_difference", tab.upper_difference, 0.0, "exact", {{"c", tab.upper_c}});
      rep.verdict("strictly_decreasing", tab.strictly_decreasing ? "PASS" : "FAIL");
    } else if (cmd == "gm") {
      const auto spec = MeanSpec::parse(s.mean);
      const auto f = parse_field(detail::required(s.f, "f"));
      const double tol = detail::one_value(s.tol, "tol", 0.01);
      cfgj["mean"] = spec.name();
      cfgj["order"] = s.order;
      cfgj["dt"] = s.dt;
      cfgj["paths"] = s.paths;
      cfgj["seed"] = s.seed;
      cfgj["tol"] = tol;
      const auto h = hlp_check(spec);
      rep.note("hlp", h.name());
      if (h.witness) rep.add("hlp", "witness", *h.witness, 0.0, "exact");
      const double m = generalized_mean(spec, f, rule);
      const GaussianIntegrator integ(rule, f.dimension());
      const double avg = integ.integrate([&](std::span<const double> y) { return f(y); }).value;
      rep.add("mean", "M_F", m, static_cast<double>(s.order), "order");
      rep.add("mean", "average", avg, static_cast<double>(s.order), "order");
      if (h.convex()) {
        const auto T = fenchel_R(spec);
        for (double b : {-4.0, -1.0, 0.0}) rep.add("conjugate", "R", T.value(b), 1e-3, "grid", {{"b", b}});
        rep.add("mean", "jensen_gap", m - avg, static_cast<double>(s.order), "order", {}, m - avg >= -1e-12 ? "PASS" : "FAIL");
        rep.verdict("jensen", m - avg >= -1e-12 ? "PASS" : "FAIL");
        if (s.paths > 0) {
          const auto r = make_representation(spec, f, cfg, rule);
          const auto e = payoff_K(spec, f, r.optimal(), T, cfg);
          const bool ok = std::abs(e.mean - m) <= std::max(3.0 * e.std_error, tol);
          rep.add("representation", "K", e.mean, e.std_error, "se", {}, ok ? "PASS" : "FAIL");
          rep.verdict("representation", ok ? "PASS" : "FAIL");
        }
      } else {
        const auto ce = convexity_counterexample(spec, mean_battery(spec));
        rep.add("convexity", "max_excess", ce.excess, static_cast<double>(s.order), "order", {{"lambda", ce.lambda}});
        rep.note("convexity_counterexample", ce.found ? "found" : "none");
        if (spec.kind() == MeanSpec::Kind::gauss_tail && s.paths > 0) {
          const auto ex = make_nonconvex_example(f, cfg, rule);
          const auto e = payoff_nonconvex_example(f, ex.alpha(), ex.alpha_tilde(), ex.beta(s.dt), cfg);
          const bool ok = std::abs(e.mean - m) <= std::max(3.0 * e.std_error, tol);
          rep.add("representation", "three_control", e.mean, e.std_error, "se", {}, ok ? "PASS" : "FAIL");
          rep.verdict("representation", ok ? "PASS" : "FAIL");
        }
      }
    } else if (cmd == "saddle") {
      const auto f = parse_field(detail::required(s.f, "f"));
      const ValueFunction vf(f, MeanSpec::phi(), rule);
      const double c = detail::one_value(s.c, "c", vf.default_c());
      cfgj["c"] = c;
      cfgj["samples"] = s.samples;
      cfgj["seed"] = s.seed;
      cfgj["order"] = s.order;
      const auto r = verify_saddle(vf, c, s.samples, RngStream(s.seed, 0));
      rep.add("saddle", "violations", static_cast<double>(r.violations), 0.0, "exact", {}, r.passed() ? "PASS" : "FAIL");
      rep.add("saddle", "max_violation", r.max_violation, r.tolerance, "tolerance");
      rep.add("saddle", "max_identity_error", r.max_identity_error, static_cast<double>(s.order), "order");
      rep.verdict("saddle", r.passed() ? "PASS" : "FAIL");
    }
    const std::string v = rep.overall();
    code = v == "PASS" ? kExitPass : v == "INVALID_HYPOTHESIS" ? kExitPrecondition : kExitFail;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  const std::string text = s.format == "csv" ? rep.csv_text() : rep.json_text();
  if (s.out.empty()) {
    out << text;
  } else {
    std::ofstream os(s.out, std::ios::binary);
    if (!os) {
      err << "error: cannot write " << s.out << "\n";
      return kExitPrecondition;
    }
    os << text;
    out << cmd << ": " << rep.overall() << " (" << s.out << ")\n";
  }
  return code;
}

inline int run_command(int argc, char** argv) {
  return run_command(std::vector<std::string>(argv, argv + argc));
}

}  // namespace gaussgame
