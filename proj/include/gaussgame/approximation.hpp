#pragma once

// One-dimensional approximation layers: the sup-convolution (Lipschitz upper
// regularization in transformed scale), the inf-convolution lower Lipschitz
// approximation, and the c -> 0 / c -> 1 limits of the Phi_c transform.
//
// Both convolutions work from f sampled on a node grid; each node contributes
// a cone and the result is the upper (lower) envelope of the cones, so the
// Lipschitz bounds hold exactly and the ordering in s (k) holds everywhere.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/gaussian.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

struct ConeGrid {
  double x_lo = -12.0;
  double x_hi = 12.0;
  double dx = 1e-3;

  std::size_t nodes() const {
    if (!(dx > 0.0 && x_hi > x_lo)) throw PreconditionError("cone grid: need dx > 0 and x_hi > x_lo");
    return static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx)) + 1;
  }
  double node(std::size_t j) const { return x_lo + static_cast<double>(j) * dx; }
};

namespace detail {

inline std::shared_ptr<std::vector<double>> sample_nodes(const ConeGrid& grid, auto&& value) {
  auto v = std::make_shared<std::vector<double>>(grid.nodes());
  for (std::size_t j = 0; j < v->size(); ++j) (*v)[j] = value(grid.node(j));
  return v;
}

// Nodes within `reach` of x.
inline std::pair<std::size_t, std::size_t> node_window(const ConeGrid& grid, std::size_t count, double x,
                                                       double reach) {
  const double a = std::ceil((x - reach - grid.x_lo) / grid.dx);
  const double b = std::floor((x + reach - grid.x_lo) / grid.dx);
  const double last = static_cast<double>(count - 1);
  if (b < 0.0 || a > last) return {1, 0};
  return {static_cast<std::size_t>(std::max(a, 0.0)), static_cast<std::size_t>(std::min(b, last))};
}

}  // namespace detail

// T(f^s(x)) = sup_y { T(f(y)) - |x - y| / s } over the nodes y. f must take
// values in [eps, 1] so that T(f) is finite.
inline ScalarField sup_convolution(const ScalarField& f, double s, const Transform& t, const ConeGrid& grid = {}) {
  if (f.dimension() != 1) throw PreconditionError("sup_convolution: one-dimensional fields only");
  if (!(s > 0.0)) throw PreconditionError("sup_convolution: s must be positive");
  if (!(f.lo() > 0.0 && f.hi() <= 1.0)) throw RangeError("sup_convolution: f must take values in [eps, 1]");
  const auto tv = detail::sample_nodes(grid, [&](double y) { return f.transformed(t, std::span<const double>(&y, 1)).value; });
  const double tlo = t.apply(f.lo()).value, thi = t.apply(f.hi()).value;
  // Only nodes within s (T(hi) - T(lo)) of x can beat the node nearest to x.
  const double reach = s * (thi - tlo) + grid.dx;
  auto transformed = [tv, grid, s, reach](std::span<const double> x) {
    const auto [a, b] = detail::node_window(grid, tv->size(), x[0], reach);
    double best = -std::numeric_limits<double>::infinity();
    if (a > b) {
      // Far outside the grid: the nearest end node dominates.
      const std::size_t j = x[0] < grid.x_lo ? 0 : tv->size() - 1;
      return (*tv)[j] - std::abs(x[0] - grid.node(j)) / s;
    }
    for (std::size_t j = a; j <= b; ++j) best = std::max(best, (*tv)[j] - std::abs(x[0] - grid.node(j)) / s);
    return best;
  };
  ScalarField out(1, [t, transformed](std::span<const double> x) { return t.inverse(transformed(x)); }, f.lo(), f.hi(),
                  Smoothness::lipschitz, "supconv(" + f.description() + ")");
  out.with_transformed(t, transformed);
  return out;
}

// f_k(x) = inf_y { f(y) + k |x - y| } over the nodes y; k-Lipschitz.
inline ScalarField lipschitz_lower_approx(const ScalarField& f, double k, const ConeGrid& grid = {}) {
  if (f.dimension() != 1) throw PreconditionError("lipschitz_lower_approx: one-dimensional fields only");
  if (!(k > 0.0)) throw PreconditionError("lipschitz_lower_approx: k must be positive");
  if (!std::isfinite(f.lo()) || !std::isfinite(f.hi())) {
    throw RangeError("lipschitz_lower_approx: f must be bounded");
  }
  const auto v = detail::sample_nodes(grid, [&](double y) { return f(std::span<const double>(&y, 1)); });
  const double reach = (f.hi() - f.lo()) / k + grid.dx;
  ScalarField out(1,
                  [v, grid, k, reach](std::span<const double> x) {
                    const auto [a, b] = detail::node_window(grid, v->size(), x[0], reach);
                    if (a > b) {
                      const std::size_t j = x[0] < grid.x_lo ? 0 : v->size() - 1;
                      return (*v)[j] + k * std::abs(x[0] - grid.node(j));
                    }
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t j = a; j <= b; ++j) best = std::min(best, (*v)[j] + k * std::abs(x[0] - grid.node(j)));
                    return best;
                  },
                  f.lo(), f.hi(), Smoothness::lipschitz, "lipinf(" + f.description() + ")");
  out.with_lipschitz(k);
  return out;
}

// --- Limits of the Phi_c transform -------------------------------------------

struct LimitRow {
  double c = 0.0;
  double phic_inv = 0.0;   // Phi_c^{-1}(x)
  double ratio = 0.0;      // Phi_c^{-1}(x) sqrt(-2 ln c) / ln x
  double deviation = 0.0;  // |ratio - 1|
  bool exact_zero = false;  // x = 1: Phi_c^{-1}(1) = 0 and ln 1 = 0
};

struct LimitTable {
  double x = 0.0;
  std::vector<LimitRow> rows;
  bool strictly_decreasing = false;  // deviation over the rows
  // c -> 1 end: Phi_c^{-1}(x) against Phi^{-1}(c x) - Phi^{-1}(c).
  double upper_c = 0.999;
  double upper_value = 0.0;
  double upper_reference = 0.0;
  double upper_difference = 0.0;
};

inline LimitTable limit_recovery(const std::vector<double>& c_list, double x, double upper_c = 0.999) {
  if (!(x > 0.0 && x <= 1.0)) throw RangeError("limit_recovery: x must lie in (0, 1]");
  if (c_list.empty()) throw PreconditionError("limit_recovery: need at least one c");
  for (std::size_t i = 0; i < c_list.size(); ++i) {
    if (!(c_list[i] > 0.0 && c_list[i] < 1.0)) throw RangeError("limit_recovery: c must lie in (0, 1)");
    if (i > 0 && !(c_list[i] < c_list[i - 1])) throw PreconditionError("limit_recovery: c_list must decrease");
  }
  LimitTable tab;
  tab.x = x;
  for (double c : c_list) {
    const PhiCTransform t(c);
    LimitRow r;
    r.c = c;
    r.phic_inv = t.inverse(x);
    if (x == 1.0) {
      r.exact_zero = true;
    } else {
      r.ratio = r.phic_inv * std::sqrt(-2.0 * std::log(c)) / std::log(x);
      r.deviation = std::abs(r.ratio - 1.0);
    }
    tab.rows.push_back(r);
  }
  tab.strictly_decreasing = x != 1.0;
  for (std::size_t i = 1; i < tab.rows.size(); ++i) {
    if (!(tab.rows[i].deviation < tab.rows[i - 1].deviation)) tab.strictly_decreasing = false;
  }
  tab.upper_c = upper_c;
  const PhiCTransform tu(upper_c);
  tab.upper_value = tu.inverse(x);
  tab.upper_reference = phi_inv(x * upper_c) - phi_inv(upper_c);
  tab.upper_difference = std::abs(tab.upper_value - tab.upper_reference);
  return tab;
}

}  // namespace gaussgame
