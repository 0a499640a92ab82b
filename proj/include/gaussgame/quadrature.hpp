#pragma once

// Numerical integration against the standard Gaussian measure gamma_n.
//
// Rules are one-dimensional (nodes, probability weights) and tensorized up to
// kMaxTensorDimension. Above that, GaussianIntegrator falls back to a fixed
// Monte Carlo sample and reports its standard error.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/gaussian.hpp"
#include "gaussgame/rng.hpp"

namespace gaussgame {

inline constexpr std::size_t kMaxTensorDimension = 3;
inline constexpr std::size_t kDefaultQuadratureOrder = 64;

class QuadratureRule {
 public:
  enum class Kind { gauss_hermite, composite };

  QuadratureRule() : QuadratureRule(gauss_hermite(kDefaultQuadratureOrder)) {}

  // Probabilists' Gauss-Hermite rule with `order` nodes: exact for polynomials
  // of degree <= 2*order - 1 against gamma_1.
  static QuadratureRule gauss_hermite(std::size_t order, std::size_t dimension = 1) {
    if (order == 0) throw PreconditionError("quadrature order must be positive");
    std::vector<double> x(order), w(order);
    // Newton iteration on orthonormal physicists' Hermite polynomials.
    constexpr double kPim4 = 0.7511255444649425;  // pi^{-1/4}
    const std::size_t n = order;
    const std::size_t m = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == 0) {
        z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
      } else if (i == 1) {
        z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
      } else if (i == 2) {
        z = 1.86 * z - 0.86 * x[0];
      } else if (i == 3) {
        z = 1.91 * z - 0.91 * x[1];
      } else {
        z = 2.0 * z - x[i - 2];
      }
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = kPim4, p2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          const double jj = static_cast<double>(j);
          p1 = z * std::sqrt(2.0 / (jj + 1.0)) * p2 - std::sqrt(jj / (jj + 1.0)) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
      }
      x[i] = z;
      x[n - 1 - i] = -z;
      w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
    }
    // e^{-x^2} weight -> standard normal density.
    std::vector<double> nodes(n), weights(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[n - 1 - i] = std::numbers::sqrt2 * x[i];
      weights[n - 1 - i] = w[i] / std::sqrt(std::numbers::pi);
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
    return QuadratureRule(Kind::gauss_hermite, order, std::move(nodes), std::move(weights), dimension);
  }

  // Composite Gauss-Legendre panels on [-half_width, half_width] with weights
  // multiplied by the normal density. Resolves sharp features that a global
  // Hermite rule of moderate order cannot.
  static QuadratureRule composite(double half_width, std::size_t panels, std::size_t points_per_panel,
                                  std::size_t dimension = 1) {
    if (!(half_width > 0.0) || panels == 0 || points_per_panel == 0) {
      throw PreconditionError("composite rule needs positive width, panels and points");
    }
    const auto [gx, gw] = gauss_legendre(points_per_panel);
    std::vector<double> nodes, weights;
    nodes.reserve(panels * points_per_panel);
    weights.reserve(panels * points_per_panel);
    const double h = 2.0 * half_width / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = -half_width + h * static_cast<double>(p);
      for (std::size_t j = 0; j < points_per_panel; ++j) {
        const double x = a + 0.5 * h * (gx[j] + 1.0);
        nodes.push_back(x);
        weights.push_back(0.5 * h * gw[j] * normal_pdf(x));
      }
    }
    QuadratureRule r(Kind::composite, panels * points_per_panel, std::move(nodes), std::move(weights), dimension);
    r.half_width_ = half_width;
    r.panels_ = panels;
    r.points_per_panel_ = points_per_panel;
    return r;
  }

  // The same family at half resolution (half the Hermite order, or half the
  // panels); the difference to *this serves as an error estimate.
  QuadratureRule coarsened() const {
    if (kind_ == Kind::gauss_hermite) return gauss_hermite(std::max<std::size_t>(1, order_ / 2), dimension_);
    return composite(half_width_, std::max<std::size_t>(1, panels_ / 2), points_per_panel_, dimension_);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t order() const noexcept { return order_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  QuadratureRule with_dimension(std::size_t dimension) const {
    QuadratureRule r = *this;
    r.dimension_ = dimension;
    return r;
  }

  std::string describe() const {
    if (kind_ == Kind::gauss_hermite) return "gauss_hermite:" + std::to_string(order_);
    char buf[96];
    std::snprintf(buf, sizeof buf, "composite:%.17g:%zu:%zu", half_width_, panels_, points_per_panel_);
    return buf;
  }

  // Tensor-product integral of fn over gamma_dim, dim <= kMaxTensorDimension.
  template <class Fn>
  double integrate(Fn&& fn, std::size_t dim) const {
    if (dim == 0 || dim > kMaxTensorDimension) {
      throw PreconditionError("tensor quadrature supports dimensions 1.." + std::to_string(kMaxTensorDimension) +
                              ", got " + std::to_string(dim));
    }
    std::array<double, kMaxTensorDimension> point{};
    std::array<std::size_t, kMaxTensorDimension> idx{};
    const std::size_t m = nodes_.size();
    double sum = 0.0, comp = 0.0;
    for (;;) {
      double w = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        point[d] = nodes_[idx[d]];
        w *= weights_[idx[d]];
      }
      const double term = w * fn(std::span<const double>(point.data(), dim)) - comp;
      const double t = sum + term;
      comp = (t - sum) - term;
      sum = t;
      std::size_t d = 0;
      while (d < dim && ++idx[d] == m) idx[d++] = 0;
      if (d == dim) break;
    }
    return sum;
  }

  template <class Fn>
  double integrate(Fn&& fn) const {
    return integrate(std::forward<Fn>(fn), dimension_);
  }

  // Calls fn(point, weight) for every tensor node, in a fixed order.
  template <class Fn>
  void visit(Fn&& fn, std::size_t dim) const {
    if (dim == 0 || dim > kMaxTensorDimension) {
      throw PreconditionError("tensor quadrature supports dimensions 1.." + std::to_string(kMaxTensorDimension) +
                              ", got " + std::to_string(dim));
    }
    std::array<double, kMaxTensorDimension> point{};
    std::array<std::size_t, kMaxTensorDimension> idx{};
    const std::size_t m = nodes_.size();
    for (;;) {
      double w = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        point[d] = nodes_[idx[d]];
        w *= weights_[idx[d]];
      }
      fn(std::span<const double>(point.data(), dim), w);
      std::size_t d = 0;
      while (d < dim && ++idx[d] == m) idx[d++] = 0;
      if (d == dim) break;
    }
  }

 private:
  QuadratureRule(Kind kind, std::size_t order, std::vector<double> nodes, std::vector<double> weights,
                 std::size_t dimension)
      : kind_(kind), order_(order), dimension_(dimension), nodes_(std::move(nodes)), weights_(std::move(weights)) {
    if (dimension_ == 0) throw PreconditionError("quadrature dimension must be positive");
  }

  static std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
    std::vector<double> x(n), w(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          const double jj = static_cast<double>(j);
          p1 = ((2.0 * jj + 1.0) * z * p2 - jj * p3) / (jj + 1.0);
        }
        pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) <= 1e-15) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return {x, w};
  }

  Kind kind_;
  std::size_t order_;
  std::size_t dimension_;
  double half_width_ = 0.0;
  std::size_t panels_ = 0, points_per_panel_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// Integral estimate with its uncertainty: quadrature order for deterministic
// rules, standard error for the Monte Carlo fallback.
struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t quadrature_order = 0;  // 0 when Monte Carlo was used
  std::size_t samples = 0;
};

// Dispatches between tensor quadrature (dim <= 3) and a fixed Monte Carlo
// sample. The MC sample is drawn once, so integrands that vary smoothly in a
// parameter stay smooth in that parameter (common random numbers).
class GaussianIntegrator {
 public:
  struct Options {
    bool allow_monte_carlo = false;
    std::size_t mc_samples = 20000;
    std::uint64_t mc_seed = 0x5eed;
  };

  GaussianIntegrator(QuadratureRule rule, std::size_t dim) : GaussianIntegrator(std::move(rule), dim, Options{}) {}

  GaussianIntegrator(QuadratureRule rule, std::size_t dim, Options opt)
      : rule_(std::move(rule)), dim_(dim), opt_(opt) {
    if (dim_ == 0) throw PreconditionError("integration dimension must be positive");
    if (dim_ > kMaxTensorDimension) {
      if (!opt_.allow_monte_carlo) {
        throw PreconditionError("dimension " + std::to_string(dim_) +
                                " exceeds tensor quadrature limit and Monte Carlo fallback is disabled");
      }
      NormalSampler rng(RngStream(opt_.mc_seed, 0));
      sample_.resize(opt_.mc_samples * dim_);
      rng.fill(sample_);
    }
  }

  std::size_t dimension() const noexcept { return dim_; }
  bool uses_monte_carlo() const noexcept { return dim_ > kMaxTensorDimension; }
  const QuadratureRule& rule() const noexcept { return rule_; }

  // fn(point, weight) over the tensor grid, or over the fixed Monte Carlo
  // sample with weight 1/samples.
  template <class Fn>
  void visit(Fn&& fn) const {
    if (!uses_monte_carlo()) {
      rule_.visit(fn, dim_);
      return;
    }
    const double w = 1.0 / static_cast<double>(opt_.mc_samples);
    for (std::size_t i = 0; i < opt_.mc_samples; ++i) fn(std::span<const double>(sample_.data() + i * dim_, dim_), w);
  }

  template <class Fn>
  IntegralEstimate integrate(Fn&& fn) const {
    if (!uses_monte_carlo()) {
      return {rule_.integrate(fn, dim_), 0.0, rule_.order(), rule_.size()};
    }
    const std::size_t m = opt_.mc_samples;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double y = fn(std::span<const double>(sample_.data() + i * dim_, dim_));
      const double d = y - mean;
      mean += d / static_cast<double>(i + 1);
      m2 += d * (y - mean);
    }
    const double var = m > 1 ? m2 / static_cast<double>(m - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(m)), 0, m};
  }

 private:
  QuadratureRule rule_;
  std::size_t dim_;
  Options opt_;
  std::vector<double> sample_;
};

}  // namespace gaussgame
