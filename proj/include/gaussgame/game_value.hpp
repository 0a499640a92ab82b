#pragma once

// What the game engine needs from a value function: v(t,x) and grad v(t,x)
// at scattered points. Three implementations:
//   PointwiseValue  - straight quadrature per query,
//   TabulatedValue  - one-dimensional cubic Hermite table on the simulation
//                     time grid, falling back to quadrature off the table,
//   ProjectedValue  - x -> v(t, Bx) for a co-isometry B, gradient B* grad v.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/parallel.hpp"
#include "gaussgame/value_function.hpp"

namespace gaussgame {

class GameValue {
 public:
  virtual ~GameValue() = default;
  virtual std::size_t dimension() const = 0;
  // Writes grad v(t,x) into g and returns v(t,x).
  virtual double evaluate(double t, std::span<const double> x, std::span<double> g) const = 0;

  double value(double t, std::span<const double> x) const {
    std::vector<double> g(x.size());
    return evaluate(t, x, g);
  }
};

class PointwiseValue final : public GameValue {
 public:
  explicit PointwiseValue(std::shared_ptr<const ValueFunction> vf) : vf_(std::move(vf)) {
    if (!vf_) throw PreconditionError("PointwiseValue needs a value function");
  }
  std::size_t dimension() const override { return vf_->dimension(); }
  double evaluate(double t, std::span<const double> x, std::span<double> g) const override {
    return vf_->value_and_gradient(t, x, g);
  }
  const ValueFunction& function() const noexcept { return *vf_; }

 private:
  std::shared_ptr<const ValueFunction> vf_;
};

// Rows at t_k = k * dt for k = 0..N-1, nodes x_j = x_lo + j * dx. Each row
// stores v and v_x; queries interpolate with the cubic Hermite basis, whose
// derivative gives the gradient. Queries at other times, or outside
// [x_lo, x_hi], go to the underlying value function.
class TabulatedValue final : public GameValue {
 public:
  struct Grid {
    double x_lo = -8.0;
    double x_hi = 8.0;
    double dx = 0.04;
  };

  TabulatedValue(std::shared_ptr<const ValueFunction> vf, double dt, std::size_t threads = 1)
      : TabulatedValue(std::move(vf), dt, Grid{}, threads) {}

  TabulatedValue(std::shared_ptr<const ValueFunction> vf, double dt, Grid grid, std::size_t threads = 1)
      : vf_(std::move(vf)), dt_(dt), grid_(grid) {
    if (!vf_) throw PreconditionError("TabulatedValue needs a value function");
    if (vf_->dimension() != 1) throw PreconditionError("TabulatedValue supports one-dimensional fields only");
    if (!(dt > 0.0 && dt <= 1.0)) throw PreconditionError("TabulatedValue: dt must lie in (0,1]");
    if (!(grid.dx > 0.0 && grid.x_hi > grid.x_lo)) throw PreconditionError("TabulatedValue: bad grid");
    rows_ = static_cast<std::size_t>(std::llround(1.0 / dt));
    cols_ = static_cast<std::size_t>(std::llround((grid.x_hi - grid.x_lo) / grid.dx)) + 1;
    v_.resize(rows_ * cols_);
    d_.resize(rows_ * cols_);
    // Rows are independent; each entry depends only on (t_k, x_j).
    for_each_index(rows_, threads, [&](std::size_t k) {
      const double t = static_cast<double>(k) * dt_;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double x = grid_.x_lo + static_cast<double>(j) * grid_.dx;
        double g = 0.0;
        v_[k * cols_ + j] = vf_->value_and_gradient(t, std::span<const double>(&x, 1), std::span<double>(&g, 1));
        d_[k * cols_ + j] = g;
      }
    });
  }

  std::size_t dimension() const override { return 1; }
  double dt() const noexcept { return dt_; }
  const Grid& grid() const noexcept { return grid_; }
  const ValueFunction& function() const noexcept { return *vf_; }

  double evaluate(double t, std::span<const double> x, std::span<double> g) const override {
    const double kd = t / dt_;
    const double kr = std::nearbyint(kd);
    const double xq = x[0];
    const double u = (xq - grid_.x_lo) / grid_.dx;
    if (kr < 0.0 || kr >= static_cast<double>(rows_) || std::abs(t - kr * dt_) > 1e-12 || !(u >= 0.0) ||
        u >= static_cast<double>(cols_ - 1)) {
      return vf_->value_and_gradient(t, x, g);
    }
    const std::size_t k = static_cast<std::size_t>(kr);
    const std::size_t j = static_cast<std::size_t>(u);
    const double s = u - static_cast<double>(j);
    const double* v = &v_[k * cols_ + j];
    const double* d = &d_[k * cols_ + j];
    const double h = grid_.dx;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double dh00 = 6 * s2 - 6 * s, dh10 = 3 * s2 - 4 * s + 1, dh01 = -6 * s2 + 6 * s, dh11 = 3 * s2 - 2 * s;
    g[0] = (dh00 * v[0] + dh01 * v[1]) / h + dh10 * d[0] + dh11 * d[1];
    return h00 * v[0] + h * h10 * d[0] + h01 * v[1] + h * h11 * d[1];
  }

 private:
  std::shared_ptr<const ValueFunction> vf_;
  double dt_;
  Grid grid_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_, d_;
};

// v(t, x) = inner(t, B x) for a row-major m x n matrix B with B B* = I.
class ProjectedValue final : public GameValue {
 public:
  ProjectedValue(std::shared_ptr<const GameValue> inner, std::vector<double> B, std::size_t n)
      : inner_(std::move(inner)), B_(std::move(B)), n_(n) {
    if (!inner_) throw PreconditionError("ProjectedValue needs an inner value");
    m_ = inner_->dimension();
    if (B_.size() != m_ * n_) throw PreconditionError("ProjectedValue: matrix has wrong size");
  }
  std::size_t dimension() const override { return n_; }
  double evaluate(double t, std::span<const double> x, std::span<double> g) const override {
    std::vector<double> y(m_, 0.0), gy(m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) y[i] += B_[i * n_ + j] * x[j];
    const double v = inner_->evaluate(t, y, gy);
    for (std::size_t j = 0; j < n_; ++j) {
      g[j] = 0.0;
      for (std::size_t i = 0; i < m_; ++i) g[j] += B_[i * n_ + j] * gy[i];
    }
    return v;
  }

 private:
  std::shared_ptr<const GameValue> inner_;
  std::vector<double> B_;
  std::size_t n_, m_ = 0;
};

// Tabulated when the field is one-dimensional and dt is a valid grid step,
// pointwise otherwise.
inline std::shared_ptr<const GameValue> make_game_value(std::shared_ptr<const ValueFunction> vf, double dt,
                                                        bool tabulate = true, std::size_t threads = 1) {
  if (tabulate && vf->dimension() == 1) return std::make_shared<TabulatedValue>(std::move(vf), dt, threads);
  return std::make_shared<PointwiseValue>(std::move(vf));
}

}  // namespace gaussgame
