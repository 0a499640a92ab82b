#pragma once

// Smallest admissible right-hand function for inequalities of the form
//
//   sum_i w_i T(f_i(x_i)) <= T(h(sum_i A_i x_i))   for all x_i in R^{n_i},
//
// namely T(h(x)) = sup { sum_i w_i T(f_i(x_i)) : sum_i A_i x_i = x }.
// For a projection frame A_i = w_i B_i^* = lambda_i B_i^*; for the
// two-coefficient Borell form A = (lambda I, mu I), w = (lambda, mu).
//
// The slice {z : M z = x} is parametrized as z = M^+ x + K u with K an
// orthonormal kernel basis. The sup over u is a grid scan of the box
// [-L, L]^d followed by golden-section refinement around the best node, with
// the grid doubled until the envelope moves by less than `tol`, plus a ladder
// of far probes out to `max_half_width`.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"
#include "gaussgame/frame.hpp"
#include "gaussgame/scalar_field.hpp"

namespace gaussgame {

struct EnvelopeOptions {
  std::size_t grid = 401;       // nodes per free dimension (one-dimensional kernels)
  std::size_t grid_2d = 81;     // nodes per free dimension when the kernel is two-dimensional
  std::size_t max_grid = 1601;  // doubling stops here
  double half_width = 9.0;      // box [-L, L] in kernel coordinates
  double max_half_width = 600.0;  // far probes reach out to this radius
  double tol = 1e-6;            // doubling stops once the envelope moves less than this
  int golden_iterations = 48;
};

class Envelope {
 public:
  struct Block {
    ScalarField f;      // on R^{n_i}
    Eigen::MatrixXd A;  // n x n_i
    double weight = 0.0;
  };

  Envelope(std::vector<Block> blocks, Transform t, EnvelopeOptions opt = {})
      : blocks_(std::move(blocks)), t_(std::move(t)), opt_(opt) {
    if (blocks_.empty()) throw PreconditionError("envelope needs at least one field");
    n_ = static_cast<std::size_t>(blocks_[0].A.rows());
    std::size_t cols = 0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto& b = blocks_[i];
      if (static_cast<std::size_t>(b.A.rows()) != n_ || b.A.cols() != static_cast<Eigen::Index>(b.f.dimension())) {
        throw PreconditionError("envelope: block " + std::to_string(i + 1) + " has inconsistent dimensions");
      }
      if (b.f.lo() < 0.0 || b.f.hi() > 1.0) {
        throw RangeError("envelope: field " + std::to_string(i + 1) + " must take values in [0, 1]");
      }
      offset_.push_back(cols);
      cols += b.f.dimension();
    }
    N_ = cols;
    M_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(N_));
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      M_.middleCols(static_cast<Eigen::Index>(offset_[i]), blocks_[i].A.cols()) = blocks_[i].A;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-12 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
    if (rank < n_) {
      throw PreconditionError("envelope: empty constraint slice (sum A_i x_i spans a subspace of dimension " +
                              std::to_string(rank) + " < " + std::to_string(n_) + ")");
    }
    Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < rank; ++i) {
      sinv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / sv(static_cast<Eigen::Index>(i));
    }
    pinv_ = svd.matrixV() * sinv * svd.matrixU().transpose();
    kernel_ = svd.matrixV().rightCols(static_cast<Eigen::Index>(N_ - rank));
    if (kernel_.cols() > 2) {
      throw PreconditionError("envelope: constraint slice has dimension " + std::to_string(kernel_.cols()) +
                              "; at most 2 is supported");
    }
    if (opt_.grid < 3 || opt_.grid_2d < 3 || !(opt_.half_width > 0.0)) {
      throw PreconditionError("envelope: grid needs >= 3 nodes and a positive half width");
    }
  }

  // A_i = w_i = lambda_i, with maps B_i^* from the frame.
  static Envelope from_frame(const ProjectionFrame& frame, const std::vector<ScalarField>& fields, Transform t,
                             EnvelopeOptions opt = {}) {
    if (fields.size() != frame.size()) throw PreconditionError("envelope: one field per frame factor");
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      if (fields[i].dimension() != frame.factor_dimension(i)) {
        throw PreconditionError("envelope: field " + std::to_string(i + 1) + " must live on R^" +
                                std::to_string(frame.factor_dimension(i)));
      }
      blocks.push_back({fields[i], frame.lambda(i) * frame.map(i).transpose(), frame.lambda(i)});
    }
    return Envelope(std::move(blocks), std::move(t), opt);
  }

  // Probit transform, A = (lambda I, mu I), weights (lambda, mu).
  static Envelope two_coefficient(const ScalarField& f, const ScalarField& g, double lambda, double mu,
                                  EnvelopeOptions opt = {}) {
    if (f.dimension() != g.dimension()) throw PreconditionError("envelope: f and g must share a dimension");
    const auto n = static_cast<Eigen::Index>(f.dimension());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    return Envelope({{f, lambda * I, lambda}, {g, mu * I, mu}}, Transform::probit(), opt);
  }

  std::size_t dimension() const noexcept { return n_; }
  std::size_t kernel_dimension() const noexcept { return static_cast<std::size_t>(kernel_.cols()); }
  const Transform& transform() const noexcept { return t_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  const Block& block(std::size_t i) const { return blocks_.at(i); }

  // sum_i w_i T(f_i(z_i)) for a stacked tuple z.
  double objective(std::span<const double> z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (blocks_[i].weight == 0.0) continue;
      s += blocks_[i].weight * blocks_[i].f.transformed(t_, z.subspan(offset_[i], blocks_[i].f.dimension())).value;
    }
    return s;
  }

  // sum_i A_i z_i.
  std::vector<double> combine(std::span<const double> z) const {
    const Eigen::Map<const Eigen::VectorXd> zz(z.data(), static_cast<Eigen::Index>(N_));
    const Eigen::VectorXd x = M_ * zz;
    return {x.data(), x.data() + x.size()};
  }

  // T(h(x)); writes the maximizing tuple when `argmax` is non-null.
  double transformed_value(std::span<const double> x, std::vector<double>* argmax = nullptr) const {
    if (x.size() != n_) throw PreconditionError("envelope: point has the wrong dimension");
    const Eigen::Map<const Eigen::VectorXd> xx(x.data(), static_cast<Eigen::Index>(n_));
    const Eigen::VectorXd zp = pinv_ * xx;
    const std::size_t d = kernel_dimension();
    Eigen::VectorXd z(zp.size());
    auto at = [&](double u0, double u1) {
      z = zp;
      if (d >= 1) z += u0 * kernel_.col(0);
      if (d >= 2) z += u1 * kernel_.col(1);
      return objective(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
    };
    if (d == 0) {
      const double v = at(0.0, 0.0);
      if (argmax) argmax->assign(zp.data(), zp.data() + zp.size());
      return v;
    }
    auto [best, bu0, bu1] = search_box(at, d, opt_.half_width);
    // Fields that level off at infinity can have their sup approached only
    // far out, behind an interior local maximum; probe a geometric ladder of
    // radii beyond the box and refine around the best probe if it wins.
    const double L = opt_.half_width;
    const std::size_t rungs = 64, angles = d == 1 ? 2 : 64;
    const double ratio = std::pow(std::max(opt_.max_half_width / L, 1.0), 1.0 / static_cast<double>(rungs));
    double pb = -std::numeric_limits<double>::infinity(), pr = 0.0, pa = 0.0;
    std::size_t pj = 0;
    for (std::size_t j = 1; j <= rungs; ++j) {
      const double r = L * std::pow(ratio, static_cast<double>(j));
      for (std::size_t k = 0; k < angles; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
        const double v = at(r * std::cos(th), d == 1 ? 0.0 : r * std::sin(th));
        if (v > pb) pb = v, pr = r, pa = th, pj = j;
      }
    }
    if (pb > best) {
      const double lo = L * std::pow(ratio, static_cast<double>(pj) - 1.0), hi = pr * ratio;
      const double c0 = std::cos(pa), s0 = std::sin(pa);
      const auto [sr, sv] = golden_max([&](double r) { return at(r * c0, d == 1 ? 0.0 : r * s0); }, lo, hi);
      best = pb, bu0 = pr * c0, bu1 = d == 1 ? 0.0 : pr * s0;
      if (sv > best) best = sv, bu0 = sr * c0, bu1 = d == 1 ? 0.0 : sr * s0;
      if (d == 2) {
        const double step = 2.0 * std::numbers::pi / static_cast<double>(angles);
        const double rr = std::hypot(bu0, bu1);
        const auto [sa, av] = golden_max([&](double t) { return at(rr * std::cos(t), rr * std::sin(t)); }, pa - step,
                                         pa + step);
        if (av > best) best = av, bu0 = rr * std::cos(sa), bu1 = rr * std::sin(sa);
      }
    }
    if (argmax) {
      at(bu0, bu1);
      argmax->assign(z.data(), z.data() + z.size());
    }
    return best;
  }

  double value(std::span<const double> x) const { return t_.inverse(transformed_value(x)); }

  // h as a field, with T(h) attached as its exact transformed hint.
  ScalarField field() const {
    auto self = std::make_shared<const Envelope>(*this);
    double tlo = 0.0, thi = 0.0;
    for (const auto& b : blocks_) {
      tlo += b.weight * t_.apply(b.f.lo()).value;
      thi += b.weight * std::min(t_.apply(b.f.hi()).value, t_.upper());
    }
    ScalarField h(n_, [self](std::span<const double> x) { return self->value(x); },
                  std::clamp(t_.inverse(tlo), 0.0, 1.0), std::clamp(t_.inverse(thi), 0.0, 1.0),
                  Smoothness::lipschitz, "envelope[" + t_.name() + "]");
    h.with_transformed(t_, [self](std::span<const double> x) { return self->transformed_value(x); });
    return h;
  }

 private:
  struct BoxMax {
    double value, u0, u1;
  };

  // Grid scan of [-L, L]^d with golden refinement; the grid doubles until the
  // maximum moves by less than tol.
  template <class Fn>
  BoxMax search_box(Fn&& at, std::size_t d, double L) const {
    double best = -std::numeric_limits<double>::infinity(), bu0 = 0.0, bu1 = 0.0;
    double previous = best;
    std::size_t g = d == 1 ? opt_.grid : opt_.grid_2d;
    for (;;) {
      const double h = 2.0 * L / static_cast<double>(g - 1);
      double gb = -std::numeric_limits<double>::infinity(), g0 = 0.0, g1 = 0.0;
      for (std::size_t i = 0; i < g; ++i) {
        const double u0 = -L + static_cast<double>(i) * h;
        if (d == 1) {
          const double v = at(u0, 0.0);
          if (v > gb) gb = v, g0 = u0;
        } else {
          for (std::size_t j = 0; j < g; ++j) {
            const double u1 = -L + static_cast<double>(j) * h;
            const double v = at(u0, u1);
            if (v > gb) gb = v, g0 = u0, g1 = u1;
          }
        }
      }
      // Golden refinement, coordinatewise for d = 2.
      for (int pass = 0; pass < (d == 1 ? 1 : 3); ++pass) {
        for (std::size_t c = 0; c < d; ++c) {
          auto line = [&](double s) { return c == 0 ? at(s, g1) : at(g0, s); };
          double& u = c == 0 ? g0 : g1;
          const auto [su, sv] = golden_max(line, std::max(-L, u - h), std::min(L, u + h));
          if (sv > gb) gb = sv, u = su;
        }
      }
      if (gb > best) best = gb, bu0 = g0, bu1 = g1;
      if (std::abs(best - previous) < opt_.tol || g >= opt_.max_grid) break;
      previous = best;
      g = 2 * g - 1;
    }
    return {best, bu0, bu1};
  }

  template <class Fn>
  std::pair<double, double> golden_max(Fn&& fn, double a, double b) const {
    constexpr double r = 0.6180339887498949;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = fn(c), fd = fn(d);
    for (int it = 0; it < opt_.golden_iterations; ++it) {
      if (fc >= fd) {
        b = d, d = c, fd = fc;
        c = b - r * (b - a);
        fc = fn(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + r * (b - a);
        fd = fn(d);
      }
    }
    return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
  }

  std::vector<Block> blocks_;
  Transform t_;
  EnvelopeOptions opt_;
  std::size_t n_ = 0, N_ = 0;
  std::vector<std::size_t> offset_;
  Eigen::MatrixXd M_, pinv_, kernel_;
};

inline ScalarField minimal_h(const std::vector<ScalarField>& fields, const ProjectionFrame& frame, const Transform& t,
                             EnvelopeOptions opt = {}) {
  return Envelope::from_frame(frame, fields, t, opt).field();
}

}  // namespace gaussgame
