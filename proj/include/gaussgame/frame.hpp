#pragma once

// Geometric Brascamp-Lieb data: weights lambda_i and maps B_i : R^n -> R^{n_i}
// with sum_i lambda_i B_i^* B_i = I_n and B_i B_i^* = I_{n_i}.
//
// Text format (whitespace separated):
//   k n
//   n_1 lambda_1
//   <n_1 rows of n numbers>
//   ...

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gaussgame/errors.hpp"

namespace gaussgame {

class ProjectionFrame {
 public:
  static constexpr double kTolerance = 1e-12;

  ProjectionFrame() = default;

  // Validates on construction.
  ProjectionFrame(std::size_t n, std::vector<double> lambdas, std::vector<Eigen::MatrixXd> maps, double tol = kTolerance)
      : n_(n), lambdas_(std::move(lambdas)), maps_(std::move(maps)) {
    validate(tol);
  }

  // k copies of I_n: the Ehrhard setting. Needs sum lambda_i = 1.
  static ProjectionFrame identity(std::size_t n, std::vector<double> lambdas) {
    std::vector<Eigen::MatrixXd> maps(lambdas.size(), Eigen::MatrixXd::Identity(n, n));
    return ProjectionFrame(n, std::move(lambdas), std::move(maps));
  }

  // Coordinate projections x -> x_i with lambda_i = 1.
  static ProjectionFrame orthogonal(std::size_t n) {
    std::vector<Eigen::MatrixXd> maps;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(1, n);
      b(0, i) = 1.0;
      maps.push_back(b);
    }
    return ProjectionFrame(n, std::vector<double>(n, 1.0), std::move(maps));
  }

  // Rank-one projections of R^2 onto unit vectors at the given angles
  // (degrees), all with the same weight.
  static ProjectionFrame planar(const std::vector<double>& degrees, double lambda) {
    std::vector<Eigen::MatrixXd> maps;
    for (double d : degrees) {
      const double a = d * std::numbers::pi / 180.0;
      Eigen::MatrixXd b(1, 2);
      b << std::cos(a), std::sin(a);
      maps.push_back(b);
    }
    return ProjectionFrame(2, std::vector<double>(degrees.size(), lambda), std::move(maps));
  }

  static ProjectionFrame parse(const std::string& text) {
    std::istringstream in(text);
    std::size_t k = 0, n = 0;
    if (!(in >> k >> n) || k == 0 || n == 0) throw FrameError("frame: expected header 'k n' with k, n >= 1");
    std::vector<double> lambdas;
    std::vector<Eigen::MatrixXd> maps;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t ni = 0;
      double li = 0.0;
      if (!(in >> ni >> li) || ni == 0) {
        throw FrameError("frame: factor " + std::to_string(i + 1) + " needs 'n_i lambda_i'");
      }
      Eigen::MatrixXd b(ni, n);
      for (std::size_t r = 0; r < ni; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          if (!(in >> b(r, c))) {
            throw FrameError("frame: factor " + std::to_string(i + 1) + " has fewer than " +
                             std::to_string(ni * n) + " matrix entries");
          }
        }
      lambdas.push_back(li);
      maps.push_back(std::move(b));
    }
    std::string extra;
    if (in >> extra) throw FrameError("frame: trailing content '" + extra + "'");
    return ProjectionFrame(n, std::move(lambdas), std::move(maps));
  }

  static ProjectionFrame from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FrameError("frame: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  std::string to_text() const {
    std::ostringstream out;
    out.precision(17);
    out << size() << ' ' << n_ << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
      out << maps_[i].rows() << ' ' << lambdas_[i] << '\n';
      for (Eigen::Index r = 0; r < maps_[i].rows(); ++r) {
        for (Eigen::Index c = 0; c < maps_[i].cols(); ++c) out << (c ? " " : "") << maps_[i](r, c);
        out << '\n';
      }
    }
    return out.str();
  }

  std::size_t size() const noexcept { return maps_.size(); }
  std::size_t dimension() const noexcept { return n_; }
  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  double lambda(std::size_t i) const { return lambdas_.at(i); }
  const Eigen::MatrixXd& map(std::size_t i) const { return maps_.at(i); }
  std::size_t factor_dimension(std::size_t i) const { return static_cast<std::size_t>(maps_.at(i).rows()); }

  // max |sum lambda_i B_i^* B_i - I|.
  double resolution_defect() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t i = 0; i < size(); ++i) s += lambdas_[i] * maps_[i].transpose() * maps_[i];
    return (s - Eigen::MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff();
  }

  // max |B_i B_i^* - I|.
  double coisometry_defect(std::size_t i) const {
    const auto& b = maps_.at(i);
    return (b * b.transpose() - Eigen::MatrixXd::Identity(b.rows(), b.rows())).cwiseAbs().maxCoeff();
  }

  void validate(double tol = kTolerance) const {
    if (n_ == 0 || maps_.empty()) throw FrameError("frame: needs n >= 1 and at least one factor");
    if (maps_.size() != lambdas_.size()) throw FrameError("frame: one weight per map");
    for (std::size_t i = 0; i < size(); ++i) {
      if (!(lambdas_[i] >= 0.0)) throw FrameError("frame: lambda_" + std::to_string(i + 1) + " is negative");
      if (maps_[i].cols() != static_cast<Eigen::Index>(n_) || maps_[i].rows() == 0 ||
          maps_[i].rows() > static_cast<Eigen::Index>(n_)) {
        throw FrameError("frame: B_" + std::to_string(i + 1) + " must be n_i x n with 1 <= n_i <= n");
      }
      if (const double d = coisometry_defect(i); !(d <= tol)) {
        throw FrameError("frame: B_" + std::to_string(i + 1) + " B_" + std::to_string(i + 1) +
                         "^* differs from the identity by " + fmt_num(d));
      }
    }
    if (const double d = resolution_defect(); !(d <= tol)) {
      throw FrameError("frame: sum lambda_i B_i^* B_i differs from the identity by " + fmt_num(d));
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> lambdas_;
  std::vector<Eigen::MatrixXd> maps_;
};

}  // namespace gaussgame
