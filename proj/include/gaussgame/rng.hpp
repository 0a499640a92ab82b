#pragma once

// Counter-based random streams. A draw is a pure function of
// (seed, stream index, counter), so path-parallel simulation reproduces the
// same numbers regardless of how paths are scheduled onto threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "gaussgame/errors.hpp"

namespace gaussgame {

// Philox4x32-10 (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Immutable stream descriptor. Safe to share across threads.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t index) : seed_(seed), index_(index) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t index() const noexcept { return index_; }

  // The 128 random bits of block `counter`.
  Philox4x32::Counter block(std::uint64_t counter) const noexcept {
    return Philox4x32::generate(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
         static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  }

  // Two uniforms in the open interval (0, 1) from block `counter`.
  std::pair<double, double> uniforms(std::uint64_t counter) const noexcept {
    const auto b = block(counter);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
  }

  // Two independent standard normals (Box-Muller) from block `counter`.
  std::pair<double, double> normals(std::uint64_t counter) const noexcept {
    const auto [u1, u2] = uniforms(counter);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t index_ = 0;
};

// Sequential cursor over a stream's normals. Owned by one path, never shared.
class NormalSampler {
 public:
  explicit NormalSampler(RngStream stream) : stream_(stream) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto [z0, z1] = stream_.normals(counter_++);
    spare_ = z1;
    has_spare_ = true;
    return z0;
  }

  void fill(std::span<double> out) {
    for (double& z : out) z = (*this)();
  }

  const RngStream& stream() const noexcept { return stream_; }

 private:
  RngStream stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Brownian increments (dW, dW~), each N(0, dt I), with componentwise
// correlation rho. rho = 1 gives dW~ == dW exactly.
inline void correlated_increments(double rho, double dt, NormalSampler& rng, std::span<double> dw,
                                  std::span<double> dw_tilde) {
  if (!(std::abs(rho) <= 1.0)) {
    throw PreconditionError("correlated_increments: |rho| must be <= 1");
  }
  if (!(dt > 0.0)) throw PreconditionError("correlated_increments: dt must be positive");
  if (dw.size() != dw_tilde.size()) {
    throw PreconditionError("correlated_increments: dimension mismatch");
  }
  const double sdt = std::sqrt(dt);
  const double orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::size_t i = 0; i < dw.size(); ++i) {
    const double z1 = rng();
    const double z2 = rng();
    dw[i] = sdt * z1;
    dw_tilde[i] = rho == 1.0 ? dw[i] : (rho == -1.0 ? -dw[i] : sdt * (rho * z1 + orth * z2));
  }
}

inline std::pair<std::vector<double>, std::vector<double>> correlated_increments(double rho, double dt,
                                                                                 std::size_t dim,
                                                                                 NormalSampler& rng) {
  std::pair<std::vector<double>, std::vector<double>> out{std::vector<double>(dim), std::vector<double>(dim)};
  correlated_increments(rho, dt, rng, out.first, out.second);
  return out;
}

}  // namespace gaussgame
