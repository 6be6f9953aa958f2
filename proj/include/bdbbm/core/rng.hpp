// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bdbbm {

/// Seeded stream keyed by (master seed, replica, stream tag).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t replica = 0, std::uint64_t tag = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32),
                      static_cast<std::uint32_t>(tag)};
    engine_.seed(seq);
  }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - std::generate_canonical<double, 53>(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal(double sd = 1.0) { return normal_(engine_) * sd; }
  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }
  /// Uniform integer in [lo, hi].
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }
  std::uint64_t poisson(double mean) { return std::poisson_distribution<std::uint64_t>(mean)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bdbbm
