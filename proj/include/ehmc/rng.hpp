#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ehmc/linalg.hpp"

namespace ehmc {

// Seedable generator with a platform-independent draw sequence.
//
// std::normal_distribution is implementation-defined, so normals are produced
// here by Box-Muller on 53-bit uniforms taken from std::mt19937_64. Each call to
// normal() consumes exactly one cached value or one pair of engine outputs.
// Chains split off independent streams via stream(chain_index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_index = 0)
      : seed_(seed), stream_(stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index),
                      static_cast<std::uint32_t>(stream_index >> 32)};
    engine_.seed(seq);
  }

  [[nodiscard]] Rng stream(std::uint64_t index) const { return Rng(seed_, index); }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_index() const { return stream_; }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec normal_vector(Eigen::Index size) {
    Vec out(size);
    for (Eigen::Index i = 0; i < size; ++i) out[i] = normal();
    return out;
  }

  // Index drawn with probability proportional to `weights` (non-negative).
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (target < weights[i]) return i;
      target -= weights[i];
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ehmc
