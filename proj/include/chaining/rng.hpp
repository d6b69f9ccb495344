// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace chaining {

// Identifies a reproducible random stream: the same (master_seed, stream_id)
// pair always yields the same sequence.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  // Derived stream for sub-task k (e.g. a Monte Carlo chunk).
  [[nodiscard]] RngStream child(std::uint64_t k) const;

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

// Per-worker generator. Never shared between threads.
class Rng {
 public:
  explicit Rng(const RngStream& stream);

  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard exponential.
  double exponential();
  double normal();
  // +1 or -1 with equal probability.
  double sign();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace chaining
