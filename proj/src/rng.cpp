// SPDX-License-Identifier: Apache-2.0
#include "chaining/rng.hpp"

#include <array>
#include <cmath>

namespace chaining {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream RngStream::child(std::uint64_t k) const {
  return {master_seed, splitmix64(stream_id ^ splitmix64(k + 0x632BE59BD9B4E019ULL))};
}

namespace {

std::mt19937_64 seeded_engine(const RngStream& stream) {
  std::uint64_t state = splitmix64(stream.master_seed) ^ splitmix64(~stream.stream_id);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    state = splitmix64(state);
    words[i] = static_cast<std::uint32_t>(state);
    words[i + 1] = static_cast<std::uint32_t>(state >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(const RngStream& stream) : engine_(seeded_engine(stream)) {}

double Rng::uniform() {
  // 53 random bits, shifted to the midpoint so 0 and 1 never occur.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::normal() { return normal_(engine_); }

double Rng::sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

}  // namespace chaining
