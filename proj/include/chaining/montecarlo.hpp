// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "chaining/rng.hpp"

namespace chaining {

struct MeanEstimate {
  double mean = 0.0;
  double variance = 0.0;   // sample variance
  double std_error = 0.0;  // sqrt(variance / samples)
  std::size_t samples = 0;
};

// Samples are split into fixed-size chunks; chunk c draws from stream.child(c)
// and chunk statistics are merged in chunk order, so results do not depend on
// the number of worker threads.
inline constexpr std::size_t kMonteCarloChunk = 4096;

// draw(rng, out) fills `arity` statistics for one sample; returns one
// estimate per statistic.
std::vector<MeanEstimate> monte_carlo_means(std::size_t samples, std::size_t arity, const RngStream& stream,
                                            const std::function<void(Rng&, std::span<double>)>& draw);

// The raw draws in sample order, using the same chunk streams.
std::vector<double> monte_carlo_samples(std::size_t samples, const RngStream& stream,
                                        const std::function<double(Rng&)>& draw);

MeanEstimate monte_carlo_mean(std::size_t samples, const RngStream& stream, const std::function<double(Rng&)>& draw);

}  // namespace chaining
