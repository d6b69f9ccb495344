// SPDX-License-Identifier: Apache-2.0
#include "chaining/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "chaining/parallel.hpp"

namespace chaining {

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }
};

}  // namespace

std::vector<MeanEstimate> monte_carlo_means(std::size_t samples, std::size_t arity, const RngStream& stream,
                                            const std::function<void(Rng&, std::span<double>)>& draw) {
  const std::size_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<std::vector<Moments>> partial(chunks, std::vector<Moments>(arity));
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream.child(c));
    std::vector<double> values(arity);
    const std::size_t count = std::min(kMonteCarloChunk, samples - c * kMonteCarloChunk);
    auto& acc = partial[c];
    for (std::size_t s = 0; s < count; ++s) {
      draw(rng, values);
      for (std::size_t k = 0; k < arity; ++k) acc[k].add(values[k]);
    }
  });
  std::vector<Moments> total(arity);
  for (const auto& chunk : partial) {
    for (std::size_t k = 0; k < arity; ++k) total[k].merge(chunk[k]);
  }
  std::vector<MeanEstimate> out(arity);
  for (std::size_t k = 0; k < arity; ++k) {
    out[k].samples = samples;
    out[k].mean = total[k].mean;
    out[k].variance = samples > 1 ? total[k].m2 / static_cast<double>(samples - 1) : 0.0;
    out[k].std_error = samples > 0 ? std::sqrt(out[k].variance / static_cast<double>(samples)) : 0.0;
  }
  return out;
}

MeanEstimate monte_carlo_mean(std::size_t samples, const RngStream& stream, const std::function<double(Rng&)>& draw) {
  return monte_carlo_means(samples, 1, stream, [&](Rng& rng, std::span<double> out) { out[0] = draw(rng); })[0];
}

std::vector<double> monte_carlo_samples(std::size_t samples, const RngStream& stream,
                                        const std::function<double(Rng&)>& draw) {
  std::vector<double> out(samples);
  const std::size_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream.child(c));
    const std::size_t end = std::min(samples, (c + 1) * kMonteCarloChunk);
    for (std::size_t s = c * kMonteCarloChunk; s < end; ++s) out[s] = draw(rng);
  });
  return out;
}

}  // namespace chaining
