// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chaining/rng.hpp"
#include "chaining/tail_function.hpp"

namespace chaining {

enum class Family { gaussian, rademacher, sym_exponential, sym_weibull, three_point, log_concave_tail };

std::string family_name(Family family);

// Finite law of X as (value, probability) atoms.
using DiscreteLaw = std::vector<std::pair<double, double>>;

// A symmetric law scaled to mean 0 and variance 1. Immutable and safe to
// share between threads.
//
// Families:
//   gaussian          standard normal
//   rademacher        +-1 with probability 1/2
//   sym_exponential   Laplace, P(|X| > t) = exp(-sqrt(2) t)
//   sym_weibull(k)    P(|X| > t) = exp(-(t/s)^k), s chosen for unit variance
//   three_point(a)    P(X = +-a) = 1/(2a^2), P(X = 0) = 1 - 1/a^2, a > 1
//   log_concave_tail  P(|Y| > t) = exp(-N(t)) for a user tail N, rescaled
class DistributionModel {
 public:
  static DistributionModel gaussian();
  static DistributionModel rademacher();
  static DistributionModel sym_exponential();
  static DistributionModel sym_weibull(double shape);
  static DistributionModel three_point(double atom);
  // raw_tail is the tail of |Y| before standardization.
  static DistributionModel from_tail(const TailFunction& raw_tail);

  // {"family": ..., "params": {...}}
  static DistributionModel from_json(const nlohmann::json& descriptor);
  nlohmann::json to_json() const;

  Family family() const;
  std::string name() const;
  // Multiplier applied to the raw family to reach unit variance.
  double scale() const;

  // ||X||_p = (E|X|^p)^(1/p), p >= 1.
  double moment(double p) const;
  // E|X|^p and its logarithm, p > 0.
  double abs_moment(double p) const;
  double log_abs_moment(double p) const;
  // E X^(2k); tabulated up to 2k = 128.
  double even_moment(unsigned k) const;

  // N(t) = -ln P(|X| > t), t >= 0.
  double tail_value(double t) const;
  const TailFunction& tail() const;
  double essential_sup() const;

  // inf{t : N(t) >= level}; maps a standard exponential to a draw of |X|.
  double abs_from_exponential(double level) const;

  std::optional<DiscreteLaw> discrete_law() const;
  bool has_characteristic_function() const;
  // E cos(uX); only for families with a closed form.
  double characteristic_function(double u) const;
  // log E cos(uX), accurate near u = 0; -inf where the transform is not positive.
  double log_characteristic_function(double u) const;

  double draw(Rng& rng) const;
  std::vector<double> sample(const RngStream& stream, std::size_t count) const;

 private:
  struct State;
  explicit DistributionModel(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

// {2, 2.5, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128}
const std::vector<double>& default_p_grid();

// Outcome of a grid-certified class check. For the alpha check (q, p) is the
// maximizer of ||X||_p q / (p ||X||_q); for the speed check it is the
// minimizer (p, beta p) of ||X||_{beta p} / ||X||_p. ratio is always the raw
// moment ratio ||X||_p / ||X||_q of the witness pair.
struct RegularityWitness {
  bool pass = false;
  double q = 0.0;
  double p = 0.0;
  double ratio = 0.0;
  // alpha check: ratio * q / p (compared with alpha); speed check: ratio.
  double normalized_ratio = 0.0;
  std::vector<double> grid;
};

RegularityWitness check_alpha_regular(const DistributionModel& model, double alpha,
                                      const std::vector<double>& p_grid = default_p_grid());
RegularityWitness check_speed_beta(const DistributionModel& model, double beta,
                                   const std::vector<double>& p_grid = default_p_grid());

nlohmann::json to_json(const RegularityWitness& witness);

}  // namespace chaining
