// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaining/metric.hpp"
#include "chaining/montecarlo.hpp"

namespace chaining {

// sup_increments: sup_{s,t} <s - t, X> = max_t X_t - min_t X_t
// sup_abs:        sup_t |X_t|
// max_only:       sup_t X_t
enum class SupTarget { sup_increments, sup_abs, max_only };

std::string target_name(SupTarget target);
SupTarget parse_target(const std::string& name);

inline constexpr std::size_t kMinSupSamples = 100;

struct SupremumEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  SupTarget target = SupTarget::sup_increments;

  nlohmann::json to_json() const;
};

SupremumEstimate to_sup_estimate(const MeanEstimate& m, const RngStream& stream, SupTarget target);

// Largest and smallest <t, x> over t in T.
struct Extremes {
  double max = 0.0;
  double min = 0.0;
};
Extremes extremes(const IndexSet& T, std::span<const double> x);
double sup_statistic(const Extremes& e, SupTarget target);

SupremumEstimate estimate_sup(const ProcessSpec& process, const IndexSet& T, std::size_t samples,
                              const RngStream& stream, SupTarget target = SupTarget::sup_increments);

// Several index sets evaluated on the same draws of X. Returns one estimate per
// set followed by one per consecutive difference (set k minus set k+1).
std::vector<MeanEstimate> estimate_sup_common(const ProcessSpec& process, const std::vector<IndexSet>& sets,
                                              std::size_t samples, const RngStream& stream, SupTarget target);

// Draws of the supremum in sample order.
std::vector<double> sup_samples(const ProcessSpec& process, const IndexSet& T, std::size_t samples,
                                const RngStream& stream, SupTarget target);

// Order statistics of (|X_1|, ..., |X_n|) for i.i.d. X_i.
struct OrderStatRow {
  std::size_t k = 0;
  MeanEstimate value;       // E X_k^*
  MeanEstimate prefix_sum;  // E sum_{j <= k} X_j^*
  std::vector<std::pair<double, double>> bounds;  // (q, 2 (n/k)^(1/q) ||X||_q)
};

std::vector<OrderStatRow> order_stat_means(const DistributionModel& model, std::size_t n,
                                           const std::vector<std::size_t>& ks, std::size_t samples,
                                           const RngStream& stream, const std::vector<double>& qs = {2.0, 4.0});

// P(S >= lambda E S) >= (1 - lambda)^2 (E S)^2 / E S^2.
struct PaleyZygmundResult {
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
  double lhs_std_error = 0.0;  // 0 for exact laws
  bool exact = true;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Finite law of S >= 0 given as (value, probability) pairs.
PaleyZygmundResult paley_zygmund_check(const DiscreteLaw& law, double lambda);
// Empirical law; the verdict allows three standard errors on lhs.
PaleyZygmundResult paley_zygmund_check(std::span<const double> samples, double lambda);

struct ContractionResult {
  double p = 0.0;
  IncrementNormResult norm_a;
  IncrementNormResult norm_b;
  bool norm_pass = false;
  bool has_sup = false;
  SupremumEstimate sup_a;
  SupremumEstimate sup_b;
  double combined_std_error = 0.0;
  bool sup_pass = true;
  bool pass = false;

  nlohmann::json to_json() const;
};

// ||sum a_i eps_i||_p <= ||sum b_i eps_i||_p for |a_i| <= |b_i|, and with T
// given, E sup_t sum t_i a_i eps_i <= E sup_t sum t_i b_i eps_i.
ContractionResult contraction_check(std::span<const double> a, std::span<const double> b, double p,
                                    const IndexSet* T = nullptr, std::size_t samples = 100000,
                                    const RngStream& stream = {0x636f6e7472616374ULL, 0});

struct SymmetrizationPair {
  std::size_t s = 0;
  std::size_t t = 0;
  double norm = 0.0;             // ||X_s - X_t||_p
  double symmetrized_norm = 0.0;  // ||X~_s - X~_t||_p
  double ratio = 0.0;
  double ratio_sigma = 0.0;
  bool pass = false;
};

struct SymmetrizationResult {
  double p = 0.0;
  std::size_t samples = 0;
  std::vector<SymmetrizationPair> pairs;
  MeanEstimate sup;              // E sup_{s,t} (X_s - X_t)
  MeanEstimate symmetrized_sup;  // E sup_{s,t} (X~_s - X~_t)
  MeanEstimate symmetrized_max;  // E sup_t X~_t
  MeanEstimate identity_gap;     // E [sup_{s,t} (X~_s - X~_t) - 2 sup_t X~_t]
  double sup_ratio = 0.0;
  double sup_ratio_sigma = 0.0;
  bool moments_pass = false;
  bool sup_pass = false;
  bool identity_pass = false;
  bool pass = false;

  nlohmann::json to_json() const;
};

// X~_t = sum t_i eps_i X_i with independent signs. Checks
// 1/2 ||X_s - X_t||_p <= ||X~_s - X~_t||_p <= 2 ||X_s - X_t||_p, the same
// bracket for E sup, and E sup_{s,t}(X~_s - X~_t) = 2 E sup_t X~_t, each
// within three standard errors.
SymmetrizationResult symmetrization_check(const ProcessSpec& process, const IndexSet& T, double p,
                                          std::size_t samples, const RngStream& stream);

nlohmann::json to_json(const MeanEstimate& m);

}  // namespace chaining
