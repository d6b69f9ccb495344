// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaining/gamma.hpp"
#include "chaining/metric.hpp"
#include "chaining/stochlab.hpp"

namespace chaining {

// Artifact thresholds. Observed values are always reported alongside.
inline constexpr double kTwoSidedConstant = 40.0;
inline constexpr double kWeakStrongConstant = 4.0;

// ---------------------------------------------------------------- Sudakov

struct SeparationWitness {
  std::size_t s = 0;
  std::size_t t = 0;
  double distance = 0.0;
  double error_bound = 0.0;
};

struct SudakovReport {
  double p = 0.0;
  double u = 0.0;
  std::size_t cardinality = 0;
  bool cardinality_ok = false;  // |T| >= e^p
  double min_observed_separation = 0.0;
  SeparationWitness closest;
  std::vector<SeparationWitness> offending;  // pairs closer than u beyond their error bound
  bool separation_ok = false;
  SupremumEstimate esup;
  double kappa_obs = 0.0;
  double kappa_std_error = 0.0;

  nlohmann::json to_json() const;
};

SudakovReport sudakov_experiment(const ProcessSpec& process, const IndexSet& T, double p, double u,
                                 std::size_t samples, const RngStream& stream, const MetricOptions& metric = {});

// ------------------------------------------------------ index constructions

// All 0/1 vectors of length n with exactly m ones, in lexicographic order of
// the support.
IndexSet packing_set(std::size_t m, std::size_t n);

// C(n, m) and (n/m)^m; the first is never smaller.
struct PackingCount {
  double cardinality = 0.0;
  double lower_bound = 0.0;
  bool holds = false;
};
PackingCount packing_count(std::size_t m, std::size_t n);

// {(a_1, b_1, a_2, b_2, ...) : a, b in T}, row-major in (a, b).
IndexSet interleave(const IndexSet& T);

// ---------------------------------------------------------------- two-sided

struct TwoSidedReport {
  std::size_t cardinality = 0;
  GammaResult certificate;
  std::optional<double> gamma_exact;
  SupremumEstimate esup;
  double ratio_upper = 0.0;  // esup / certificate value
  double ratio_lower = 0.0;  // gamma / esup, gamma = exact value when known
  bool degenerate = false;   // gamma = esup = 0
  bool pass = false;         // both ratios <= kTwoSidedConstant

  double gamma_reference() const { return gamma_exact.value_or(certificate.value); }
  nlohmann::json to_json() const;
};

// Greedy certificate always; the exact value as well when |T| <= 10 and the
// metrics are error-free. Mode exact makes the exact value mandatory.
TwoSidedReport two_sided_experiment(const MetricSpace& space, std::size_t samples, const RngStream& stream,
                                    GammaMode mode);

// --------------------------------------------------------------- weak-strong

struct WeakStrongReport {
  double p = 0.0;
  MeanEstimate strong_moment;  // E sup_t |X_t|^p
  double strong = 0.0;         // (E sup_t |X_t|^p)^(1/p)
  MeanEstimate weak_sup;       // E sup_t |X_t|
  double max_norm = 0.0;       // sup_t ||X_t||_p
  double max_norm_error = 0.0;
  std::size_t argmax = 0;
  double c_obs = 0.0;
  double c_obs_std_error = 0.0;

  nlohmann::json to_json() const;
};

WeakStrongReport weak_strong_experiment(const ProcessSpec& process, const IndexSet& T, double p,
                                        std::size_t samples, const RngStream& stream,
                                        const MetricOptions& metric = {});

// ---------------------------------------------------------------- comparison

struct TailPoint {
  double level = 0.0;  // quantile level of sup X
  double u = 0.0;
  double prob_y = 0.0;  // P(sup Y >= u)
};

struct FrontierPoint {
  double c_arg = 0.0;
  double c_prob = 0.0;  // smallest c with P(sup Y >= u) <= c P(sup X >= u / c_arg) on the grid
  std::vector<double> ratios;
};

struct ComparisonReport {
  std::vector<double> p_grid;
  double y_scale = 1.0;
  double max_domination_ratio = 0.0;  // max ||Y_s - Y_t||_p / ||X_s - X_t||_p
  SupremumEstimate esup_x;
  SupremumEstimate esup_y;
  double ratio = 0.0;
  double ratio_std_error = 0.0;
  std::vector<TailPoint> tail;
  std::vector<FrontierPoint> frontier;

  nlohmann::json to_json() const;
};

inline const std::vector<double> kTailQuantiles{0.5, 0.75, 0.9, 0.95, 0.99};
inline const std::vector<double> kFrontierArgGrid{1.0, 1.25, 1.5, 2.0, 3.0, 4.0};

// Y is evaluated on y_scale * T. Both suprema use the same stream, so equal
// processes give identical draws. Throws PreconditionError with the witness
// (s, t, p) when increment domination fails beyond the metric error bounds.
ComparisonReport comparison_experiment(const ProcessSpec& x, const ProcessSpec& y, const IndexSet& T,
                                       const std::vector<double>& p_grid, std::size_t samples,
                                       const RngStream& stream, double y_scale = 1.0,
                                       const MetricOptions& metric = {});

// ------------------------------------------------------------- hull

struct ChainPoint {
  std::size_t k = 0;
  unsigned level = 0;
  std::size_t from = 0;  // pi_{n-1}
  std::size_t to = 0;    // pi_n
  double step = 0.0;     // d_{2^(n+1)}(pi_n, pi_{n-1})
  std::vector<double> point;
  double norm_cap = 0.0;  // ||X_{s^k}||_{log(k+2)}
  double norm_error = 0.0;
  NormMethod method = NormMethod::closed_form;
};

struct PairResidual {
  std::size_t s = 0;
  std::size_t t = 0;
  double residual = 0.0;  // max-abs coordinate error of the telescoped s - t
  double weight = 0.0;    // total coefficient mass used
};

struct HullDecomposition {
  std::vector<ChainPoint> chain;  // s^1 = 0 is implicit
  std::vector<std::size_t> m_index;  // M_n = sum_{j <= n} N_j
  std::size_t skipped_steps = 0;
  double R = 0.0;
  double max_step = 0.0;
  std::vector<PairResidual> residuals;
  double max_residual = 0.0;
  double max_norm_cap = 0.0;
  bool residual_ok = false;
  bool caps_ok = false;
  bool bookkeeping_ok = false;
  bool weights_ok = false;
  bool pass = false;

  nlohmann::json to_json() const;
};

inline constexpr double kHullResidualTolerance = 1e-9;
inline constexpr double kHullCapTolerance = 1e-9;

HullDecomposition convex_hull_decomposition(const MetricSpace& space, const PartitionTree& tree);

// ----------------------------------------------------- packing-set chain

struct PackingChainReport {
  std::size_t m = 0;
  std::size_t n = 0;
  SupremumEstimate esup;
  MeanEstimate top_sum;  // E sum_{k <= m} X_k^*
  double combined_std_error = 0.0;
  bool chain_pass = false;  // esup <= 2 E sum_{k<=m} X_k^* + 3 sigma
  std::vector<OrderStatRow> order_stats;
  std::size_t bound_violations = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

PackingChainReport packing_chain_experiment(const DistributionModel& model, std::size_t m, std::size_t n,
                                            std::size_t samples, const RngStream& stream,
                                            const std::vector<double>& qs = {2.0, 4.0});

// ---------------------------------------------------- interleaving chain

struct InterleaveReport {
  double p = 0.0;
  double u = 0.0;
  std::size_t base_cardinality = 0;
  std::size_t cardinality = 0;
  double min_separation = 0.0;  // on the interleaved set
  double min_base_separation = 0.0;
  unsigned k = 0;               // 2^k <= p < 2^(k+1)
  std::vector<std::size_t> block;  // a level-k block with two points
  double block_diameter = 0.0;  // Delta_{2^k}
  double gamma = 0.0;
  GammaMode mode = GammaMode::greedy;
  SupremumEstimate esup_base;
  SupremumEstimate esup;
  bool chain_pass = false;  // u <= Delta_{2^k}(A) <= gamma
  bool esup_pass = false;   // E sup over the interleaved set <= 2 E sup over T
  bool pass = false;

  nlohmann::json to_json() const;
};

InterleaveReport interleave_experiment(const ProcessSpec& process, const IndexSet& T, double p, double u,
                                       std::size_t samples, const RngStream& stream);

}  // namespace chaining
