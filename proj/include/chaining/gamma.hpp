// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaining/metric.hpp"

namespace chaining {

enum class Functional { gamma2, gamma_x };
enum class GammaMode { exact, greedy };

std::string functional_name(Functional f);
std::string mode_name(GammaMode mode);
Functional parse_functional(const std::string& name);
GammaMode parse_mode(const std::string& name);

inline constexpr std::size_t kExactModeCap = 10;
inline constexpr std::size_t kGreedyModeCap = 10000;

// N_n = 2^(2^n); saturates at SIZE_MAX from n = 6 on.
std::size_t partition_cap(unsigned n);

// Exponent p and weight w of level n: the level-n term is w * Delta_p(A_n(t)).
// gamma_x: p = 2^n, w = 1. gamma2: p = 2, w = 2^(n/2).
double level_order(Functional f, unsigned n);
double level_weight(Functional f, unsigned n);

// Admissible sequence of partitions of {0, ..., m-1}. Blocks are sorted and
// listed by smallest member.
class PartitionTree {
 public:
  using Block = std::vector<std::size_t>;
  using Level = std::vector<Block>;

  PartitionTree() = default;
  explicit PartitionTree(std::vector<Level> levels);

  // {T} at every level until N_n >= m, then singletons.
  static PartitionTree trivial(std::size_t m);

  std::size_t depth() const { return levels_.size(); }
  const Level& level(std::size_t n) const { return levels_.at(n); }
  const std::vector<Level>& levels() const { return levels_; }
  std::size_t point_count() const;

  // Index of the block of `point` at level n.
  std::size_t block_of(std::size_t n, std::size_t point) const;

  // The tree induced on the listed points, renumbered 0..k-1 in list order.
  PartitionTree restrict(const std::vector<std::size_t>& keep) const;

  // Throws ValidationError naming the failing level.
  void validate(std::size_t m) const;

  nlohmann::json to_json() const;
  static PartitionTree from_json(const nlohmann::json& j);

 private:
  std::vector<Level> levels_;
  std::vector<std::vector<std::size_t>> owner_;  // owner_[n][point] = block index
};

// sup_t sum_n w_n Delta_{p_n}(A_n(t)), with singleton blocks contributing 0.
double evaluate_certificate(const PartitionTree& tree, const MetricSpace& space, Functional f);
double evaluate_certificate(const PartitionTree& tree, const IndexSet& T, const ProcessSpec& process, Functional f);

struct GammaResult {
  double value = 0.0;
  PartitionTree certificate;
  Functional functional = Functional::gamma_x;
  GammaMode mode = GammaMode::greedy;
  // Level sums of the maximizing point.
  std::vector<double> level_terms;
  std::size_t argmax = 0;
};

// Exact mode (|T| <= 10) searches all level-1 partitions into at most four
// blocks with singletons at level 2; it needs error-free metrics. Greedy
// mode splits blocks by farthest-point seeding.
GammaResult compute_gamma(const MetricSpace& space, Functional f, GammaMode mode);

// Level sums of one point under a tree.
std::vector<double> certificate_terms(const PartitionTree& tree, const MetricSpace& space, Functional f,
                                      std::size_t point);

// sum_{n < n*} pair_distance(2^n), n* = min{n : 2^(2^n) >= m}: gamma_x of
// an m-point space whose pairs are all at the same distance.
double uniform_space_gamma(std::size_t m, const std::function<double(double)>& pair_distance);

}  // namespace chaining
