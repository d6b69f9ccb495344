// SPDX-License-Identifier: Apache-2.0
#include "chaining/gamma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "chaining/errors.hpp"
#include "chaining/parallel.hpp"

namespace chaining {

namespace {

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

std::string level_tag(std::size_t n) { return "level " + std::to_string(n) + ": "; }

// Pairwise distance lookup that avoids the cache lock for small sets.
class Distances {
 public:
  Distances(const MetricSpace& space, double p)
      : space_(space), p_(p), matrix_(space.size() <= kMatrixCacheLimit ? &space.matrix(p) : nullptr) {}

  double operator()(std::size_t i, std::size_t j) const {
    return matrix_ ? matrix_->at(i, j) : space_.distance(i, j, p_);
  }

  double diameter(const PartitionTree::Block& block) const {
    if (block.size() < 2) return 0.0;
    if (!matrix_) return space_.block_diameter(block, p_);
    double best = 0.0;
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t b = a + 1; b < block.size(); ++b) best = std::max(best, matrix_->at(block[a], block[b]));
    }
    return best;
  }

 private:
  const MetricSpace& space_;
  double p_;
  const DistanceMatrix* matrix_;
};

void sort_level(PartitionTree::Level& level) {
  for (auto& b : level) std::sort(b.begin(), b.end());
  std::sort(level.begin(), level.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

PartitionTree::Level singletons(std::size_t m) {
  PartitionTree::Level level(m);
  for (std::size_t i = 0; i < m; ++i) level[i] = {i};
  return level;
}

PartitionTree::Block whole(std::size_t m) {
  PartitionTree::Block b(m);
  std::iota(b.begin(), b.end(), std::size_t{0});
  return b;
}

// Farthest-point seeding (first seed = lowest index, ties to the lowest
// index) followed by nearest-seed assignment.
std::vector<PartitionTree::Block> split_block(const PartitionTree::Block& block, std::size_t pieces,
                                              const Distances& d) {
  if (pieces <= 1 || block.size() < 2) return {block};
  std::vector<std::size_t> seeds{0};
  std::vector<double> nearest(block.size());
  for (std::size_t a = 0; a < block.size(); ++a) nearest[a] = d(block[a], block[0]);
  while (seeds.size() < pieces) {
    std::size_t pick = 0;
    double far = 0.0;
    for (std::size_t a = 0; a < block.size(); ++a) {
      if (nearest[a] > far) {
        far = nearest[a];
        pick = a;
      }
    }
    if (far <= 0.0) break;
    seeds.push_back(pick);
    for (std::size_t a = 0; a < block.size(); ++a) nearest[a] = std::min(nearest[a], d(block[a], block[pick]));
  }
  std::vector<PartitionTree::Block> out(seeds.size());
  for (std::size_t a = 0; a < block.size(); ++a) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const double v = seeds[s] == a ? 0.0 : d(block[a], block[seeds[s]]);
      if (v < best_d) {
        best_d = v;
        best = s;
      }
    }
    out[best].push_back(block[a]);
  }
  return out;
}

// Number of pieces for each block so that the level holds at most `cap`
// blocks, shared in proportion to the block diameters.
std::vector<std::size_t> allocate(const PartitionTree::Level& level, const std::vector<double>& diam,
                                  std::size_t cap) {
  const std::size_t count = level.size();
  std::vector<std::size_t> k(count, 1);
  double total = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    if (level[j].size() > 1) total += diam[j];
  }
  if (total <= 0.0 || cap <= count) return k;
  const double spare = static_cast<double>(cap - count);
  std::vector<double> remainder(count, -1.0);
  std::size_t used = 0;
  for (std::size_t j = 0; j < count; ++j) {
    if (level[j].size() < 2 || diam[j] <= 0.0) {
      used += 1;
      continue;
    }
    const double share = spare * diam[j] / total;
    const double whole_part = std::floor(share);
    k[j] = std::min(level[j].size(), 1 + static_cast<std::size_t>(whole_part));
    if (k[j] < level[j].size()) remainder[j] = share - whole_part;
    used += k[j];
  }
  std::size_t left = cap - std::min(cap, used);
  while (left > 0) {
    std::size_t pick = kUnassigned;
    for (std::size_t j = 0; j < count; ++j) {
      if (remainder[j] < 0.0) continue;
      if (pick == kUnassigned || remainder[j] > remainder[pick]) pick = j;
    }
    if (pick == kUnassigned) break;
    ++k[pick];
    --left;
    remainder[pick] = k[pick] < level[pick].size() ? remainder[pick] - 1.0 : -1.0;
  }
  return k;
}

void require_exact_metric(const MetricSpace& space, double p) {
  const auto& m = space.matrix(p);
  if (!m.exact()) {
    throw PreconditionError("exact mode needs closed-form, enumerated or quadrature metrics; d_" +
                            std::to_string(p) + " fell back to Monte Carlo");
  }
}

GammaResult finish(PartitionTree tree, const MetricSpace& space, Functional f, GammaMode mode) {
  GammaResult r;
  r.functional = f;
  r.mode = mode;
  const std::size_t m = space.size();
  double best = -1.0;
  std::vector<std::vector<double>> diam(tree.depth());
  for (std::size_t n = 0; n < tree.depth(); ++n) {
    const Distances d(space, level_order(f, static_cast<unsigned>(n)));
    for (const auto& b : tree.level(n)) diam[n].push_back(d.diameter(b));
  }
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<double> terms(tree.depth());
    double sum = 0.0;
    for (std::size_t n = 0; n < tree.depth(); ++n) {
      terms[n] = level_weight(f, static_cast<unsigned>(n)) * diam[n][tree.block_of(n, t)];
      sum += terms[n];
    }
    if (sum > best) {
      best = sum;
      r.argmax = t;
      r.level_terms = std::move(terms);
    }
  }
  r.value = std::max(best, 0.0);
  r.certificate = std::move(tree);
  return r;
}

GammaResult exact_gamma(const MetricSpace& space, Functional f) {
  const std::size_t m = space.size();
  if (m > kExactModeCap) {
    throw ResourceError("exact mode supports at most " + std::to_string(kExactModeCap) + " points, got " +
                        std::to_string(m) + "; use greedy mode");
  }
  if (m == 1) return finish(PartitionTree::trivial(1), space, f, GammaMode::exact);
  const double p0 = level_order(f, 0);
  const double p1 = level_order(f, 1);
  require_exact_metric(space, p0);
  require_exact_metric(space, p1);
  const auto& d1 = space.matrix(p1);

  // Restricted growth strings with labels 0..3, in lexicographic order.
  using Labels = std::array<std::uint8_t, kExactModeCap>;
  std::vector<Labels> all;
  Labels a{};
  std::array<std::uint8_t, kExactModeCap> top{};
  const auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == m) {
      all.push_back(a);
      return;
    }
    const std::uint8_t hi = std::min<std::uint8_t>(3, static_cast<std::uint8_t>(top[i - 1] + 1));
    for (std::uint8_t v = 0; v <= hi; ++v) {
      a[i] = v;
      top[i] = std::max(top[i - 1], v);
      self(self, i + 1);
    }
  };
  a[0] = 0;
  top[0] = 0;
  rec(rec, 1);

  auto score = [&](const Labels& lab) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (lab[i] == lab[j]) worst = std::max(worst, d1.at(i, j));
      }
    }
    return worst;
  };
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (all.size() + kChunk - 1) / kChunk;
  std::vector<std::pair<double, std::size_t>> local(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::pair<double, std::size_t> best{std::numeric_limits<double>::infinity(), 0};
    const std::size_t end = std::min(all.size(), (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) {
      const double v = score(all[r]);
      if (v < best.first) best = {v, r};
    }
    local[c] = best;
  });
  std::pair<double, std::size_t> best = local.front();
  for (const auto& l : local) {
    if (l.first < best.first) best = l;
  }
  const Labels& lab = all[best.second];
  PartitionTree::Level level1(static_cast<std::size_t>(*std::max_element(lab.begin(), lab.begin() + m)) + 1);
  for (std::size_t i = 0; i < m; ++i) level1[lab[i]].push_back(i);
  std::vector<PartitionTree::Level> levels{{whole(m)}};
  const bool done = level1.size() == m;
  levels.push_back(std::move(level1));
  if (!done) levels.push_back(singletons(m));
  return finish(PartitionTree(std::move(levels)), space, f, GammaMode::exact);
}

GammaResult greedy_gamma(const MetricSpace& space, Functional f) {
  const std::size_t m = space.size();
  if (m > kGreedyModeCap) {
    throw ResourceError("greedy mode supports at most " + std::to_string(kGreedyModeCap) + " points");
  }
  std::vector<PartitionTree::Level> levels{{whole(m)}};
  for (unsigned n = 0; levels.back().size() < m; ++n) {
    const std::size_t cap = partition_cap(n + 1);
    if (cap >= m) {
      levels.push_back(singletons(m));
      break;
    }
    const auto& current = levels.back();
    const Distances d(space, level_order(f, n + 1));
    std::vector<double> diam(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) diam[j] = d.diameter(current[j]);
    const auto pieces = allocate(current, diam, cap);
    PartitionTree::Level next;
    for (std::size_t j = 0; j < current.size(); ++j) {
      for (auto& b : split_block(current[j], pieces[j], d)) next.push_back(std::move(b));
    }
    sort_level(next);
    levels.push_back(std::move(next));
  }
  return finish(PartitionTree(std::move(levels)), space, f, GammaMode::greedy);
}

}  // namespace

std::string functional_name(Functional f) { return f == Functional::gamma2 ? "gamma2" : "gammaX"; }

std::string mode_name(GammaMode mode) { return mode == GammaMode::exact ? "exact" : "greedy"; }

Functional parse_functional(const std::string& name) {
  if (name == "gamma2") return Functional::gamma2;
  if (name == "gammaX" || name == "gamma_x") return Functional::gamma_x;
  throw ValidationError("unknown functional '" + name + "' (expected gamma2 or gammaX)");
}

GammaMode parse_mode(const std::string& name) {
  if (name == "exact") return GammaMode::exact;
  if (name == "greedy") return GammaMode::greedy;
  throw ValidationError("unknown mode '" + name + "' (expected exact or greedy)");
}

std::size_t partition_cap(unsigned n) {
  if (n >= 6) return std::numeric_limits<std::size_t>::max();
  return std::size_t{1} << (std::size_t{1} << n);
}

double level_order(Functional f, unsigned n) { return f == Functional::gamma2 ? 2.0 : std::ldexp(1.0, static_cast<int>(n)); }

double level_weight(Functional f, unsigned n) {
  return f == Functional::gamma2 ? std::exp2(0.5 * static_cast<double>(n)) : 1.0;
}

PartitionTree::PartitionTree(std::vector<Level> levels) : levels_(std::move(levels)) {
  std::size_t m = 0;
  for (const auto& level : levels_) {
    for (const auto& b : level) {
      for (auto i : b) m = std::max(m, i + 1);
    }
  }
  owner_.assign(levels_.size(), std::vector<std::size_t>(m, kUnassigned));
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    for (std::size_t j = 0; j < levels_[n].size(); ++j) {
      for (auto i : levels_[n][j]) owner_[n][i] = j;
    }
  }
}

PartitionTree PartitionTree::trivial(std::size_t m) {
  if (m == 0) throw DomainError("partition tree needs at least one point");
  std::vector<Level> levels{{whole(m)}};
  if (m == 1) return PartitionTree(std::move(levels));
  for (unsigned n = 1; partition_cap(n) < m; ++n) levels.push_back({whole(m)});
  levels.push_back(singletons(m));
  return PartitionTree(std::move(levels));
}

PartitionTree PartitionTree::restrict(const std::vector<std::size_t>& keep) const {
  std::vector<std::size_t> renumber(point_count(), kUnassigned);
  for (std::size_t k = 0; k < keep.size(); ++k) renumber.at(keep[k]) = k;
  std::vector<Level> levels;
  for (const auto& level : levels_) {
    Level next;
    for (const auto& b : level) {
      Block block;
      for (auto i : b) {
        if (renumber[i] != kUnassigned) block.push_back(renumber[i]);
      }
      if (!block.empty()) next.push_back(std::move(block));
    }
    sort_level(next);
    levels.push_back(std::move(next));
  }
  return PartitionTree(std::move(levels));
}

std::size_t PartitionTree::point_count() const { return owner_.empty() ? 0 : owner_.front().size(); }

std::size_t PartitionTree::block_of(std::size_t n, std::size_t point) const {
  const std::size_t b = owner_.at(n).at(point);
  if (b == kUnassigned) throw ValidationError(level_tag(n) + "point " + std::to_string(point) + " is not covered");
  return b;
}

void PartitionTree::validate(std::size_t m) const {
  if (levels_.empty()) throw ValidationError("partition tree has no levels");
  if (m == 0) throw ValidationError("partition tree over an empty set");
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    const auto& level = levels_[n];
    if (n == 0 && level.size() != 1) throw ValidationError(level_tag(0) + "must be the single block T");
    if (n > 0 && level.size() > partition_cap(static_cast<unsigned>(n))) {
      throw ValidationError(level_tag(n) + std::to_string(level.size()) + " blocks exceed the cap " +
                            std::to_string(partition_cap(static_cast<unsigned>(n))));
    }
    std::vector<char> seen(m, 0);
    for (const auto& b : level) {
      if (b.empty()) throw ValidationError(level_tag(n) + "empty block");
      for (auto i : b) {
        if (i >= m) throw ValidationError(level_tag(n) + "index " + std::to_string(i) + " out of range");
        if (seen[i]) throw ValidationError(level_tag(n) + "index " + std::to_string(i) + " appears twice");
        seen[i] = 1;
      }
      if (n > 0) {
        const std::size_t parent = owner_[n - 1][b.front()];
        for (auto i : b) {
          if (owner_[n - 1][i] != parent) {
            throw ValidationError(level_tag(n) + "block containing " + std::to_string(b.front()) +
                                  " does not refine level " + std::to_string(n - 1));
          }
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!seen[i]) throw ValidationError(level_tag(n) + "index " + std::to_string(i) + " is not covered");
    }
  }
  if (levels_.back().size() != m) {
    throw ValidationError(level_tag(levels_.size() - 1) + "final level must consist of singletons");
  }
}

nlohmann::json PartitionTree::to_json() const { return nlohmann::json{{"levels", levels_}}; }

PartitionTree PartitionTree::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("levels") || !j.at("levels").is_array()) {
    throw ValidationError("partition tree JSON needs a 'levels' array");
  }
  std::vector<Level> levels;
  const auto& lv = j.at("levels");
  for (std::size_t n = 0; n < lv.size(); ++n) {
    if (!lv[n].is_array()) throw ValidationError(level_tag(n) + "expected a list of blocks");
    Level level;
    for (const auto& b : lv[n]) {
      if (!b.is_array()) throw ValidationError(level_tag(n) + "expected a block as a list of indices");
      Block block;
      for (const auto& i : b) {
        if (!i.is_number_unsigned()) throw ValidationError(level_tag(n) + "indices must be nonnegative integers");
        block.push_back(i.get<std::size_t>());
      }
      level.push_back(std::move(block));
    }
    levels.push_back(std::move(level));
  }
  return PartitionTree(std::move(levels));
}

double evaluate_certificate(const PartitionTree& tree, const MetricSpace& space, Functional f) {
  if (space.size() == 0) throw DomainError("certificate over an empty index set");
  tree.validate(space.size());
  return finish(tree, space, f, GammaMode::greedy).value;
}

double evaluate_certificate(const PartitionTree& tree, const IndexSet& T, const ProcessSpec& process, Functional f) {
  return evaluate_certificate(tree, MetricSpace(T, process), f);
}

std::vector<double> certificate_terms(const PartitionTree& tree, const MetricSpace& space, Functional f,
                                      std::size_t point) {
  tree.validate(space.size());
  std::vector<double> terms(tree.depth());
  for (std::size_t n = 0; n < tree.depth(); ++n) {
    const Distances d(space, level_order(f, static_cast<unsigned>(n)));
    terms[n] = level_weight(f, static_cast<unsigned>(n)) * d.diameter(tree.level(n)[tree.block_of(n, point)]);
  }
  return terms;
}

GammaResult compute_gamma(const MetricSpace& space, Functional f, GammaMode mode) {
  if (space.size() == 0) throw DomainError("gamma of an empty index set");
  return mode == GammaMode::exact ? exact_gamma(space, f) : greedy_gamma(space, f);
}

double uniform_space_gamma(std::size_t m, const std::function<double(double)>& pair_distance) {
  if (m < 2) throw DomainError("uniform_space_gamma needs m >= 2");
  double total = 0.0;
  // Level 0 is {T} whatever N_0 allows; level n >= 1 is all singletons once N_n >= m.
  for (unsigned n = 0; n == 0 || partition_cap(n) < m; ++n) total += pair_distance(std::ldexp(1.0, static_cast<int>(n)));
  return total;
}

}  // namespace chaining
