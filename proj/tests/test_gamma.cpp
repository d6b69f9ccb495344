#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chaining/errors.hpp"
#include "chaining/gamma.hpp"
#include "chaining/parallel.hpp"

using namespace chaining;

namespace {

IndexSet basis(std::size_t n) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) pts[i][i] = 1.0;
  return IndexSet(pts);
}

IndexSet random_set(std::size_t count, std::size_t dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& x : p) x = normal(gen);
  return IndexSet(pts);
}

// Brute force over every labelling of the points by at most four colors.
double brute_force_gamma(const MetricSpace& space, Functional f) {
  const std::size_t m = space.size();
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  const double top = level_weight(f, 0) * space.block_diameter(all, level_order(f, 0));
  double best = 1e300;
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    double worst = 0.0;
    std::size_t c = code;
    std::vector<std::size_t> color(m);
    for (std::size_t i = 0; i < m; ++i, c /= 4) color[i] = c % 4;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (color[i] == color[j]) worst = std::max(worst, space.distance(i, j, level_order(f, 1)));
    best = std::min(best, worst);
  }
  return top + level_weight(f, 1) * best;
}

}  // namespace

TEST_CASE("partition caps and level parameters") {
  CHECK(partition_cap(1) == 4);
  CHECK(partition_cap(2) == 16);
  CHECK(partition_cap(3) == 256);
  CHECK(partition_cap(4) == 65536);
  CHECK(partition_cap(5) == 4294967296ULL);
  CHECK(partition_cap(9) == std::numeric_limits<std::size_t>::max());
  CHECK(level_order(Functional::gamma_x, 3) == 8.0);
  CHECK(level_order(Functional::gamma2, 3) == 2.0);
  CHECK(level_weight(Functional::gamma2, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(level_weight(Functional::gamma_x, 5) == 1.0);
}

TEST_CASE("tree validation names the level") {
  CHECK_NOTHROW(PartitionTree::trivial(5).validate(5));
  auto message = [](const PartitionTree& t, std::size_t m) {
    try {
      t.validate(m);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const PartitionTree too_many({{{0, 1, 2, 3, 4}}, {{0}, {1}, {2}, {3}, {4}}});
  CHECK(message(too_many, 5).find("level 1") != std::string::npos);
  const PartitionTree base({{{0, 1}, {2}}, {{0}, {1}, {2}}});
  CHECK(message(base, 3).find("level 0") != std::string::npos);
  const PartitionTree crossing({{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0, 2}, {1}, {3}}, {{0}, {1}, {2}, {3}}});
  CHECK(message(crossing, 4).find("level 2") != std::string::npos);
  const PartitionTree unfinished({{{0, 1, 2}}, {{0, 1}, {2}}});
  CHECK(message(unfinished, 3).find("level 1") != std::string::npos);
  const PartitionTree missing({{{0, 1, 2}}, {{0}, {1}}});
  CHECK(message(missing, 3).find("level 1") != std::string::npos);
}

TEST_CASE("tree json round trip") {
  const PartitionTree t({{{0, 1, 2, 3}}, {{0, 2}, {1, 3}}, {{0}, {1}, {2}, {3}}});
  const auto j = t.to_json();
  CHECK(j.dump() == R"({"levels":[[[0,1,2,3]],[[0,2],[1,3]],[[0],[1],[2],[3]]]})");
  const auto back = PartitionTree::from_json(j);
  CHECK(back.levels() == t.levels());
  CHECK_THROWS_AS(PartitionTree::from_json(nlohmann::json{{"levels", 3}}), ValidationError);
  CHECK_THROWS_AS(PartitionTree::from_json(nlohmann::json::parse(R"({"levels":[[[0,-1]]]})")), ValidationError);
}

TEST_CASE("singleton and two-point sets") {
  const auto g1 = ProcessSpec::iid(DistributionModel::gaussian(), 1);
  const MetricSpace single(IndexSet(std::vector<std::vector<double>>{{0.7}}), g1);
  for (auto mode : {GammaMode::exact, GammaMode::greedy}) {
    const auto r = compute_gamma(single, Functional::gamma_x, mode);
    CHECK(r.value == 0.0);
    CHECK(r.certificate.depth() == 1);
  }
  const MetricSpace pair(IndexSet(std::vector<std::vector<double>>{{0.0}, {1.0}}), g1);
  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  for (auto mode : {GammaMode::exact, GammaMode::greedy}) {
    CHECK(compute_gamma(pair, Functional::gamma2, mode).value == doctest::Approx(1.0).epsilon(1e-12));
    const auto r = compute_gamma(pair, Functional::gamma_x, mode);
    CHECK(r.value == doctest::Approx(half_normal).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(0.79788).epsilon(1e-5));
    CHECK(r.value == doctest::Approx(pair.distance(0, 1, 1.0)).epsilon(1e-15));
  }
  const PartitionTree split({{{0, 1}}, {{0}, {1}}});
  CHECK(evaluate_certificate(split, IndexSet(std::vector<std::vector<double>>{{0.0}, {1.0}}), g1, Functional::gamma_x) ==
        doctest::Approx(half_normal).epsilon(1e-12));
}

TEST_CASE("uniform space oracle") {
  auto rad = [](double p) { return 2.0 * std::pow(2.0, -1.0 / p); };
  CHECK(uniform_space_gamma(2, rad) == doctest::Approx(1.0).epsilon(1e-15));
  const double g257 = 1.0 + std::sqrt(2.0) + std::pow(8.0, 0.25) + std::pow(128.0, 0.125);
  CHECK(uniform_space_gamma(257, rad) == doctest::Approx(g257).epsilon(1e-15));
  CHECK(uniform_space_gamma(257, rad) == doctest::Approx(5.93001).epsilon(1e-6));
  CHECK(uniform_space_gamma(256, rad) == doctest::Approx(1.0 + std::sqrt(2.0) + std::pow(8.0, 0.25)).epsilon(1e-15));
  CHECK(uniform_space_gamma(65537, rad) == doctest::Approx(g257 + 2.0 * std::pow(2.0, -1.0 / 16.0)).epsilon(1e-15));
  CHECK(uniform_space_gamma(65537, rad) == doctest::Approx(7.84522).epsilon(1e-6));
  CHECK_THROWS_AS(uniform_space_gamma(1, rad), DomainError);
}

TEST_CASE("rademacher basis of 257 points") {
  const MetricSpace space(basis(257), ProcessSpec::iid(DistributionModel::rademacher(), 257));
  CHECK(space.distance(3, 200, 8.0) == doctest::Approx(2.0 * std::pow(2.0, -1.0 / 8.0)).epsilon(1e-14));
  const auto r = compute_gamma(space, Functional::gamma_x, GammaMode::greedy);
  CHECK(r.value == doctest::Approx(5.93001).epsilon(1e-6));
  CHECK(r.certificate.depth() == 5);
  CHECK_NOTHROW(r.certificate.validate(257));
  CHECK(evaluate_certificate(r.certificate, space, Functional::gamma_x) == r.value);
}

TEST_CASE("exact mode matches brute force") {
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 3);
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const MetricSpace space(random_set(6, 3, seed), proc);
    for (auto f : {Functional::gamma_x, Functional::gamma2}) {
      const auto r = compute_gamma(space, f, GammaMode::exact);
      CHECK(r.value == doctest::Approx(brute_force_gamma(space, f)).epsilon(1e-14));
      CHECK(evaluate_certificate(r.certificate, space, f) == doctest::Approx(r.value).epsilon(1e-15));
    }
  }
}

TEST_CASE("greedy is never below exact") {
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 4);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const MetricSpace space(random_set(8, 4, 100 + seed), proc);
    for (auto f : {Functional::gamma_x, Functional::gamma2}) {
      const double exact = compute_gamma(space, f, GammaMode::exact).value;
      const auto greedy = compute_gamma(space, f, GammaMode::greedy);
      CHECK_NOTHROW(greedy.certificate.validate(8));
      CHECK(greedy.value >= exact * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("removing a point never increases exact gamma") {
  const auto proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 3);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto T = random_set(9, 3, 300 + seed);
    const double full = compute_gamma(MetricSpace(T, proc), Functional::gamma_x, GammaMode::exact).value;
    for (std::size_t drop = 0; drop < T.size(); ++drop) {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < T.size(); ++i)
        if (i != drop) keep.push_back(i);
      const double sub = compute_gamma(MetricSpace(T.subset(keep), proc), Functional::gamma_x, GammaMode::exact).value;
      CHECK(sub <= full * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("exact mode caps and metric requirements") {
  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 2);
  CHECK_THROWS_AS(compute_gamma(MetricSpace(random_set(11, 2, 1), g), Functional::gamma_x, GammaMode::exact),
                  ResourceError);
  const auto w = ProcessSpec::iid(DistributionModel::sym_weibull(1.5), 2);
  MetricOptions opts;
  opts.mc_samples = 2000;
  CHECK_THROWS_AS(compute_gamma(MetricSpace(random_set(4, 2, 1), w, opts), Functional::gamma_x, GammaMode::exact),
                  PreconditionError);
  CHECK_NOTHROW(compute_gamma(MetricSpace(random_set(4, 2, 1), w, opts), Functional::gamma_x, GammaMode::greedy));
}

TEST_CASE("level diameters grow with the dyadic order") {
  const auto proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 4);
  const MetricSpace space(random_set(7, 4, 9), proc);
  const std::vector<std::size_t> block{0, 2, 3, 6};
  double prev = 0.0;
  for (unsigned n = 0; n <= 5; ++n) {
    const double d = space.block_diameter(block, level_order(Functional::gamma_x, n));
    CHECK(d >= prev * (1.0 - 1e-12));
    prev = d;
  }
}

TEST_CASE("exact search does not depend on the worker count") {
  const MetricSpace space(random_set(10, 3, 77), ProcessSpec::iid(DistributionModel::gaussian(), 3));
  set_worker_count(1);
  const auto a = compute_gamma(space, Functional::gamma_x, GammaMode::exact);
  set_worker_count(3);
  const auto b = compute_gamma(space, Functional::gamma_x, GammaMode::exact);
  set_worker_count(0);
  CHECK(a.value == b.value);
  CHECK(a.certificate.to_json() == b.certificate.to_json());
}

TEST_CASE("restricted certificates never gain value") {
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 4);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto T = random_set(12 + seed, 4, 500 + seed);
    const auto full = compute_gamma(MetricSpace(T, proc), Functional::gamma_x, GammaMode::greedy);
    for (std::size_t drop = 0; drop < T.size(); drop += 3) {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < T.size(); ++i)
        if (i != drop) keep.push_back(i);
      const auto tree = full.certificate.restrict(keep);
      CHECK_NOTHROW(tree.validate(keep.size()));
      CHECK(evaluate_certificate(tree, T.subset(keep), proc, Functional::gamma_x) <= full.value * (1.0 + 1e-12));
    }
  }
}
