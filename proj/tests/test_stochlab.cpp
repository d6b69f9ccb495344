#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chaining/errors.hpp"
#include "chaining/parallel.hpp"
#include "chaining/stochlab.hpp"
#include "oracles.hpp"

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

// E(max - min) over the coordinates of a uniform sign vector, by enumeration.
double rademacher_basis_range(std::size_t n) {
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    const bool any_plus = mask != 0;
    const bool any_minus = mask != (std::size_t{1} << n) - 1;
    total += (any_plus ? 1.0 : -1.0) - (any_minus ? -1.0 : 1.0);
  }
  return total / static_cast<double>(std::size_t{1} << n);
}

const RngStream kStream{20241019, 1};

}  // namespace

TEST_CASE("supremum examples") {
  const auto g1 = ProcessSpec::iid(DistributionModel::gaussian(), 1);
  const auto single = estimate_sup(g1, IndexSet(std::vector<std::vector<double>>{{0.4}}), 1000, kStream);
  CHECK(single.mean == 0.0);
  CHECK(single.std_error == 0.0);

  const auto pair = estimate_sup(g1, IndexSet(std::vector<std::vector<double>>{{0.0}, {1.0}}), 100000, kStream);
  CHECK(std::abs(pair.mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * pair.std_error);
  CHECK(pair.samples == 100000);
  CHECK(pair.seed == kStream.master_seed);

  CHECK(rademacher_basis_range(8) == 1.984375);
  const auto r8 = estimate_sup(ProcessSpec::iid(DistributionModel::rademacher(), 8), basis(8), 100000, kStream);
  CHECK(std::abs(r8.mean - 1.984375) <= 3.0 * r8.std_error);

  CHECK_THROWS_AS(estimate_sup(g1, IndexSet(std::vector<std::vector<double>>{}), 1000, kStream), DomainError);
  CHECK_THROWS_AS(estimate_sup(g1, IndexSet(std::vector<std::vector<double>>{{1.0}}), 99, kStream), DomainError);
}

TEST_CASE("supremum targets") {
  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 1);
  const IndexSet T(std::vector<std::vector<double>>{{-1.0}, {1.0}});
  // max(g, -g) = |g|; sup |X_t| = |g|; range = 2|g|
  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  for (auto [target, expect] : {std::pair{SupTarget::max_only, half_normal}, std::pair{SupTarget::sup_abs, half_normal},
                                std::pair{SupTarget::sup_increments, 2.0 * half_normal}}) {
    const auto e = estimate_sup(g, T, 100000, kStream, target);
    CHECK(std::abs(e.mean - expect) <= 3.0 * e.std_error);
    CHECK(e.target == target);
  }
  CHECK(parse_target(target_name(SupTarget::sup_abs)) == SupTarget::sup_abs);
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 6);
  const auto T = random_set(9, 6, 4);
  set_worker_count(1);
  const auto a = estimate_sup(proc, T, 30000, kStream);
  const auto sa = sup_samples(proc, T, 10000, kStream, SupTarget::max_only);
  set_worker_count(5);
  const auto b = estimate_sup(proc, T, 30000, kStream);
  const auto sb = sup_samples(proc, T, 10000, kStream, SupTarget::max_only);
  set_worker_count(0);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(sa == sb);
  const auto c = estimate_sup(proc, T, 30000, RngStream{kStream.master_seed, 2});
  CHECK(c.mean != a.mean);
}

TEST_CASE("common random numbers") {
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 5);
  const auto T = random_set(6, 5, 8);
  const auto est = estimate_sup_common(proc, {T, T.scaled(0.5)}, 20000, kStream, SupTarget::sup_increments);
  REQUIRE(est.size() == 3);
  CHECK(est[1].mean == doctest::Approx(0.5 * est[0].mean).epsilon(1e-12));
  CHECK(est[2].mean == doctest::Approx(0.5 * est[0].mean).epsilon(1e-12));
  const auto alone = estimate_sup(proc, T, 20000, kStream);
  CHECK(alone.mean == est[0].mean);
}

TEST_CASE("order statistics") {
  const auto rows = order_stat_means(DistributionModel::rademacher(), 7, {1, 4, 7}, 5000, kStream);
  for (const auto& r : rows) {
    CHECK(r.value.mean == 1.0);
    CHECK(r.prefix_sum.mean == static_cast<double>(r.k));
  }

  const double oracle_max = oracle::simpson(
      [](double t) {
        const double c = 2.0 * oracle::normal_cdf(t) - 1.0;
        return 1.0 - c * c;
      },
      0.0, 40.0);
  const auto g = order_stat_means(DistributionModel::gaussian(), 2, {1}, 100000, kStream);
  CHECK(std::abs(g[0].value.mean - oracle_max) <= 3.0 * g[0].value.std_error);

  const auto b = order_stat_means(DistributionModel::gaussian(), 8, {2}, 100000, kStream, {2.0});
  REQUIRE(b[0].bounds.size() == 1);
  CHECK(b[0].bounds[0].second == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(b[0].value.mean <= b[0].bounds[0].second);

  CHECK_THROWS_AS(order_stat_means(DistributionModel::gaussian(), 3, {4}, 1000, kStream), DomainError);
  CHECK_THROWS_AS(order_stat_means(DistributionModel::gaussian(), 3, {0}, 1000, kStream), DomainError);
}

TEST_CASE("paley-zygmund") {
  auto one = paley_zygmund_check(DiscreteLaw{{1.0, 1.0}}, 0.5);
  CHECK(one.lhs == 1.0);
  CHECK(one.rhs == 0.25);
  CHECK(one.pass);

  auto two = paley_zygmund_check(DiscreteLaw{{0.0, 0.5}, {2.0, 0.5}}, 0.5);
  CHECK(two.lhs == 0.5);
  CHECK(two.rhs == 0.125);
  CHECK(two.pass);
  CHECK(two.exact);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::vector<double> s(200000);
  for (auto& v : s) {
    const double g = normal(gen);
    v = g * g;
  }
  auto sq = paley_zygmund_check(s, 0.5);
  const double lhs = 2.0 * (1.0 - oracle::normal_cdf(1.0 / std::numbers::sqrt2));
  CHECK(lhs == doctest::Approx(0.4795).epsilon(1e-4));
  CHECK(std::abs(sq.lhs - lhs) <= 3.0 * sq.lhs_std_error + 3.0 * std::sqrt(lhs * (1 - lhs) / 200000.0));
  CHECK(sq.rhs == doctest::Approx(1.0 / 12.0).epsilon(0.03));
  CHECK(sq.pass);

  CHECK_THROWS_AS(paley_zygmund_check(DiscreteLaw{{1.0, 1.0}}, 1.0), DomainError);
  CHECK_THROWS_AS(paley_zygmund_check(DiscreteLaw{{1.0, 1.0}}, 0.0), DomainError);
  CHECK_THROWS_AS(paley_zygmund_check(DiscreteLaw{{-1.0, 1.0}}, 0.5), DomainError);
}

TEST_CASE("contraction") {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{1.0, 1.0};
  auto r = contraction_check(a, b, 2.0);
  CHECK(r.norm_a.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.norm_b.value == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));
  CHECK(r.pass);

  auto same = contraction_check(b, b, 3.0);
  CHECK(same.norm_a.value == same.norm_b.value);
  CHECK(same.pass);

  std::mt19937 gen(12);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> bb(6), aa(6);
    for (std::size_t i = 0; i < 6; ++i) {
      bb[i] = 3.0 * unit(gen);
      aa[i] = bb[i] * unit(gen);
    }
    for (double p : {2.0, 4.0}) {
      const auto c = contraction_check(aa, bb, p);
      const double lhs = std::pow(oracle::rademacher_abs_moment(aa, p), 1.0 / p);
      const double rhs = std::pow(oracle::rademacher_abs_moment(bb, p), 1.0 / p);
      CHECK(c.norm_a.value == doctest::Approx(lhs).epsilon(1e-12));
      CHECK(c.norm_b.value == doctest::Approx(rhs).epsilon(1e-12));
      if (!c.pass) ++violations;
    }
  }
  CHECK(violations == 0);

  const auto T = random_set(5, 6, 21);
  const std::vector<double> big{1.0, -2.0, 0.5, 1.5, 1.0, 0.7};
  const std::vector<double> small{0.5, 1.0, -0.5, 0.2, 0.0, 0.7};
  const auto with_sup = contraction_check(small, big, 2.0, &T, 50000);
  CHECK(with_sup.has_sup);
  CHECK(with_sup.sup_pass);
  CHECK(with_sup.sup_a.mean < with_sup.sup_b.mean);

  CHECK_THROWS_AS(contraction_check(big, small, 2.0), DomainError);
}

TEST_CASE("symmetrization") {
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 5);
  const auto T = random_set(8, 5, 31);
  const auto r = symmetrization_check(proc, T, 2.0, 100000, kStream);
  CHECK(r.pairs.size() == 28);
  CHECK(r.pass);
  for (const auto& pr : r.pairs) {
    CHECK(pr.ratio >= 0.5 - 3.0 * pr.ratio_sigma);
    CHECK(pr.ratio <= 2.0 + 3.0 * pr.ratio_sigma);
    // symmetric coordinates: the randomized process has the same law
    CHECK(std::abs(pr.ratio - 1.0) <= 5.0 * pr.ratio_sigma);
  }
  CHECK(std::abs(r.identity_gap.mean) <= 3.0 * r.identity_gap.std_error);

  const auto e = symmetrization_check(ProcessSpec::iid(DistributionModel::sym_exponential(), 5), T, 4.0, 50000,
                                      kStream);
  CHECK(e.pass);
}
