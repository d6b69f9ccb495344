#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chaining/errors.hpp"
#include "chaining/verify.hpp"
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

// E max of n standard gaussians: integral of 1 - Phi^n over (0, inf) minus
// integral of Phi^n over (-inf, 0).
double gaussian_max_mean(int n) {
  const double pos = oracle::simpson([n](double t) { return 1.0 - std::pow(oracle::normal_cdf(t), n); }, 0.0, 40.0);
  const double neg = oracle::simpson([n](double t) { return std::pow(oracle::normal_cdf(-t), n); }, 0.0, 40.0);
  return pos - neg;
}

const RngStream kStream{777, 3};
const double kHalfNormal = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

TEST_CASE("packing sets") {
  const auto one = packing_set(1, 5);
  CHECK(one.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(one.point(i) == basis(5).point(i));

  const auto two = packing_set(2, 3);
  REQUIRE(two.size() == 3);
  CHECK(two.point(0) == std::vector<double>{1, 1, 0});
  CHECK(two.point(1) == std::vector<double>{1, 0, 1});
  CHECK(two.point(2) == std::vector<double>{0, 1, 1});

  const auto t39 = packing_set(3, 9);
  CHECK(t39.size() == 84);
  for (std::size_t i = 0; i < t39.size(); ++i) {
    double s = 0.0;
    for (double x : t39.point(i)) s += x;
    CHECK(s == 3.0);
  }
  const auto c = packing_count(3, 9);
  CHECK(c.cardinality == 84.0);
  CHECK(c.lower_bound == doctest::Approx(27.0).epsilon(1e-15));
  CHECK(c.holds);

  CHECK_THROWS_AS(packing_set(4, 3), DomainError);
  CHECK_THROWS_AS(packing_set(0, 3), DomainError);
}

TEST_CASE("interleaving") {
  const IndexSet T(std::vector<std::vector<double>>{{1.0, 2.0}, {3.0, 4.0}});
  const auto tt = interleave(T);
  REQUIRE(tt.size() == 4);
  CHECK(tt.dimension() == 4);
  CHECK(tt.point(1) == std::vector<double>{1.0, 3.0, 2.0, 4.0});
  CHECK(tt.point(2) == std::vector<double>{3.0, 1.0, 4.0, 2.0});

  CHECK(interleave(random_set(3, 2, 1)).size() == 9);

  const auto base = random_set(4, 3, 9);
  const auto g3 = ProcessSpec::iid(DistributionModel::gaussian(), 3);
  const auto g6 = ProcessSpec::iid(DistributionModel::gaussian(), 6);
  const auto tb = interleave(base);
  for (double p : {2.0, 4.0}) {
    const auto d = distance_matrix(base, g3, p);
    const auto dt = distance_matrix(tb, g6, p);
    double min_base = INFINITY;
    for (std::size_t i = 0; i < base.size(); ++i)
      for (std::size_t j = i + 1; j < base.size(); ++j) min_base = std::min(min_base, d.at(i, j));
    // gaussian d_p is a multiple of the euclidean distance
    const double gp = std::pow(oracle::gaussian_abs_moment(p), 1.0 / p);
    for (std::size_t i = 0; i < tb.size(); ++i) {
      for (std::size_t j = i + 1; j < tb.size(); ++j) {
        double e2 = 0.0;
        for (std::size_t k = 0; k < 6; ++k) e2 += std::pow(tb.point(i)[k] - tb.point(j)[k], 2);
        CHECK(dt.at(i, j) == doctest::Approx(gp * std::sqrt(e2)).epsilon(1e-9));
        CHECK(dt.at(i, j) >= min_base * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("sudakov harness") {
  const auto g8 = ProcessSpec::iid(DistributionModel::gaussian(), 8);
  const auto r = sudakov_experiment(g8, basis(8), 2.0, std::numbers::sqrt2, 100000, kStream);
  CHECK(r.cardinality_ok);
  CHECK(r.separation_ok);
  CHECK(r.min_observed_separation == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));
  const double oracle_kappa = 2.0 * gaussian_max_mean(8) / std::numbers::sqrt2;
  CHECK(std::abs(r.kappa_obs - oracle_kappa) <= 3.0 * r.kappa_std_error);
  CHECK(r.kappa_obs >= 0.2);
  CHECK(r.kappa_obs == r.esup.mean / r.u);

  const auto g1 = ProcessSpec::iid(DistributionModel::gaussian(), 1);
  const IndexSet pair(std::vector<std::vector<double>>{{0.0}, {1.0}});
  const auto s = sudakov_experiment(g1, pair, 2.0, 1.0, 100000, kStream);
  CHECK(std::abs(s.kappa_obs - kHalfNormal) <= 3.0 * s.kappa_std_error);
  CHECK_FALSE(s.cardinality_ok);  // 2 < e^2
  CHECK(s.separation_ok);

  const auto far = sudakov_experiment(g1, pair, 2.0, 1.5, 1000, kStream);
  CHECK_FALSE(far.separation_ok);
  REQUIRE(far.offending.size() == 1);
  CHECK(far.offending[0].s == 0);
  CHECK(far.offending[0].t == 1);

  CHECK_THROWS_AS(sudakov_experiment(g1, IndexSet(std::vector<std::vector<double>>{{1.0}}), 2.0, 1.0, 1000, kStream),
                  DomainError);
}

TEST_CASE("two-sided ratios") {
  const auto rad = ProcessSpec::iid(DistributionModel::rademacher(), 257);
  const MetricSpace space(basis(257), rad);
  const auto r = two_sided_experiment(space, 100000, kStream, GammaMode::greedy);
  CHECK_FALSE(r.gamma_exact.has_value());
  CHECK(r.certificate.value == doctest::Approx(5.93001).epsilon(1e-6));
  CHECK(std::abs(r.esup.mean - 2.0) <= 0.02);
  CHECK(r.ratio_lower >= 2.9);
  CHECK(r.ratio_lower == doctest::Approx(2.965).epsilon(0.01));
  CHECK(r.pass);

  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 3);
  const MetricSpace single(IndexSet(std::vector<std::vector<double>>{{1.0, 2.0, 3.0}}), g);
  const auto d = two_sided_experiment(single, 1000, kStream, GammaMode::exact);
  CHECK(d.degenerate);
  CHECK(d.pass);
  CHECK(d.esup.mean == 0.0);

  const auto g4 = ProcessSpec::iid(DistributionModel::gaussian(), 4);
  const MetricSpace eight(random_set(8, 4, 17), g4);
  const auto e = two_sided_experiment(eight, 50000, kStream, GammaMode::exact);
  REQUIRE(e.gamma_exact.has_value());
  CHECK(*e.gamma_exact <= e.certificate.value * (1.0 + 1e-12));
  CHECK(e.ratio_upper <= 40.0);
  CHECK(e.ratio_lower <= 40.0);
  CHECK(e.pass);

  const MetricSpace big(random_set(11, 3, 2), ProcessSpec::iid(DistributionModel::gaussian(), 3));
  CHECK_THROWS_AS(two_sided_experiment(big, 1000, kStream, GammaMode::exact), ResourceError);
}

TEST_CASE("weak and strong moments") {
  const auto g1 = ProcessSpec::iid(DistributionModel::gaussian(), 2);
  const auto one = weak_strong_experiment(g1, IndexSet(std::vector<std::vector<double>>{{0.6, 0.8}}), 3.0, 100000,
                                          kStream);
  CHECK(one.max_norm == doctest::Approx(std::cbrt(oracle::gaussian_abs_moment(3.0))).epsilon(1e-9));
  CHECK(one.strong == doctest::Approx(one.max_norm).epsilon(0.02));
  CHECK(one.c_obs <= 1.0);

  const auto r8 = weak_strong_experiment(ProcessSpec::iid(DistributionModel::rademacher(), 8), basis(8), 8.0, 1000,
                                         kStream);
  CHECK(r8.strong == 1.0);
  CHECK(r8.weak_sup.mean == 1.0);
  CHECK(r8.max_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r8.c_obs == doctest::Approx(0.5).epsilon(1e-14));

  const auto g16 = ProcessSpec::iid(DistributionModel::gaussian(), 16);
  for (double p : {2.0, 4.0, 8.0}) {
    const auto w = weak_strong_experiment(g16, basis(16), p, 100000, kStream);
    CHECK(w.c_obs <= 4.0);
    CHECK(w.max_norm == doctest::Approx(std::pow(oracle::gaussian_abs_moment(p), 1.0 / p)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(weak_strong_experiment(g16, basis(16), 0.5, 1000, kStream), DomainError);
}

TEST_CASE("comparison") {
  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 4);
  const auto T = random_set(6, 4, 23);
  const auto same = comparison_experiment(g, g, T, {1.5, 2.0, 4.0}, 20000, kStream);
  CHECK(same.ratio == 1.0);
  CHECK(same.max_domination_ratio == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(same.tail.size() == kTailQuantiles.size());
  for (const auto& t : same.tail) CHECK(t.prob_y >= 1.0 - t.level - 1e-12);
  REQUIRE(same.frontier.size() == kFrontierArgGrid.size());
  CHECK(same.frontier[0].c_prob == 1.0);

  const auto half = comparison_experiment(g, g, T, {2.0}, 20000, kStream, 0.5);
  CHECK(half.ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.max_domination_ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.frontier[2].c_prob <= 1.0);  // c_arg = 1.5 < 2

  const auto rad = ProcessSpec::iid(DistributionModel::rademacher(), 4);
  const auto gr = comparison_experiment(g, rad, T, {2.0, 3.0, 4.0}, 50000, kStream);
  CHECK(gr.max_domination_ratio <= 1.0 + 1e-12);
  // E sup over signs <= sqrt(pi/2) E sup over gaussians
  CHECK(gr.ratio <= std::sqrt(std::numbers::pi / 2.0) + 3.0 * gr.ratio_std_error);

  // the reverse direction breaks domination at p = 4
  CHECK_THROWS_AS(comparison_experiment(rad, g, T, {4.0}, 1000, kStream), PreconditionError);
}

TEST_CASE("convex hull decomposition") {
  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 2);
  const IndexSet two(std::vector<std::vector<double>>{{0.3, -1.0}, {2.0, 0.5}});
  const MetricSpace space(two, g);
  const auto tree = compute_gamma(space, Functional::gamma_x, GammaMode::exact).certificate;
  const auto h = convex_hull_decomposition(space, tree);
  REQUIRE(h.chain.size() == 1);
  CHECK(h.chain[0].from == 0);
  CHECK(h.chain[0].to == 1);
  const double d4 = std::pow(3.0, 0.25) * std::hypot(1.7, 1.5);
  CHECK(h.chain[0].step == doctest::Approx(d4).epsilon(1e-12));
  CHECK(h.R == doctest::Approx(2.0 * d4).epsilon(1e-12));
  CHECK(h.max_residual <= 1e-12);
  CHECK(h.pass);

  const MetricSpace single(IndexSet(std::vector<std::vector<double>>{{1.0, 1.0}}), g);
  const auto hs = convex_hull_decomposition(single, PartitionTree::trivial(1));
  CHECK(hs.chain.empty());
  CHECK(hs.R == 0.0);
  CHECK(hs.pass);

  for (unsigned seed : {3u, 5u, 8u}) {
    const auto g5 = ProcessSpec::iid(DistributionModel::gaussian(), 5);
    const MetricSpace s8(random_set(8, 5, seed), g5);
    const auto t8 = compute_gamma(s8, Functional::gamma_x, GammaMode::exact).certificate;
    const auto h8 = convex_hull_decomposition(s8, t8);
    CHECK(h8.residuals.size() == 28);
    CHECK(h8.max_residual <= 1e-9);
    CHECK(h8.bookkeeping_ok);
    for (const auto& c : h8.chain) {
      // gaussian: ||<s, g>||_q = ||g||_q |s|_2 and |s|_2 = 1 / ||g||_{2^(n+1)}
      const double q = std::log(static_cast<double>(c.k) + 2.0);
      const double p = std::ldexp(1.0, static_cast<int>(c.level) + 1);
      const double expect = std::pow(oracle::gaussian_abs_moment(q), 1.0 / q) /
                            std::pow(oracle::gaussian_abs_moment(p), 1.0 / p);
      CHECK(c.norm_cap == doctest::Approx(expect).epsilon(1e-8));
      CHECK(c.norm_cap <= 1.0 + 1e-9);
    }
    CHECK(h8.pass);
  }
}

TEST_CASE("packing-set chain") {
  const auto r = packing_chain_experiment(DistributionModel::gaussian(), 2, 6, 50000, kStream);
  CHECK(r.chain_pass);
  CHECK(r.bound_violations == 0);
  CHECK(r.order_stats.size() == 6);
  CHECK(r.pass);

  // rademacher: every increment sup equals 2m and the top-m sum is m
  const auto b = packing_chain_experiment(DistributionModel::rademacher(), 3, 7, 2000, kStream);
  CHECK(b.top_sum.mean == 3.0);
  CHECK(b.esup.mean <= 6.0);
  CHECK(b.pass);
}

TEST_CASE("interleaving chain") {
  const auto g = ProcessSpec::iid(DistributionModel::gaussian(), 3);
  const auto T = random_set(3, 3, 41);
  const auto base = MetricSpace(T, g);
  double u = INFINITY;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) u = std::min(u, base.distance(i, j, 2.0));
  const auto r = interleave_experiment(g, T, 2.0, u, 50000, kStream);
  CHECK(r.cardinality == 9);
  CHECK(r.mode == GammaMode::exact);
  CHECK(r.k == 1);
  CHECK(r.block.size() >= 2);
  CHECK(r.min_separation >= r.min_base_separation * (1.0 - 1e-12));
  CHECK(r.chain_pass);
  CHECK(r.esup_pass);
  CHECK(r.pass);
}
