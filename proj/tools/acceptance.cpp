// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. One line per criterion: "[PASS|FAIL] N name: details".
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "chaining/errors.hpp"
#include "chaining/gamma.hpp"
#include "chaining/parallel.hpp"
#include "chaining/runner.hpp"
#include "chaining/stochlab.hpp"
#include "chaining/tailkit.hpp"
#include "chaining/verify.hpp"

using namespace chaining;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  json archive = json::object();

  void check(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back(ok ? note : "VIOLATED " + note);
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

IndexSet basis(std::size_t n) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) pts[i][i] = 1.0;
  return IndexSet(std::move(pts));
}

IndexSet gaussian_points(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(RngStream{seed, 0x61636365ULL});
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& x : p) x = rng.normal();
  return IndexSet(std::move(pts));
}

const RngStream kStream{20260101, 1};

// ------------------------------------------------------------------ 1
Verdict bernoulli() {
  Verdict v;
  const std::size_t m = 257;
  const auto rad2 = ProcessSpec::iid(DistributionModel::rademacher(), 2);
  const std::vector<double> diff{1.0, -1.0};
  const double oracle =
      uniform_space_gamma(m, [&](double p) { return combination_norm(rad2, diff, p).value; });
  const MetricSpace space(basis(m), ProcessSpec::iid(DistributionModel::rademacher(), m));
  const auto r = two_sided_experiment(space, 100000, kStream, GammaMode::greedy);
  const double gamma = r.certificate.value;
  const double closed = 1.0 + std::sqrt(2.0) + std::pow(8.0, 0.25) + std::pow(128.0, 0.125);
  v.check(std::abs(oracle - closed) <= 1e-12, "uniform-space gamma_X " + fmt(oracle, 9) + " = 1 + 2^(1/2) + 8^(1/4) + 128^(1/8)");
  v.check(std::abs(oracle - 5.93001) <= 1e-6, "|gamma_X - 5.93001| = " + fmt(std::abs(oracle - 5.93001), 3) + " <= 1e-6");
  v.check(std::abs(gamma - oracle) <= 1e-6, "greedy certificate " + fmt(gamma, 9) + " matches");
  v.check(std::abs(r.esup.mean - 2.0) <= 0.02, "E sup " + fmt(r.esup.mean) + " = 2 +- 0.02");
  const double ratio = oracle / r.esup.mean;
  v.check(ratio >= 2.9, "gamma/E sup " + fmt(ratio, 5) + " >= 2.9");
  v.archive = r.to_json();
  return v;
}

// ------------------------------------------------------------------ 2
Verdict two_point() {
  Verdict v;
  const MetricSpace space(IndexSet(std::vector<std::vector<double>>{{0.0}, {1.0}}),
                          ProcessSpec::iid(DistributionModel::gaussian(), 1));
  const double g2 = compute_gamma(space, Functional::gamma2, GammaMode::exact).value;
  const double gx = compute_gamma(space, Functional::gamma_x, GammaMode::exact).value;
  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  v.check(std::abs(g2 - 1.0) <= 1e-6, "gamma_2 " + fmt(g2, 12) + " = 1");
  v.check(std::abs(gx - half_normal) <= 1e-6, "gamma_X " + fmt(gx, 12) + " = sqrt(2/pi)");
  v.archive = {{"gamma2", g2}, {"gamma_x", gx}};
  return v;
}

// ------------------------------------------------------------------ 3
Verdict sandwich() {
  Verdict v;
  const double alpha = 1.0;
  const auto k = regularity_constants(alpha);
  const auto grid = log_grid(k.T_alpha, 100.0 * k.T_alpha, 256);
  for (const auto& model :
       {DistributionModel::gaussian(), DistributionModel::sym_exponential(), DistributionModel::sym_weibull(1.5)}) {
    const auto cert = check_alpha_regular(model, alpha);
    v.check(cert.pass, model.name() + " in R_1 on the default grid");
    if (!cert.pass) continue;
    const auto m = log_concave_envelope(model, alpha);
    const auto s = check_sandwich(model.tail(), m, k.L_alpha, grid, 1e-8);
    v.check(s.violations == 0 && s.rows.size() == 256,
            model.name() + " " + std::to_string(s.violations) + " violations / " + std::to_string(s.rows.size()));
    v.archive[model.name()] = {{"violations", s.violations}, {"worst_slack", s.worst_slack}};
  }
  return v;
}

// ------------------------------------------------------------------ 4
Verdict minorant() {
  Verdict v;
  const auto id = convex_minorant(TailFunction::analytic([](double t) { return t; }), 2.0, 0.0, 1e4);
  double worst = 0.0;
  for (double t : log_grid(1e-6, 2e4, 200)) worst = std::max(worst, std::abs(id(t) - t / 2.0) / std::max(1.0, t));
  v.check(worst <= 1e-9, "f(t) = t: max |g - t/2| " + fmt(worst, 3) + " <= 1e-9");
  v.check(id(0.0) == 0.0, "g(c t0) = 0 for t0 = 0");

  const auto k = regularity_constants(1.0);
  const auto n = DistributionModel::sym_exponential().tail();
  const double c = k.kappa_alpha;
  const auto g = convex_minorant(n, c, k.t0, 200.0 * c * c);
  v.check(g(c * k.t0) == 0.0, "exponential tail: g(c t0) = 0");
  std::size_t bad = 0;
  const auto grid = log_grid(c * k.t0, 100.0, 200);
  for (double t : grid)
    if (g(t) > n(t) + 1e-8 || n(t) > g(c * c * t) + 1e-8) ++bad;
  v.check(bad == 0, "g <= f <= g(c^2 .) violations " + std::to_string(bad) + "/200");
  std::size_t nonconvex = 0;
  for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 2]);
    if (g(mid) > 0.5 * (g(grid[i]) + g(grid[i + 2])) + 1e-9) ++nonconvex;
  }
  v.check(nonconvex == 0, "midpoint convexity violations " + std::to_string(nonconvex));
  return v;
}

// ------------------------------------------------------------------ 5
Verdict latala() {
  Verdict v;
  const double e = std::numbers::e;
  const auto r1 = ProcessSpec::iid(DistributionModel::rademacher(), 1);
  const std::vector<double> one{1.0};
  const double single = latala_norm(one, r1, 2);
  v.check(std::abs(single - 1.0 / std::sqrt(e * e - 1.0)) <= 1e-9, "single rademacher r=2 " + fmt(single, 8));
  const double lo_c = (e - 1.0) / (2.0 * e * e);
  Rng rng(RngStream{55, 5});
  std::size_t checked = 0;
  std::size_t bad = 0;
  double lo_obs = INFINITY;
  double hi_obs = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
    std::vector<DistributionModel> models;
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      models.push_back(rng.uniform() < 0.5 ? DistributionModel::rademacher()
                                           : DistributionModel::three_point(1.5 + 3.0 * rng.uniform()));
      a[i] = 4.0 * rng.uniform() - 2.0;
    }
    const ProcessSpec proc(models);
    for (int r : {2, 4, 8}) {
      MetricOptions opts;
      opts.method = MethodChoice::enumeration;
      const double norm = combination_norm(proc, a, r, opts).value;
      const double lat = latala_norm(a, proc, r);
      ++checked;
      if (lo_c * lat > norm * (1.0 + 1e-9) || norm > e * lat * (1.0 + 1e-9)) ++bad;
      lo_obs = std::min(lo_obs, norm / lat);
      hi_obs = std::max(hi_obs, norm / lat);
    }
  }
  v.check(bad == 0, std::to_string(bad) + "/" + std::to_string(checked) + " bracket violations, ||S||/||| in [" +
                        fmt(lo_obs, 4) + ", " + fmt(hi_obs, 4) + "]");
  v.archive = {{"observed_min_ratio", lo_obs}, {"observed_max_ratio", hi_obs}};
  return v;
}

// ------------------------------------------------------------------ 6
Verdict upper_bound() {
  Verdict v;
  const std::vector<DistributionModel> families{DistributionModel::gaussian(), DistributionModel::sym_exponential(),
                                                DistributionModel::rademacher()};
  double worst_upper = 0.0;
  std::size_t bad = 0;
  json runs = json::array();
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& model = families[i % 3];
    const std::size_t count = 4 + (i * 7) % 29;
    const std::size_t dim = 2 + (i * 5) % 15;
    const auto T = gaussian_points(count, dim, 100 + i);
    const MetricSpace space(T, ProcessSpec::iid(model, dim));
    const auto cert = compute_gamma(space, Functional::gamma_x, GammaMode::greedy);
    const auto es = estimate_sup(space.process(), T, 100000, kStream.child(i));
    const double ratio = es.mean / cert.value;
    worst_upper = std::max(worst_upper, ratio);
    if (es.mean > 40.0 * cert.value) ++bad;
    runs.push_back({{"model", model.name()}, {"size", count}, {"dim", dim}, {"certificate", cert.value},
                    {"esup", es.mean}, {"ratio_upper", ratio}});
  }
  v.check(bad == 0, "E sup <= 40 cert on 20 sets, max E sup/cert " + fmt(worst_upper, 4));
  double worst_lower = 0.0;
  std::size_t bad_lower = 0;
  std::size_t exact_runs = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto model = i % 2 == 0 ? DistributionModel::gaussian() : DistributionModel::sym_exponential();
    const std::size_t count = 4 + i % 7;
    const std::size_t dim = 2 + i % 5;
    const auto T = gaussian_points(count, dim, 500 + i);
    const MetricSpace space(T, ProcessSpec::iid(model, dim));
    const auto r = two_sided_experiment(space, 100000, kStream.child(100 + i), GammaMode::exact);
    ++exact_runs;
    worst_lower = std::max(worst_lower, r.ratio_lower);
    if (r.ratio_lower > 40.0) ++bad_lower;
    runs.push_back({{"model", model.name()}, {"size", count}, {"dim", dim}, {"gamma_exact", *r.gamma_exact},
                    {"esup", r.esup.mean}, {"ratio_lower", r.ratio_lower}});
  }
  v.check(bad_lower == 0, "E sup >= gamma/40 on " + std::to_string(exact_runs) + " exact sets, max gamma/E sup " +
                              fmt(worst_lower, 4));
  v.archive = {{"runs", runs}, {"max_ratio_upper", worst_upper}, {"max_ratio_lower", worst_lower}};
  return v;
}

// ------------------------------------------------------------------ 7
Verdict sudakov() {
  Verdict v;
  const auto g = sudakov_experiment(ProcessSpec::iid(DistributionModel::gaussian(), 8), basis(8), 2.0,
                                    std::numbers::sqrt2, 100000, kStream);
  v.check(g.cardinality_ok && g.separation_ok && g.kappa_obs + 3.0 * g.kappa_std_error >= 0.2,
          "gaussian basis 8: kappa " + fmt(g.kappa_obs, 4) + " >= 0.2");
  json runs = json::array({g.to_json()});
  double min_kappa = INFINITY;
  std::size_t bad = 0;
  std::size_t used = 0;
  const std::vector<std::pair<std::size_t, std::size_t>> packs{{1, 8}, {1, 12}, {2, 6}, {2, 12}, {3, 9}, {3, 12}};
  for (double p : {2.0, 4.0}) {
    for (const auto& [m, n] : packs) {
      const auto T = packing_set(m, n);
      if (std::log(static_cast<double>(T.size())) < p) continue;
      const auto proc = ProcessSpec::iid(DistributionModel::sym_exponential(), n);
      const double u = diameter(T, proc, p) > 0 ? [&] {
        const auto d = distance_matrix(T, proc, p);
        double best = INFINITY;
        for (std::size_t i = 0; i < T.size(); ++i)
          for (std::size_t j = i + 1; j < T.size(); ++j) best = std::min(best, d.at(i, j));
        return best;
      }()
                                                : 0.0;
      const auto r = sudakov_experiment(proc, T, p, u, 100000, kStream.child(m * 100 + n));
      ++used;
      min_kappa = std::min(min_kappa, r.kappa_obs);
      if (!(r.separation_ok && r.kappa_obs + 3.0 * r.kappa_std_error >= 0.1)) ++bad;
      runs.push_back(r.to_json());
    }
  }
  v.check(bad == 0, "sym_exponential packing battery (" + std::to_string(used) + " runs with |T| >= e^p): min kappa " +
                        fmt(min_kappa, 4) + " >= 0.1");
  v.archive = {{"runs", runs}};
  return v;
}

// ------------------------------------------------------------------ 8
Verdict packing_chain() {
  Verdict v;
  const std::vector<std::pair<std::size_t, std::size_t>> packs{{1, 8}, {2, 8}, {3, 9}, {2, 12}, {3, 12}};
  std::size_t chain_bad = 0;
  std::size_t bound_bad = 0;
  std::size_t rows = 0;
  json runs = json::array();
  std::uint64_t k = 0;
  for (const auto& model : {DistributionModel::gaussian(), DistributionModel::sym_exponential()}) {
    for (const auto& [m, n] : packs) {
      const auto r = packing_chain_experiment(model, m, n, 100000, kStream.child(++k));
      if (!r.chain_pass) ++chain_bad;
      bound_bad += r.bound_violations;
      rows += r.order_stats.size() * 2;
      runs.push_back(r.to_json());
    }
  }
  v.check(chain_bad == 0, "E sup <= 2 E sum X_k* on 10 packing sets, failures " + std::to_string(chain_bad));
  v.check(bound_bad == 0, "order-statistic bound violations " + std::to_string(bound_bad) + "/" + std::to_string(rows));
  v.archive = {{"runs", runs}};
  return v;
}

// ------------------------------------------------------------------ 9
Verdict weak_strong() {
  Verdict v;
  const auto proc = ProcessSpec::iid(DistributionModel::gaussian(), 16);
  json runs = json::array();
  for (double p : {2.0, 4.0, 8.0}) {
    const auto w = weak_strong_experiment(proc, basis(16), p, 1000000, kStream);
    v.check(w.c_obs <= kWeakStrongConstant, "p=" + fmt(p) + " C_obs " + fmt(w.c_obs, 4) + " <= 4");
    runs.push_back(w.to_json());
  }
  v.archive = {{"runs", runs}};
  return v;
}

// ------------------------------------------------------------------ 10
Verdict harnesses() {
  Verdict v;
  const auto pz = paley_zygmund_check(DiscreteLaw{{0.0, 0.5}, {2.0, 0.5}}, 0.5);
  v.check(pz.exact && pz.lhs == 0.5 && pz.rhs == 0.125 && pz.pass, "Paley-Zygmund uniform{0,2}: lhs 1/2 >= rhs 1/8");

  Rng rng(RngStream{77, 7});
  std::size_t bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(6), b(6);
    for (std::size_t i = 0; i < 6; ++i) {
      b[i] = 6.0 * rng.uniform() - 3.0;
      a[i] = b[i] * (2.0 * rng.uniform() - 1.0);
    }
    const double p = trial % 2 == 0 ? 2.0 : 4.0;
    if (!contraction_check(a, b, p).pass) ++bad;
  }
  v.check(bad == 0, "contraction violations " + std::to_string(bad) + "/100");

  std::size_t sym_bad = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto T = gaussian_points(8, 5, 900 + s);
    const auto r = symmetrization_check(ProcessSpec::iid(DistributionModel::gaussian(), 5), T, 2.0, 100000,
                                        kStream.child(s));
    if (!r.pass) ++sym_bad;
  }
  v.check(sym_bad == 0, "symmetrization factor-2 bracket on 3 gaussian 8-point sets, failures " +
                            std::to_string(sym_bad));
  return v;
}

// ------------------------------------------------------------------ 11
Verdict regularity() {
  Verdict v;
  const auto g = DistributionModel::gaussian();
  v.check(check_alpha_regular(g, 1.0).pass, "gaussian in R_1");
  v.check(check_speed_beta(g, 8.0).pass, "gaussian in S_8");
  const auto s4 = check_speed_beta(g, 4.0);
  // speed witness: (q, p) = (p, beta p)
  v.check(!s4.pass && s4.q == 2.0 && s4.p == 8.0 && std::abs(s4.ratio - std::pow(105.0, 0.125)) <= 1e-6,
          "gaussian fails S_4 at p=" + fmt(s4.q) + " ratio " + fmt(s4.ratio, 8) + " (105^(1/8))");
  for (double beta : {2.0, 4.0, 8.0})
    v.check(!check_speed_beta(DistributionModel::rademacher(), beta).pass, "rademacher fails S_" + fmt(beta));
  const auto t = check_alpha_regular(DistributionModel::three_point(100.0), 5.0);
  v.check(!t.pass && t.q == 2.0 && t.p == 4.0 && std::abs(t.ratio - 10.0) <= 1e-6,
          "three_point(100) fails R_5 with witness (2,4) ratio 10: observed pass=" + std::string(t.pass ? "1" : "0") +
              " witness (" + fmt(t.q) + "," + fmt(t.p) + ") ratio " + fmt(t.ratio, 8));
  v.archive = {{"three_point_witness", to_json(t)}, {"gaussian_s4", to_json(s4)}};
  return v;
}

// ------------------------------------------------------------------ 12
Verdict hull() {
  Verdict v;
  double worst_residual = 0.0;
  double worst_cap = 0.0;
  std::size_t bad = 0;
  std::size_t points = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const std::size_t dim = 3 + s % 4;
    const MetricSpace space(gaussian_points(8 + s % 3, dim, 700 + s), ProcessSpec::iid(DistributionModel::gaussian(), dim));
    const auto tree = compute_gamma(space, Functional::gamma_x, GammaMode::exact).certificate;
    const auto h = convex_hull_decomposition(space, tree);
    worst_residual = std::max(worst_residual, h.max_residual);
    worst_cap = std::max(worst_cap, h.max_norm_cap);
    points += h.chain.size();
    if (!(h.max_residual <= 1e-9 && h.caps_ok && std::isfinite(h.R) && h.R >= 2.0 * h.max_step && h.bookkeeping_ok))
      ++bad;
  }
  v.check(bad == 0, "6 exact-mode gaussian sets, " + std::to_string(points) + " chain points: max residual " +
                        fmt(worst_residual, 3) + " <= 1e-9, max cap " + fmt(worst_cap, 6) + " <= 1 + 1e-9");
  return v;
}

// ------------------------------------------------------------------ 13
Verdict determinism() {
  Verdict v;
  const json points = {{"generator", "sphere_random"}, {"n", 4}, {"count", 7}, {"seed", 13}};
  const std::vector<std::pair<std::string, json>> configs{
      {"gamma", {{"process", {{"family", "sym_exponential"}}}, {"index_set", points}, {"params", {{"mode", "exact"}}}}},
      {"supremum", {{"process", {{"family", "gaussian"}}}, {"index_set", points}, {"params", {{"seed", 1}}}}},
      {"sudakov",
       {{"process", {{"family", "sym_exponential"}}},
        {"index_set", {{"generator", "packing"}, {"m", 2}, {"n", 8}}},
        {"params", {{"seed", 2}, {"p", json::array({2, 4})}}}}},
      {"two-sided", {{"process", {{"family", "rademacher"}}}, {"index_set", points}, {"params", {{"seed", 3}}}}},
      {"weak-strong",
       {{"process", {{"family", "sym_weibull"}, {"params", {{"shape", 1.5}}}}},
        {"index_set", points},
        {"params", {{"seed", 4}, {"p", 3}, {"samples", 20000}}}}},
      {"compare",
       {{"process", {{"family", "gaussian"}}},
        {"index_set", points},
        {"params", {{"seed", 5}, {"y_process", {{"family", "rademacher"}}}}}}},
      {"tails", {{"process", {{"family", "gaussian"}}}, {"index_set", points}, {"params", {{"alpha", 1}}}}},
      {"hull", {{"process", {{"family", "three_point"}, {"params", {{"atom", 2}}}}}, {"index_set", points}}}};
  std::size_t identical = 0;
  for (const auto& [name, cfg] : configs) {
    const auto resolved = resolve_config(name, cfg);
    set_worker_count(1);
    const auto a = run_experiment(resolved);
    set_worker_count(8);
    const auto b = run_experiment(resolved);
    set_worker_count(0);
    const bool same = report_text(a) == report_text(b) && a.tables == b.tables;
    if (same) ++identical;
    else v.check(false, name + " differs between 1 and 8 workers (config " + config_hash(resolved) + ")");
    v.archive[name] = config_hash(resolved);
  }
  v.check(identical == configs.size(),
          std::to_string(identical) + "/" + std::to_string(configs.size()) + " reports byte-identical at 1 and 8 workers");
  return v;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "bernoulli counterexample", 10.0, bernoulli},
      {2, "two-point identities", 1.0, two_point},
      {3, "tail envelope sandwich", 5.0, sandwich},
      {4, "convex minorant", 2.0, minorant},
      {5, "latala bracket", 1.0, latala},
      {6, "chaining upper bound battery", 300.0, upper_bound},
      {7, "sudakov harness", 120.0, sudakov},
      {8, "packing-set chain", 60.0, packing_chain},
      {9, "weak and strong moments", 120.0, weak_strong},
      {10, "contraction, symmetrization, paley-zygmund", 60.0, harnesses},
      {11, "regularity classifier", 1.0, regularity},
      {12, "convex hull decomposition", 60.0, hull},
      {13, "determinism across worker counts", 300.0, determinism},
  };
  return list;
}

bool run_one(const Criterion& c, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.check(secs < c.budget_seconds, "runtime " + fmt(secs, 3) + " s < " + fmt(c.budget_seconds) + " s");
  std::string line = std::string(v.pass ? "[PASS] " : "[FAIL] ") + std::to_string(c.id) + " " + c.name + ": ";
  for (std::size_t i = 0; i < v.notes.size(); ++i) line += (i ? "; " : "") + v.notes[i];
  std::cout << line << std::endl;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(std::filesystem::path(out) / ("criterion_" + std::to_string(c.id) + ".json"));
    f << json{{"criterion", c.id}, {"name", c.name}, {"pass", v.pass}, {"notes", v.notes}, {"observed", v.archive}}
             .dump(2)
      << "\n";
  }
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria, one pass/fail line each."};
  int only = 0;
  std::string out;
  app.add_option("--criterion", only, "run a single criterion (1-13)")->check(CLI::Range(1, 13));
  app.add_option("--out", out, "directory for per-criterion observation archives");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    all = run_one(c, out) && all;
  }
  return all ? 0 : 2;
}
