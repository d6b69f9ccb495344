#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chaining/errors.hpp"
#include "chaining/parallel.hpp"
#include "chaining/runner.hpp"

using namespace chaining;
using nlohmann::json;

namespace {

json base(const char* experiment) {
  return {{"experiment", experiment},
          {"process", {{"family", "gaussian"}}},
          {"index_set", {{"generator", "basis"}, {"n", 4}}},
          {"params", {{"samples", 2000}, {"seed", 9}}}};
}

std::string validation_message(const std::string& experiment, const json& cfg) {
  try {
    resolve_config(experiment, cfg);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv numbers keep 17 significant digits") {
  CHECK(csv_number(0.1) == "0.10000000000000001");
  CHECK(csv_number(2.0) == "2");
  CHECK(csv_number(INFINITY) == "inf");
  CHECK(std::stod(csv_number(M_PI)) == M_PI);
}

TEST_CASE("index set generators") {
  CHECK(build_index_set({{"generator", "basis"}, {"n", 3}}).point(1) == std::vector<double>{0, 1, 0});
  CHECK(build_index_set({{"generator", "packing"}, {"m", 2}, {"n", 5}}).size() == 10);
  const auto s = build_index_set({{"generator", "sphere_random"}, {"n", 4}, {"count", 6}, {"seed", 3}});
  CHECK(s.size() == 6);
  for (const auto& p : s.points()) {
    double n2 = 0.0;
    for (double x : p) n2 += x * x;
    CHECK(n2 == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(build_index_set({{"generator", "sphere_random"}, {"n", 4}, {"count", 6}, {"seed", 3}}).points() == s.points());
  const auto il = build_index_set({{"generator", "interleave"}, {"of", {{"generator", "basis"}, {"n", 3}}}});
  CHECK(il.size() == 9);
  CHECK(il.dimension() == 6);
  const auto scaled = build_index_set({{"points", {{1.0, 2.0}}}, {"scale", 0.5}});
  CHECK(scaled.point(0) == std::vector<double>{0.5, 1.0});

  CHECK_THROWS_AS(build_index_set({{"points", {{1.0}, {1.0, 2.0}}}}), ValidationError);
  CHECK_THROWS_AS(build_index_set({{"generator", "spiral"}}), ValidationError);
  CHECK_THROWS_AS(build_index_set({{"generator", "packing"}, {"m", 4}, {"n", 3}}), ValidationError);
}

TEST_CASE("process descriptors") {
  CHECK(build_process({{"family", "rademacher"}}, 5).dimension() == 5);
  const json two = json::array({{{"family", "gaussian"}}, {{"family", "three_point"}, {"params", {{"atom", 3.0}}}}});
  CHECK(build_process(two, 2).model(1).family() == Family::three_point);
  CHECK_THROWS_AS(build_process(two, 3), ValidationError);
}

TEST_CASE("config validation names the field") {
  auto cfg = base("supremum");
  cfg["params"].erase("seed");
  CHECK(validation_message("supremum", cfg).starts_with("params.seed"));
  CHECK(validation_message("gamma", base("supremum")).starts_with("experiment"));
  CHECK(validation_message("spline", base("supremum")).starts_with("experiment"));
  auto extra = base("supremum");
  extra["colour"] = 1;
  CHECK(validation_message("supremum", extra).starts_with("colour"));
  auto bad_model = base("supremum");
  bad_model["process"] = {{"family", "sym_weibull"}};
  CHECK(validation_message("supremum", bad_model).starts_with("process"));
  auto bad_point = base("supremum");
  bad_point["index_set"] = {{"points", {{1.0, "x"}}}};
  CHECK(validation_message("supremum", bad_point).starts_with("index_set.points[0]"));
  auto bad_mode = base("gamma");
  bad_mode["params"]["mode"] = "fast";
  CHECK(validation_message("gamma", bad_mode).starts_with("params.mode"));

  // seed is optional for experiments without sampling
  auto g = base("gamma");
  g["params"].erase("seed");
  CHECK(validation_message("gamma", g).empty());
}

TEST_CASE("overrides enter the resolved config and its hash") {
  const auto cfg = base("supremum");
  const auto a = resolve_config("supremum", cfg);
  const auto b = resolve_config("supremum", cfg, RunOverrides{.samples = 5000, .seed = 10, .mode = GammaMode::exact});
  CHECK(b["params"]["samples"] == 5000);
  CHECK(b["params"]["seed"] == 10);
  CHECK(b["params"]["mode"] == "exact");
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a) == config_hash(resolve_config("supremum", cfg)));
  CHECK(config_hash(a).size() == 16);
  auto with_out = cfg;
  with_out["output"] = {{"dir", "/tmp/x"}};
  CHECK(config_hash(resolve_config("supremum", with_out)) == config_hash(a));
}

TEST_CASE("fnv-1a reference value") {
  // FNV-1a 64 of "{}" computed by hand from the published offset and prime
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : std::string("{}")) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  json empty = json::object();
  CHECK(config_hash(empty) == std::string(buf));
}

TEST_CASE("report contents") {
  auto cfg = base("supremum");
  cfg["index_set"] = {{"points", {{0.5, -1.0}}}};
  cfg["params"]["expect"] = 0.0;
  const auto out = run_experiment(resolve_config("supremum", cfg));
  CHECK(out.pass);
  CHECK(out.report["results"]["esup"]["mean"] == 0.0);
  for (const char* key : {"tool", "version", "schema_version", "config", "config_hash", "seeds", "grids", "results"})
    CHECK(out.report.contains(key));
  CHECK(out.report["seeds"]["master_seed"] == 9);
  CHECK(out.report["config"]["params"]["samples"] == 2000);

  auto sud = base("sudakov");
  sud["index_set"] = {{"points", {{0.0}, {1.0}}}};
  sud["params"]["p"] = 2;
  sud["params"]["u"] = 1;
  const auto s = run_experiment(resolve_config("sudakov", sud));
  CHECK_FALSE(s.pass);
  CHECK(s.report["results"]["runs"][0]["cardinality_ok"] == false);

  auto g = base("gamma");
  g["index_set"] = {{"points", {{0.0}, {1.0}}}, {"labels", {"a", "b"}}};
  g["params"]["mode"] = "exact";
  g["params"]["functional"] = "gamma2";
  g["params"]["expect"] = 1.0;
  const auto gr = run_experiment(resolve_config("gamma", g));
  CHECK(gr.pass);
  CHECK(gr.tables.at("distance_matrix.csv") == "label,a,b\na,0,1\nb,1,0\n");
}

TEST_CASE("reports do not depend on the worker count") {
  for (const char* e : {"supremum", "two-sided", "weak-strong", "hull"}) {
    auto cfg = base(e);
    cfg["index_set"] = {{"generator", "sphere_random"}, {"n", 4}, {"count", 7}, {"seed", 2}};
    cfg["process"] = {{"family", "sym_exponential"}};
    cfg["params"]["p"] = 3;
    const auto resolved = resolve_config(e, cfg);
    set_worker_count(1);
    const auto a = run_experiment(resolved);
    set_worker_count(8);
    const auto b = run_experiment(resolved);
    set_worker_count(0);
    CHECK(report_text(a) == report_text(b));
    CHECK(a.tables == b.tables);
  }
}

TEST_CASE("emit tables") {
  const auto dir = std::filesystem::temp_directory_path() / "chaining_runner_test";
  std::filesystem::remove_all(dir);
  auto cfg = base("sudakov");
  cfg["params"]["p"] = json::array({1, 2});
  const auto out = run_experiment(resolve_config("sudakov", cfg));
  emit_tables(out, dir.string());
  std::ifstream f(dir / "kappa_sweep.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().starts_with("p,kappa_obs\n1,"));
  CHECK(std::filesystem::exists(dir / "report.json"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_tables(out, "/proc/chaining/forbidden"), Error);
}
