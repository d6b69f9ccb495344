// SPDX-License-Identifier: Apache-2.0
#include "chaining/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "chaining/errors.hpp"
#include "chaining/stochlab.hpp"
#include "chaining/tailkit.hpp"
#include "chaining/verify.hpp"

namespace chaining {

namespace {

constexpr std::uint64_t kSupStreamId = 1;
constexpr std::uint64_t kMetricStreamId = 2;
constexpr std::uint64_t kSphereStreamId = 0x737068657265ULL;
constexpr std::size_t kDefaultSamples = 100000;
constexpr std::size_t kMatrixTableLimit = 256;
constexpr std::size_t kSandwichPoints = 256;

bool sampled(const std::string& e) {
  return e == "supremum" || e == "sudakov" || e == "two-sided" || e == "weak-strong" || e == "compare";
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

bool nonnegative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) invalid(path + "." + key, "missing");
  return obj.at(key);
}

double number(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_number()) invalid(path + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const nlohmann::json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj, key, path) : fallback;
}

std::size_t count(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!nonnegative_integer(v)) invalid(path + "." + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) invalid(path + "." + key, "expected a number or a nonempty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) invalid(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::string text(const nlohmann::json& obj, const std::string& key, const std::string& path,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) invalid(path + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

DistributionModel model_at(const nlohmann::json& spec, const std::string& path) {
  try {
    return DistributionModel::from_json(spec);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

std::string matrix_csv(const DistanceMatrix& d, const IndexSet& T) { return distance_matrix_csv(d, T); }

nlohmann::json null_if_nan(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct Context {
  std::string experiment;
  nlohmann::json params;
  IndexSet T;
  ProcessSpec process;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  RngStream sup_stream;
  MetricOptions metric;
  nlohmann::json grids = nlohmann::json::object();
  std::map<std::string, std::string> tables;
};

std::optional<GammaMode> mode_of(const nlohmann::json& params) {
  if (!params.contains("mode")) return std::nullopt;
  return parse_mode(params["mode"].get<std::string>());
}

// ---------------------------------------------------------------- runners

nlohmann::json run_gamma(Context& c, bool& pass) {
  const auto f = parse_functional(text(c.params, "functional", "params", "gammaX"));
  const auto mode = mode_of(c.params).value_or(GammaMode::greedy);
  const MetricSpace space(c.T, c.process, c.metric);
  const auto g = compute_gamma(space, f, mode);
  nlohmann::json orders = nlohmann::json::array();
  for (unsigned n = 0; n < g.certificate.depth(); ++n) orders.push_back(level_order(f, n));
  c.grids["level_orders"] = orders;
  nlohmann::json r = {{"functional", functional_name(f)},
                      {"mode", mode_name(mode)},
                      {"value", g.value},
                      {"level_terms", g.level_terms},
                      {"argmax", g.argmax},
                      {"certificate", g.certificate.to_json()}};
  pass = true;
  if (c.params.contains("expect")) {
    const double want = number(c.params, "expect", "params");
    const double tol = number_or(c.params, "tolerance", "params", 1e-6);
    r["expect"] = want;
    r["tolerance"] = tol;
    pass = std::abs(g.value - want) <= tol;
  }
  if (c.T.size() <= kMatrixTableLimit) {
    const double p = number_or(c.params, "p", "params", 2.0);
    c.grids["matrix_p"] = p;
    c.tables["distance_matrix.csv"] = matrix_csv(space.matrix(p), c.T);
  }
  return r;
}

nlohmann::json run_supremum(Context& c, bool& pass) {
  const auto target = parse_target(text(c.params, "target", "params", "sup_increments"));
  const auto e = estimate_sup(c.process, c.T, c.samples, c.sup_stream, target);
  nlohmann::json r = {{"esup", e.to_json()}};
  pass = true;
  if (c.params.contains("expect")) {
    const double want = number(c.params, "expect", "params");
    const double tol = number_or(c.params, "tolerance", "params", 0.0);
    r["expect"] = want;
    r["tolerance"] = tol;
    pass = std::abs(e.mean - want) <= tol + 3.0 * e.std_error;
  }
  return r;
}

nlohmann::json run_sudakov(Context& c, bool& pass) {
  const auto ps = numbers(c.params, "p", "params");
  const bool has_u = c.params.contains("u");
  const bool has_floor = c.params.contains("kappa_floor");
  const double floor = number_or(c.params, "kappa_floor", "params", 0.0);
  c.grids["p"] = ps;
  nlohmann::json runs = nlohmann::json::array();
  std::string sweep = "p,kappa_obs\n";
  pass = true;
  for (double p : ps) {
    double u = 0.0;
    if (has_u) {
      u = number(c.params, "u", "params");
    } else {
      if (c.T.size() < 2) invalid("index_set", "Sudakov experiment needs at least two points");
      const auto d = distance_matrix(c.T, c.process, p, c.metric);
      u = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < c.T.size(); ++i)
        for (std::size_t j = i + 1; j < c.T.size(); ++j) u = std::min(u, d.at(i, j));
    }
    const auto s = sudakov_experiment(c.process, c.T, p, u, c.samples, c.sup_stream, c.metric);
    auto j = s.to_json();
    bool ok = s.cardinality_ok && s.separation_ok;
    if (has_floor) {
      j["kappa_floor"] = floor;
      ok = ok && s.kappa_obs + 3.0 * s.kappa_std_error >= floor;
    }
    j["u_source"] = has_u ? "config" : "min_observed_separation";
    j["pass"] = ok;
    pass = pass && ok;
    runs.push_back(j);
    sweep += csv_number(p) + "," + csv_number(s.kappa_obs) + "\n";
  }
  c.tables["kappa_sweep.csv"] = sweep;
  return {{"runs", runs}};
}

nlohmann::json run_two_sided(Context& c, bool& pass) {
  const auto mode = mode_of(c.params).value_or(GammaMode::greedy);
  const MetricSpace space(c.T, c.process, c.metric);
  const auto r = two_sided_experiment(space, c.samples, c.sup_stream, mode);
  pass = r.pass;
  std::string terms = "level,term\n";
  for (std::size_t n = 0; n < r.certificate.level_terms.size(); ++n)
    terms += std::to_string(n) + "," + csv_number(r.certificate.level_terms[n]) + "\n";
  c.tables["level_terms.csv"] = terms;
  return r.to_json();
}

nlohmann::json run_weak_strong(Context& c, bool& pass) {
  const auto ps = numbers(c.params, "p", "params");
  const double constant = number_or(c.params, "constant", "params", kWeakStrongConstant);
  c.grids["p"] = ps;
  nlohmann::json runs = nlohmann::json::array();
  std::string table = "p,c_obs,c_obs_stderr\n";
  pass = true;
  for (double p : ps) {
    const auto w = weak_strong_experiment(c.process, c.T, p, c.samples, c.sup_stream, c.metric);
    auto j = w.to_json();
    j["pass"] = w.c_obs <= constant;
    pass = pass && w.c_obs <= constant;
    runs.push_back(j);
    table += csv_number(p) + "," + csv_number(w.c_obs) + "," + csv_number(w.c_obs_std_error) + "\n";
  }
  c.tables["weak_strong.csv"] = table;
  return {{"constant", constant}, {"runs", runs}};
}

nlohmann::json run_compare(Context& c, bool& pass) {
  const auto y = build_process(field(c.params, "y_process", "params"), c.T.dimension(), "params.y_process");
  const auto grid = c.params.contains("p_grid") ? numbers(c.params, "p_grid", "params")
                                                : std::vector<double>{2.0, 3.0, 4.0};
  const double scale = number_or(c.params, "y_scale", "params", 1.0);
  c.grids["p_grid"] = grid;
  c.grids["quantile_levels"] = kTailQuantiles;
  c.grids["c_arg"] = kFrontierArgGrid;
  const auto r = comparison_experiment(c.process, y, c.T, grid, c.samples, c.sup_stream, scale, c.metric);
  std::string tail = "level,u,prob_y\n";
  for (const auto& t : r.tail) tail += csv_number(t.level) + "," + csv_number(t.u) + "," + csv_number(t.prob_y) + "\n";
  std::string front = "c_arg,c_prob\n";
  for (const auto& f : r.frontier) front += csv_number(f.c_arg) + "," + csv_number(f.c_prob) + "\n";
  c.tables["tail_domination.csv"] = tail;
  c.tables["frontier.csv"] = front;
  pass = true;
  return r.to_json();
}

nlohmann::json run_tails(Context& c, bool& pass) {
  const double alpha = number(c.params, "alpha", "params");
  const auto& model = c.process.model(0);
  const auto k = regularity_constants(alpha);
  const auto alpha_check = check_alpha_regular(model, alpha);
  nlohmann::json r = {{"model", model.to_json()},
                      {"constants",
                       {{"alpha", k.alpha},
                        {"kappa_alpha", k.kappa_alpha},
                        {"b_alpha", k.b_alpha},
                        {"T_alpha", k.T_alpha},
                        {"L_alpha", k.L_alpha},
                        {"t0", k.t0}}},
                      {"alpha_regular", to_json(alpha_check)}};
  c.grids["moment_p"] = default_p_grid();
  if (c.params.contains("beta")) {
    const double beta = number(c.params, "beta", "params");
    r["speed"] = to_json(check_speed_beta(model, beta));
    r["beta"] = beta;
  }
  if (!alpha_check.pass) {
    pass = false;
    return r;
  }
  const auto envelope = log_concave_envelope(model, alpha);
  const auto grid = log_grid(k.T_alpha, 100.0 * k.T_alpha, kSandwichPoints);
  c.grids["sandwich"] = {{"lo", k.T_alpha}, {"hi", 100.0 * k.T_alpha}, {"points", kSandwichPoints}, {"spacing", "log"}};
  const auto s = check_sandwich(model.tail(), envelope, k.L_alpha, grid);
  std::string table = "t,N,M,M_shifted\n";
  for (const auto& row : s.rows)
    table += csv_number(row.t) + "," + csv_number(row.n) + "," + csv_number(row.m) + "," + csv_number(row.m_shifted) +
             "\n";
  c.tables["tail_sandwich.csv"] = table;
  r["sandwich"] = {{"violations", s.violations}, {"worst_slack", null_if_nan(s.worst_slack)}, {"slack", 1e-8}};
  pass = s.violations == 0;
  return r;
}

nlohmann::json run_hull(Context& c, bool& pass) {
  const MetricSpace space(c.T, c.process, c.metric);
  PartitionTree tree;
  std::string source;
  if (c.params.contains("tree")) {
    try {
      tree = PartitionTree::from_json(c.params["tree"]);
    } catch (const Error& e) {
      invalid("params.tree", e.what());
    }
    source = "config";
  } else {
    const auto mode = mode_of(c.params).value_or(c.T.size() <= kExactModeCap ? GammaMode::exact : GammaMode::greedy);
    tree = compute_gamma(space, Functional::gamma_x, mode).certificate;
    source = mode_name(mode);
  }
  const auto h = convex_hull_decomposition(space, tree);
  std::string table = "k,level,from,to,step,norm_cap\n";
  for (const auto& p : h.chain)
    table += std::to_string(p.k) + "," + std::to_string(p.level) + "," + std::to_string(p.from) + "," +
             std::to_string(p.to) + "," + csv_number(p.step) + "," + csv_number(p.norm_cap) + "\n";
  c.tables["chain_points.csv"] = table;
  pass = h.pass;
  auto j = h.to_json();
  j["tree"] = tree.to_json();
  j["tree_source"] = source;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json without_output(const nlohmann::json& resolved) {
  nlohmann::json j = resolved;
  j.erase("output");
  return j;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"gamma",       "supremum", "sudakov", "two-sided",
                                              "weak-strong", "compare",  "tails",   "hull"};
  return names;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

IndexSet build_index_set(const nlohmann::json& spec, const std::string& path) {
  if (!spec.is_object()) invalid(path, "expected an object");
  IndexSet T = [&]() -> IndexSet {
    if (spec.contains("points")) {
      const auto& pts = spec["points"];
      if (!pts.is_array() || pts.empty()) invalid(path + ".points", "expected a nonempty list of points");
      std::vector<std::vector<double>> out;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = path + ".points[" + std::to_string(i) + "]";
        if (!pts[i].is_array() || pts[i].empty()) invalid(p, "expected a nonempty list of numbers");
        std::vector<double> v;
        for (const auto& x : pts[i]) {
          if (!x.is_number()) invalid(p, "expected numbers");
          v.push_back(x.get<double>());
        }
        if (!out.empty() && v.size() != out.front().size()) invalid(p, "dimension differs from points[0]");
        out.push_back(std::move(v));
      }
      std::vector<std::string> labels;
      if (spec.contains("labels")) {
        if (!spec["labels"].is_array() || spec["labels"].size() != out.size())
          invalid(path + ".labels", "expected one label per point");
        labels = spec["labels"].get<std::vector<std::string>>();
      }
      return IndexSet(std::move(out), std::move(labels));
    }
    const std::string gen = text(spec, "generator", path, "");
    if (gen.empty()) invalid(path, "needs 'points' or 'generator'");
    if (gen == "basis") {
      const std::size_t n = count(spec, "n", path);
      if (n == 0) invalid(path + ".n", "must be positive");
      std::vector<std::vector<double>> pts(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) pts[i][i] = 1.0;
      return IndexSet(std::move(pts));
    }
    if (gen == "packing") {
      const std::size_t m = count(spec, "m", path);
      const std::size_t n = count(spec, "n", path);
      if (m < 1 || m > n) invalid(path, "packing needs 1 <= m <= n");
      if (binomial(static_cast<unsigned>(n), static_cast<unsigned>(m)) > 1e6) invalid(path, "packing set too large");
      return packing_set(m, n);
    }
    if (gen == "sphere_random") {
      const std::size_t n = count(spec, "n", path);
      const std::size_t k = count(spec, "count", path);
      const auto seed = field(spec, "seed", path);
      if (!nonnegative_integer(seed)) invalid(path + ".seed", "expected a nonnegative integer");
      if (n == 0 || k == 0) invalid(path, "n and count must be positive");
      Rng rng(RngStream{seed.get<std::uint64_t>(), kSphereStreamId});
      std::vector<std::vector<double>> pts(k, std::vector<double>(n));
      for (auto& p : pts) {
        double norm = 0.0;
        do {
          norm = 0.0;
          for (auto& x : p) {
            x = rng.normal();
            norm += x * x;
          }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (auto& x : p) x /= norm;
      }
      return IndexSet(std::move(pts));
    }
    if (gen == "interleave") return interleave(build_index_set(field(spec, "of", path), path + ".of"));
    invalid(path + ".generator", "unknown generator '" + gen + "'");
  }();
  if (spec.contains("scale")) T = T.scaled(number(spec, "scale", path));
  return T;
}

ProcessSpec build_process(const nlohmann::json& spec, std::size_t dimension, const std::string& path) {
  if (spec.is_object()) return ProcessSpec::iid(model_at(spec, path), dimension);
  if (!spec.is_array()) invalid(path, "expected a model descriptor or a list of them");
  if (spec.size() != dimension)
    invalid(path, "lists " + std::to_string(spec.size()) + " models for dimension " + std::to_string(dimension));
  std::vector<DistributionModel> models;
  for (std::size_t i = 0; i < spec.size(); ++i) models.push_back(model_at(spec[i], path + "[" + std::to_string(i) + "]"));
  return ProcessSpec(std::move(models));
}

nlohmann::json resolve_config(const std::string& experiment, const nlohmann::json& config,
                              const RunOverrides& overrides) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    invalid("experiment", "unknown experiment '" + experiment + "'");
  if (!config.is_object()) invalid("config", "expected a JSON object");
  for (const auto& [key, _] : config.items()) {
    if (key != "experiment" && key != "process" && key != "index_set" && key != "params" && key != "output" &&
        key != "schema_version")
      invalid(key, "unknown field");
  }
  if (config.contains("experiment") && config["experiment"] != experiment)
    invalid("experiment", "config is for '" + config["experiment"].dump() + "', not '" + experiment + "'");
  if (config.contains("schema_version") && config["schema_version"] != kSchemaVersion)
    invalid("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");

  nlohmann::json r = nlohmann::json::object();
  r["experiment"] = experiment;
  r["schema_version"] = kSchemaVersion;
  r["process"] = field(config, "process", "config");
  r["index_set"] = field(config, "index_set", "config");
  nlohmann::json params = config.value("params", nlohmann::json::object());
  if (!params.is_object()) invalid("params", "expected an object");
  if (config.contains("output")) {
    if (!config["output"].is_object()) invalid("output", "expected an object");
    r["output"] = config["output"];
  }

  if (overrides.samples) params["samples"] = *overrides.samples;
  if (overrides.seed) params["seed"] = *overrides.seed;
  if (overrides.mode) params["mode"] = mode_name(*overrides.mode);
  if (!params.contains("samples")) params["samples"] = kDefaultSamples;
  if (!nonnegative_integer(params["samples"])) invalid("params.samples", "expected a nonnegative integer");
  if (params.contains("seed") && !nonnegative_integer(params["seed"]))
    invalid("params.seed", "expected a nonnegative integer");
  if (sampled(experiment) && !params.contains("seed")) invalid("params.seed", "required for sampled experiments");
  if (params.contains("mode")) {
    if (!params["mode"].is_string()) invalid("params.mode", "expected \"exact\" or \"greedy\"");
    try {
      params["mode"] = mode_name(parse_mode(params["mode"].get<std::string>()));
    } catch (const Error& e) {
      invalid("params.mode", e.what());
    }
  }
  r["params"] = params;

  const auto T = build_index_set(r["index_set"], "index_set");
  build_process(r["process"], T.dimension(), "process");
  return r;
}

std::string config_hash(const nlohmann::json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(without_output(resolved).dump()));
  return buf;
}

RunOutcome run_experiment(const nlohmann::json& resolved) {
  const auto& params = resolved.at("params");
  auto T = build_index_set(resolved.at("index_set"));
  auto process = build_process(resolved.at("process"), T.dimension());
  const std::uint64_t seed = params.value("seed", std::uint64_t{0});
  MetricOptions metric;
  metric.stream = RngStream{seed, kMetricStreamId};
  Context c{resolved.at("experiment").get<std::string>(),
            params,
            std::move(T),
            std::move(process),
            params.at("samples").get<std::size_t>(),
            seed,
            RngStream{seed, kSupStreamId},
            metric,
            nlohmann::json::object(),
            {}};

  bool pass = false;
  nlohmann::json results;
  const auto& e = c.experiment;
  if (e == "gamma") results = run_gamma(c, pass);
  else if (e == "supremum") results = run_supremum(c, pass);
  else if (e == "sudakov") results = run_sudakov(c, pass);
  else if (e == "two-sided") results = run_two_sided(c, pass);
  else if (e == "weak-strong") results = run_weak_strong(c, pass);
  else if (e == "compare") results = run_compare(c, pass);
  else if (e == "tails") results = run_tails(c, pass);
  else if (e == "hull") results = run_hull(c, pass);
  else invalid("experiment", "unknown experiment '" + e + "'");

  c.grids["metric_mc_samples"] = c.metric.mc_samples;
  RunOutcome out;
  out.pass = pass;
  out.tables = std::move(c.tables);
  out.report = {{"tool", "chaining"},
                {"version", CHAINING_VERSION},
                {"schema_version", kSchemaVersion},
                {"experiment", e},
                {"config", without_output(resolved)},
                {"config_hash", config_hash(resolved)},
                {"seeds",
                 {{"master_seed", c.seed},
                  {"supremum_stream", kSupStreamId},
                  {"metric_stream", kMetricStreamId},
                  {"monte_carlo_chunk", kMonteCarloChunk}}},
                {"grids", c.grids},
                {"results", results},
                {"tables", nlohmann::json::array()},
                {"pass", pass}};
  for (const auto& [name, _] : out.tables) out.report["tables"].push_back(name);
  return out;
}

std::string report_text(const RunOutcome& outcome) { return outcome.report.dump(2) + "\n"; }

void emit_tables(const RunOutcome& outcome, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    f.close();
    if (!f) throw Error("cannot write '" + path.string() + "'");
  };
  write("report.json", report_text(outcome));
  for (const auto& [name, body] : outcome.tables) write(name, body);
}

}  // namespace chaining
