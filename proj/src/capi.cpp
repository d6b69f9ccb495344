// SPDX-License-Identifier: Apache-2.0
#include "chaining/chaining.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chaining/errors.hpp"
#include "chaining/gamma.hpp"
#include "chaining/parallel.hpp"
#include "chaining/runner.hpp"

struct chn_config {
  nlohmann::json json;
  std::string output_dir;
  bool has_output_dir = false;
};

struct chn_report {
  chaining::RunOutcome outcome;
  std::string text;
  std::string hash;
  std::vector<std::string> names;
  std::vector<const std::string*> bodies;
};

namespace {

thread_local std::string last_error;

chn_status fail(chn_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
chn_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return CHN_OK;
  } catch (const chaining::ValidationError& e) {
    return fail(CHN_VALIDATION_ERROR, e.what());
  } catch (const chaining::DomainError& e) {
    return fail(CHN_DOMAIN_ERROR, e.what());
  } catch (const chaining::ResourceError& e) {
    return fail(CHN_RESOURCE_ERROR, e.what());
  } catch (const chaining::PreconditionError& e) {
    return fail(CHN_PRECONDITION_ERROR, e.what());
  } catch (const chaining::Error& e) {
    return fail(CHN_IO_ERROR, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CHN_VALIDATION_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(CHN_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(CHN_INTERNAL_ERROR, "unknown exception");
  }
}

chn_status make_config(nlohmann::json j, chn_config** out) {
  auto cfg = std::make_unique<chn_config>();
  if (j.is_object() && j.contains("output")) {
    const auto& o = j["output"];
    if (o.is_object() && o.contains("dir") && o["dir"].is_string()) {
      cfg->output_dir = o["dir"].get<std::string>();
      cfg->has_output_dir = true;
    }
  }
  cfg->json = std::move(j);
  *out = cfg.release();
  return CHN_OK;
}

}  // namespace

extern "C" {

const char* chn_version(void) { return CHAINING_VERSION; }

const char* chn_status_name(chn_status status) {
  switch (status) {
    case CHN_OK: return "ok";
    case CHN_INVALID_ARGUMENT: return "invalid_argument";
    case CHN_VALIDATION_ERROR: return "validation_error";
    case CHN_DOMAIN_ERROR: return "domain_error";
    case CHN_RESOURCE_ERROR: return "resource_error";
    case CHN_PRECONDITION_ERROR: return "precondition_error";
    case CHN_IO_ERROR: return "io_error";
    case CHN_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown";
}

const char* chn_last_error(void) { return last_error.c_str(); }

chn_status chn_set_threads(size_t workers) {
  return guarded([&] { chaining::set_worker_count(workers); });
}

size_t chn_threads(void) { return chaining::worker_count(); }

size_t chn_experiment_count(void) { return chaining::experiment_names().size(); }

const char* chn_experiment_name(size_t index) {
  const auto& names = chaining::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

chn_status chn_config_from_file(const char* path, chn_config** out) {
  if (!path || !out) return fail(CHN_INVALID_ARGUMENT, "null argument");
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(CHN_IO_ERROR, std::string("cannot read config '") + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return chn_config_from_string(ss.str().c_str(), out);
}

chn_status chn_config_from_string(const char* json, chn_config** out) {
  if (!json || !out) return fail(CHN_INVALID_ARGUMENT, "null argument");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    return fail(CHN_VALIDATION_ERROR, std::string("config is not valid JSON: ") + e.what());
  }
  last_error.clear();
  return make_config(std::move(j), out);
}

const char* chn_config_output_dir(const chn_config* config) {
  return config && config->has_output_dir ? config->output_dir.c_str() : nullptr;
}

void chn_config_free(chn_config* config) { delete config; }

chn_status chn_run(const char* experiment, const chn_config* config, const chn_overrides* overrides,
                   chn_report** out) {
  if (!experiment || !config || !out) return fail(CHN_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    chaining::RunOverrides ov;
    if (overrides) {
      if (overrides->has_samples) ov.samples = static_cast<std::size_t>(overrides->samples);
      if (overrides->has_seed) ov.seed = overrides->seed;
      if (overrides->mode == CHN_MODE_EXACT) ov.mode = chaining::GammaMode::exact;
      if (overrides->mode == CHN_MODE_GREEDY) ov.mode = chaining::GammaMode::greedy;
    }
    const auto resolved = chaining::resolve_config(experiment, config->json, ov);
    auto r = std::make_unique<chn_report>();
    r->outcome = chaining::run_experiment(resolved);
    r->text = chaining::report_text(r->outcome);
    r->hash = chaining::config_hash(resolved);
    for (const auto& [name, body] : r->outcome.tables) {
      r->names.push_back(name);
      r->bodies.push_back(&body);
    }
    *out = r.release();
  });
}

int chn_report_pass(const chn_report* report) { return report && report->outcome.pass ? 1 : 0; }

const char* chn_report_json(const chn_report* report) { return report ? report->text.c_str() : nullptr; }

const char* chn_report_config_hash(const chn_report* report) { return report ? report->hash.c_str() : nullptr; }

size_t chn_report_table_count(const chn_report* report) { return report ? report->names.size() : 0; }

const char* chn_report_table_name(const chn_report* report, size_t index) {
  return report && index < report->names.size() ? report->names[index].c_str() : nullptr;
}

const char* chn_report_table_csv(const chn_report* report, size_t index) {
  return report && index < report->bodies.size() ? report->bodies[index]->c_str() : nullptr;
}

chn_status chn_report_write(const chn_report* report, const char* dir) {
  if (!report || !dir) return fail(CHN_INVALID_ARGUMENT, "null argument");
  return guarded([&] { chaining::emit_tables(report->outcome, dir); });
}

void chn_report_free(chn_report* report) { delete report; }

chn_status chn_combination_norm(const char* model_json, const double* coeffs, size_t count, double p, double* value,
                                double* error_bound) {
  if (!model_json || (!coeffs && count > 0) || !value) return fail(CHN_INVALID_ARGUMENT, "null argument");
  if (count == 0) return fail(CHN_INVALID_ARGUMENT, "empty coefficient vector");
  return guarded([&] {
    const auto model = chaining::DistributionModel::from_json(nlohmann::json::parse(model_json));
    const auto proc = chaining::ProcessSpec::iid(model, count);
    const auto r = chaining::combination_norm(proc, std::span<const double>(coeffs, count), p);
    *value = r.value;
    if (error_bound) *error_bound = r.error_bound;
  });
}

chn_status chn_basis_gamma(const char* model_json, size_t m, double* value) {
  if (!model_json || !value) return fail(CHN_INVALID_ARGUMENT, "null argument");
  if (m == 0) return fail(CHN_INVALID_ARGUMENT, "m must be positive");
  return guarded([&] {
    const auto model = chaining::DistributionModel::from_json(nlohmann::json::parse(model_json));
    const auto proc = chaining::ProcessSpec::iid(model, 2);
    const std::vector<double> diff{1.0, -1.0};
    *value = chaining::uniform_space_gamma(m, [&](double p) { return chaining::combination_norm(proc, diff, p).value; });
  });
}

}  // extern "C"
