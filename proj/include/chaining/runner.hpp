// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaining/gamma.hpp"
#include "chaining/metric.hpp"

namespace chaining {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiment_names();

// Command-line overrides; they are written into the resolved config.
struct RunOverrides {
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<GammaMode> mode;
};

struct RunOutcome {
  nlohmann::json report;
  // file name -> CSV text
  std::map<std::string, std::string> tables;
  bool pass = false;
};

// Applies overrides, fills defaults and checks the schema. The experiment
// name comes from the subcommand; a config field "experiment" must agree.
// Throws ValidationError with the offending field path.
nlohmann::json resolve_config(const std::string& experiment, const nlohmann::json& config,
                              const RunOverrides& overrides = {});

// Runs a resolved config.
RunOutcome run_experiment(const nlohmann::json& resolved);

// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

// Report as written to disk: two-space indented JSON and a final newline.
std::string report_text(const RunOutcome& outcome);

// Writes report.json and the tables into dir (created if missing). Throws
// Error if a file cannot be written.
void emit_tables(const RunOutcome& outcome, const std::string& dir);

// Index set from an explicit point list or a generator descriptor.
IndexSet build_index_set(const nlohmann::json& spec, const std::string& path = "index_set");
// One descriptor (broadcast) or a list with one per coordinate.
ProcessSpec build_process(const nlohmann::json& spec, std::size_t dimension, const std::string& path = "process");

std::string csv_number(double v);

}  // namespace chaining
