#pragma once

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgq/spectral.hpp"

namespace lgq {

// Configuration problem: malformed JSON value, unknown key, out-of-range
// parameter. Maps to exit code 2 at the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Built-in experiment configs named after the figure whose data they produce.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);

// Full schema check: required keys, types, ranges, unknown-key rejection.
// Throws ConfigError naming the offending field. No computation.
void validate_config(const nlohmann::json& cfg);

struct RunOutcome {
  std::vector<std::string> outputs;   // files written
  std::vector<std::string> warnings;  // non-fatal issues (failed sweep rows, ...)
};

// Validates and executes a config; writes <output_prefix>.csv and
// <output_prefix>.manifest.json (sweeps also write <output_prefix>.gaps.json).
// Throws ConfigError for config problems, std::runtime_error for solver
// failures (exit 3 at the CLI).
RunOutcome run_experiment(const nlohmann::json& cfg);

// The embedded config of a manifest written by run_experiment; re-running it
// reproduces the CSV byte for byte.
nlohmann::json config_from_manifest(const nlohmann::json& manifest);

// Shared serialization of a computed spectrum (also used for oracle output).
std::string spectrum_to_csv(const Spectrum& sp);

}  // namespace lgq
