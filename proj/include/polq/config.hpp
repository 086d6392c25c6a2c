// polq/config.hpp — versioned run configuration.
//
// A run is described by a single JSON document. Parsing is strict: unknown
// keys are rejected (except a top-level "_meta" block, so an emitted manifest
// can be fed back in as a config unchanged), types are checked, and
// experiment-specific requirements are validated before any file is created.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "polq/dynamics.hpp"
#include "polq/io.hpp"
#include "polq/models.hpp"

namespace polq::config {

// Configuration problems are reported with this type so callers can map them
// to the invalid-config exit path without catching unrelated errors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// Expansion grid for the sweep experiment. An empty j_star_values list means
// "use model.j_star". The budget caps the total point count so a typo in a
// range cannot launch an unbounded batch.
struct SweepSpec {
  std::vector<double> g_values;
  std::vector<double> j_star_values;
  std::vector<int> cutoffs;
  int budget = 64;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string experiment;
  models::ModelParams model;

  dynamics::TimeGrid grid;
  bool has_grid = false;

  std::vector<int> cutoff_ladder;

  SweepSpec sweep;
  bool has_sweep = false;

  long seed = 0;
  std::filesystem::path output_dir = "out";
  int parallelism = 1;

  static RunConfig from_json(const io::ordered_json& doc);
  static RunConfig from_file(const std::filesystem::path& path);

  // Effective configuration, round-trippable through from_json.
  io::ordered_json to_json() const;

  // Cross-field checks: known experiment, experiment-specific required
  // sections, ladder ordering, sweep budget. Throws ConfigError.
  void validate() const;
};

const std::vector<std::string>& experiment_names();

// Verb -> experiment-family gate used by the command-line tool. "verify"
// accepts the verify-* experiments, "run" the single-run experiments, and
// "sweep" only the sweep.
bool experiment_matches_verb(const std::string& experiment, const std::string& verb);

}  // namespace polq::config
