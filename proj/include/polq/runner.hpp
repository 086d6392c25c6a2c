// polq/runner.hpp — experiment execution with file artifacts.
//
// Each experiment computes everything in memory first and only then writes its
// artifacts, so a failed run never leaves a partial output directory. Every
// contract artifact (manifest, report, CSV tables) is byte-reproducible for an
// identical config; wall-clock timings go to a separate non-contract file.
#pragma once

#include <string>
#include <vector>

#include "polq/config.hpp"

namespace polq::runner {

inline constexpr const char* kToolName = "polq";
inline constexpr const char* kToolVersion = "0.1.0";

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string op;  // "<", ">", or "==", relating measured to threshold
  bool pass = false;
  bool informational = false;  // reported but excluded from the exit code
};

struct RunOutcome {
  int exit_code = 0;  // 0 all checks pass, 1 at least one failed
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;  // file names written into the output dir
};

// Validates, runs the configured experiment, and writes manifest.json,
// report.json, result CSVs, and timings.json into cfg.output_dir. Throws
// config::ConfigError for an invalid config (before creating any file).
RunOutcome execute(const config::RunConfig& cfg);

}  // namespace polq::runner
