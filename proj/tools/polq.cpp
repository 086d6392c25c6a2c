// polq — configuration-driven experiment runner and verification suite.
//
// Verbs: verify (verify-* experiments), run (single-run experiments), sweep.
// Exit codes: 0 all checks pass, 1 at least one numerical check failed,
// 2 invalid config or usage (in which case no output files are created).
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "polq/config.hpp"
#include "polq/runner.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string output_dir;
  int parallelism = 0;
};

void add_common_options(CLI::App* cmd, CliOptions& options) {
  cmd->add_option("--config", options.config_path, "Path to the JSON run configuration")
      ->required();
  cmd->add_option("--output", options.output_dir,
                  "Override the configured output directory");
  cmd->add_option("--parallelism", options.parallelism,
                  "Override the configured worker count")
      ->check(CLI::PositiveNumber);
}

int run_verb(const std::string& verb, const CliOptions& options) {
  polq::config::RunConfig cfg;
  try {
    cfg = polq::config::RunConfig::from_file(options.config_path);
    if (!options.output_dir.empty()) {
      cfg.output_dir = options.output_dir;
    }
    if (options.parallelism > 0) {
      cfg.parallelism = options.parallelism;
    }
    if (!polq::config::experiment_matches_verb(cfg.experiment, verb)) {
      throw polq::config::ConfigError("config.experiment: \"" + cfg.experiment +
                                      "\" cannot be started with the \"" + verb + "\" verb");
    }
    cfg.validate();
  } catch (const std::exception& err) {
    std::fprintf(stderr, "polq: invalid config: %s\n", err.what());
    return 2;
  }

  polq::runner::RunOutcome outcome;
  try {
    outcome = polq::runner::execute(cfg);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "polq: run failed: %s\n", err.what());
    return 1;
  }

  for (const auto& check : outcome.checks) {
    if (check.informational) {
      std::printf("[INFO] %-36s measured=%.6g\n", check.name.c_str(), check.measured);
    } else {
      std::printf("[%s] %-36s measured=%.6g threshold%s%.6g\n",
                  check.pass ? "PASS" : "FAIL", check.name.c_str(), check.measured,
                  check.op == "==" ? "=" : check.op.c_str(), check.threshold);
    }
  }
  int n_failed = 0;
  for (const auto& check : outcome.checks) {
    if (!check.informational && !check.pass) {
      ++n_failed;
    }
  }
  std::printf("%s: %s (%d failed), artifacts in %s\n", cfg.experiment.c_str(),
              n_failed == 0 ? "all checks passed" : "checks FAILED", n_failed,
              cfg.output_dir.string().c_str());
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polq — polaron-frame decoherence laboratory"};
  app.require_subcommand(1);

  CliOptions verify_opts;
  CliOptions run_opts;
  CliOptions sweep_opts;
  CLI::App* verify = app.add_subcommand("verify", "Run a verification experiment");
  CLI::App* run = app.add_subcommand("run", "Run a dynamics experiment");
  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common_options(verify, verify_opts);
  add_common_options(run, run_opts);
  add_common_options(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  if (verify->parsed()) {
    return run_verb("verify", verify_opts);
  }
  if (run->parsed()) {
    return run_verb("run", run_opts);
  }
  return run_verb("sweep", sweep_opts);
}
