#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polq/config.hpp"
#include "polq/io.hpp"

using namespace polq;
using config::ConfigError;
using config::RunConfig;
using io::ordered_json;

namespace {

ordered_json full_config_doc() {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["experiment"] = "exact-vs-markovian";
  doc["model"] = {{"n_sites", 2}, {"j_star", 0.1},        {"delta", 1.0},
                  {"g", 1.0},     {"omega", 1.0},         {"phonon_cutoff", 10}};
  doc["grid"] = {{"t_start", 0.0}, {"t_end", 50.0}, {"n_steps", 2000}, {"sample_stride", 1}};
  doc["seed"] = 7;
  doc["output_dir"] = "out/run-a";
  doc["parallelism"] = 2;
  return doc;
}

}  // namespace

TEST_CASE("run configuration round-trips through json") {
  ordered_json doc = full_config_doc();
  RunConfig cfg = RunConfig::from_json(doc);
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.experiment == "exact-vs-markovian");
  CHECK(cfg.model.n_sites == 2);
  CHECK(cfg.model.phonon_cutoff == 10);
  CHECK(cfg.has_grid);
  CHECK(cfg.grid.n_steps == 2000);
  CHECK(cfg.seed == 7);
  CHECK(cfg.output_dir == std::filesystem::path("out/run-a"));
  CHECK(cfg.parallelism == 2);
  cfg.validate();

  RunConfig again = RunConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());

  // A sweep block survives the round trip too.
  ordered_json sweep_doc = full_config_doc();
  sweep_doc["experiment"] = "sweep";
  sweep_doc.erase("grid");
  sweep_doc["sweep"] = {{"g_values", {0.5, 1.0}}, {"cutoffs", {4, 6}}, {"budget", 16}};
  RunConfig sweep_cfg = RunConfig::from_json(sweep_doc);
  sweep_cfg.validate();
  CHECK(sweep_cfg.has_sweep);
  CHECK(sweep_cfg.sweep.g_values == std::vector<double>{0.5, 1.0});
  CHECK(sweep_cfg.sweep.j_star_values.empty());
  CHECK(RunConfig::from_json(sweep_cfg.to_json()).to_json() == sweep_cfg.to_json());
}

TEST_CASE("unknown keys are rejected at every level, _meta only at the top") {
  ordered_json doc = full_config_doc();
  doc["experimnt"] = "typo";
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["model"]["coupling"] = 1.0;
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["grid"]["dt"] = 0.01;
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["sweep"] = {{"g_values", {1.0}}, {"cutoffs", {4}}, {"points", 3}};
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  // An emitted manifest can be fed back in unchanged.
  doc = full_config_doc();
  doc["_meta"] = {{"tool", "polq"}};
  CHECK_NOTHROW(RunConfig::from_json(doc));
  doc = full_config_doc();
  doc["model"]["_meta"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);
}

TEST_CASE("missing keys and wrong types are reported as config errors") {
  ordered_json doc = full_config_doc();
  doc.erase("schema_version");
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc.erase("experiment");
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc.erase("model");
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["schema_version"] = "1";
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["model"]["g"] = "strong";
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["model"]["n_sites"] = 2.5;
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["cutoff_ladder"] = {4, "six"};
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  doc = full_config_doc();
  doc["model"] = "defaults";
  CHECK_THROWS_AS(RunConfig::from_json(doc), ConfigError);

  CHECK_THROWS_AS(RunConfig::from_json(ordered_json::array()), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("validation enforces experiment-specific requirements") {
  RunConfig base = RunConfig::from_json(full_config_doc());

  RunConfig cfg = base;
  cfg.schema_version = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = base;
  cfg.experiment = "verify-everything";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = base;
  cfg.parallelism = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.parallelism = 300;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = base;
  cfg.output_dir.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = base;
  cfg.model.n_sites = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  SUBCASE("ladder experiments need a strictly increasing ladder") {
    cfg = base;
    cfg.experiment = "verify-h2";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cutoff_ladder = {4, 6, 6};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cutoff_ladder = {0, 4};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cutoff_ladder = {4, 6, 8};
    cfg.validate();
  }

  SUBCASE("split verification refuses composite spaces too large to materialize") {
    cfg = base;
    cfg.experiment = "verify-split";
    cfg.cutoff_ladder = {4, 6, 8};
    cfg.validate();
    cfg.model.n_sites = 3;
    cfg.cutoff_ladder = {8, 15};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  SUBCASE("time-evolution experiments need a valid grid") {
    cfg = base;
    cfg.experiment = "markovian-run";
    cfg.has_grid = false;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.has_grid = true;
    cfg.grid.t_end = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.grid.t_end = 50.0;
    cfg.model.n_sites = 7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  SUBCASE("exact comparison needs phonons and a dense-sized space") {
    cfg = base;
    cfg.model.phonon_cutoff = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.model.phonon_cutoff = 10;
    cfg.model.n_sites = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  SUBCASE("two-qubit demo is pinned to two sites") {
    cfg = base;
    cfg.experiment = "two-qubit-demo";
    cfg.validate();
    cfg.model.n_sites = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  SUBCASE("identity checks cap the site count") {
    cfg = base;
    cfg.experiment = "verify-identities";
    cfg.model.phonon_cutoff = 0;
    cfg.validate();
    cfg.model.n_sites = 13;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  SUBCASE("sweep bounds its point grid") {
    cfg = base;
    cfg.experiment = "sweep";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no sweep block
    cfg.has_sweep = true;
    cfg.sweep.g_values = {0.5, 1.0};
    cfg.sweep.cutoffs = {4, 6};
    cfg.sweep.budget = 16;
    cfg.validate();
    cfg.sweep.g_values = {0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.sweep.g_values = {0.5, 1.0};
    cfg.sweep.cutoffs = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.sweep.cutoffs = {4, 6};
    cfg.sweep.budget = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.sweep.budget = 16;
    cfg.sweep.cutoffs = {4, 40};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // dense guard on the largest cutoff
  }
}

TEST_CASE("experiments are gated by command verb") {
  using config::experiment_matches_verb;
  for (const std::string& name : config::experiment_names()) {
    bool is_verify = name.rfind("verify-", 0) == 0;
    bool is_sweep = name == "sweep";
    CHECK(experiment_matches_verb(name, "verify") == is_verify);
    CHECK(experiment_matches_verb(name, "sweep") == is_sweep);
    CHECK(experiment_matches_verb(name, "run") == (!is_verify && !is_sweep));
    CHECK_FALSE(experiment_matches_verb(name, "plot"));
  }
  CHECK(config::experiment_names().size() == 8);
}

TEST_CASE("csv tables render deterministically and quote only when needed") {
  io::CsvTable table({"t", "value", "note"});
  table.add_row(std::vector<std::string>{"0", "1.5", "plain"});
  table.add_row(std::vector<std::string>{"1", "2.5", "a,b"});
  table.add_row(std::vector<std::string>{"2", "3.5", "say \"hi\""});
  CHECK(table.n_rows() == 3);
  CHECK(table.str() ==
        "t,value,note\n"
        "0,1.5,plain\n"
        "1,2.5,\"a,b\"\n"
        "2,3.5,\"say \"\"hi\"\"\"\n");

  io::CsvTable numeric({"a", "b"});
  numeric.add_row(std::vector<double>{0.5, 1.0 / 3.0});
  CHECK(numeric.str() == "a,b\n0.5,0.33333333333333331\n");

  CHECK_THROWS_AS(table.add_row(std::vector<std::string>{"too", "short"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::CsvTable(std::vector<std::string>{}), std::invalid_argument);
}

TEST_CASE("doubles are rendered with full round-trip precision") {
  for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 2.874180e-3, 6.02214076e23, 1e-300}) {
    std::string text = io::format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("json files are written with stable key order and a trailing newline") {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "polq_io_test";
  std::filesystem::create_directories(dir);
  std::filesystem::path path = dir / "doc.json";

  ordered_json doc;
  doc["zeta"] = 1;
  doc["alpha"] = {{"nested", true}};
  io::write_json_file(path, doc);

  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find("\"zeta\"") < content.find("\"alpha\""));
  CHECK(content.back() == '\n');
  CHECK(content.find('\r') == std::string::npos);

  CHECK(io::read_json_file(path) == doc);
  CHECK_THROWS_AS(io::read_json_file(dir / "missing.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
