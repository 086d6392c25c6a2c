#include "polq/config.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <initializer_list>

namespace polq::config {

namespace {

using io::ordered_json;

void require_object(const ordered_json& value, const std::string& where) {
  if (!value.is_object()) {
    throw ConfigError(where + ": expected a JSON object");
  }
}

void reject_unknown_keys(const ordered_json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* name) { return key == name; });
    if (!known) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

bool fetch_int(const ordered_json& obj, const std::string& where, const char* key,
               long long& out) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return false;
  }
  if (!it->is_number_integer()) {
    throw ConfigError(where + "." + key + ": expected an integer");
  }
  out = it->get<long long>();
  return true;
}

bool fetch_double(const ordered_json& obj, const std::string& where, const char* key,
                  double& out) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return false;
  }
  if (!it->is_number()) {
    throw ConfigError(where + "." + key + ": expected a number");
  }
  out = it->get<double>();
  return true;
}

bool fetch_string(const ordered_json& obj, const std::string& where, const char* key,
                  std::string& out) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return false;
  }
  if (!it->is_string()) {
    throw ConfigError(where + "." + key + ": expected a string");
  }
  out = it->get<std::string>();
  return true;
}

int narrow_int(long long value, const std::string& what) {
  if (value < INT_MIN || value > INT_MAX) {
    throw ConfigError(what + ": value out of range");
  }
  return static_cast<int>(value);
}

std::vector<int> fetch_int_array(const ordered_json& obj, const std::string& where,
                                 const char* key) {
  std::vector<int> out;
  auto it = obj.find(key);
  if (it == obj.end()) {
    return out;
  }
  if (!it->is_array()) {
    throw ConfigError(where + "." + key + ": expected an array of integers");
  }
  for (const auto& entry : *it) {
    if (!entry.is_number_integer()) {
      throw ConfigError(where + "." + key + ": expected an array of integers");
    }
    out.push_back(narrow_int(entry.get<long long>(), where + "." + key));
  }
  return out;
}

std::vector<double> fetch_double_array(const ordered_json& obj, const std::string& where,
                                       const char* key) {
  std::vector<double> out;
  auto it = obj.find(key);
  if (it == obj.end()) {
    return out;
  }
  if (!it->is_array()) {
    throw ConfigError(where + "." + key + ": expected an array of numbers");
  }
  for (const auto& entry : *it) {
    if (!entry.is_number()) {
      throw ConfigError(where + "." + key + ": expected an array of numbers");
    }
    out.push_back(entry.get<double>());
  }
  return out;
}

models::ModelParams parse_model(const ordered_json& obj) {
  require_object(obj, "model");
  reject_unknown_keys(obj, "model",
                      {"n_sites", "j_star", "delta", "g", "omega", "phonon_cutoff"});
  models::ModelParams model;
  long long n = 0;
  if (fetch_int(obj, "model", "n_sites", n)) {
    model.n_sites = narrow_int(n, "model.n_sites");
  }
  fetch_double(obj, "model", "j_star", model.j_star);
  fetch_double(obj, "model", "delta", model.delta);
  fetch_double(obj, "model", "g", model.g);
  fetch_double(obj, "model", "omega", model.omega);
  if (fetch_int(obj, "model", "phonon_cutoff", n)) {
    model.phonon_cutoff = narrow_int(n, "model.phonon_cutoff");
  }
  return model;
}

dynamics::TimeGrid parse_grid(const ordered_json& obj) {
  require_object(obj, "grid");
  reject_unknown_keys(obj, "grid", {"t_start", "t_end", "n_steps", "sample_stride"});
  dynamics::TimeGrid grid;
  fetch_double(obj, "grid", "t_start", grid.t_start);
  fetch_double(obj, "grid", "t_end", grid.t_end);
  long long n = 0;
  if (fetch_int(obj, "grid", "n_steps", n)) {
    grid.n_steps = narrow_int(n, "grid.n_steps");
  }
  if (fetch_int(obj, "grid", "sample_stride", n)) {
    grid.sample_stride = narrow_int(n, "grid.sample_stride");
  }
  return grid;
}

SweepSpec parse_sweep(const ordered_json& obj) {
  require_object(obj, "sweep");
  reject_unknown_keys(obj, "sweep", {"g_values", "j_star_values", "cutoffs", "budget"});
  SweepSpec sweep;
  sweep.g_values = fetch_double_array(obj, "sweep", "g_values");
  sweep.j_star_values = fetch_double_array(obj, "sweep", "j_star_values");
  sweep.cutoffs = fetch_int_array(obj, "sweep", "cutoffs");
  long long n = 0;
  if (fetch_int(obj, "sweep", "budget", n)) {
    sweep.budget = narrow_int(n, "sweep.budget");
  }
  return sweep;
}

}  // namespace

RunConfig RunConfig::from_json(const io::ordered_json& doc) {
  require_object(doc, "config");
  reject_unknown_keys(doc, "config",
                      {"schema_version", "experiment", "model", "grid", "cutoff_ladder",
                       "sweep", "seed", "output_dir", "parallelism", "_meta"});

  RunConfig cfg;
  long long n = 0;
  if (!fetch_int(doc, "config", "schema_version", n)) {
    throw ConfigError("config.schema_version: missing required key");
  }
  cfg.schema_version = narrow_int(n, "config.schema_version");

  if (!fetch_string(doc, "config", "experiment", cfg.experiment)) {
    throw ConfigError("config.experiment: missing required key");
  }

  auto model_it = doc.find("model");
  if (model_it == doc.end()) {
    throw ConfigError("config.model: missing required key");
  }
  cfg.model = parse_model(*model_it);

  if (auto it = doc.find("grid"); it != doc.end()) {
    cfg.grid = parse_grid(*it);
    cfg.has_grid = true;
  }

  cfg.cutoff_ladder = fetch_int_array(doc, "config", "cutoff_ladder");

  if (auto it = doc.find("sweep"); it != doc.end()) {
    cfg.sweep = parse_sweep(*it);
    cfg.has_sweep = true;
  }

  if (fetch_int(doc, "config", "seed", n)) {
    cfg.seed = static_cast<long>(n);
  }

  std::string dir;
  if (fetch_string(doc, "config", "output_dir", dir)) {
    cfg.output_dir = dir;
  }

  if (fetch_int(doc, "config", "parallelism", n)) {
    cfg.parallelism = narrow_int(n, "config.parallelism");
  }

  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  io::ordered_json doc;
  try {
    doc = io::read_json_file(path);
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config file: ") + err.what());
  }
  return from_json(doc);
}

io::ordered_json RunConfig::to_json() const {
  io::ordered_json doc;
  doc["schema_version"] = schema_version;
  doc["experiment"] = experiment;
  doc["model"] = {{"n_sites", model.n_sites},     {"j_star", model.j_star},
                  {"delta", model.delta},         {"g", model.g},
                  {"omega", model.omega},         {"phonon_cutoff", model.phonon_cutoff}};
  if (has_grid) {
    doc["grid"] = {{"t_start", grid.t_start},
                   {"t_end", grid.t_end},
                   {"n_steps", grid.n_steps},
                   {"sample_stride", grid.sample_stride}};
  }
  if (!cutoff_ladder.empty()) {
    doc["cutoff_ladder"] = cutoff_ladder;
  }
  if (has_sweep) {
    io::ordered_json block;
    block["g_values"] = sweep.g_values;
    if (!sweep.j_star_values.empty()) {
      block["j_star_values"] = sweep.j_star_values;
    }
    block["cutoffs"] = sweep.cutoffs;
    block["budget"] = sweep.budget;
    doc["sweep"] = block;
  }
  doc["seed"] = seed;
  doc["output_dir"] = output_dir.generic_string();
  doc["parallelism"] = parallelism;
  return doc;
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion) +
                      ", got " + std::to_string(schema_version));
  }

  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("config.experiment: unknown experiment \"" + experiment + "\"");
  }

  try {
    model.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config.model: ") + err.what());
  }

  if (parallelism < 1 || parallelism > 256) {
    throw ConfigError("config.parallelism: must be between 1 and 256");
  }
  if (output_dir.empty()) {
    throw ConfigError("config.output_dir: must not be empty");
  }

  auto require_grid = [&] {
    if (!has_grid) {
      throw ConfigError("config.grid: required for experiment \"" + experiment + "\"");
    }
    try {
      grid.validate();
    } catch (const std::exception& err) {
      throw ConfigError(std::string("config.grid: ") + err.what());
    }
  };
  auto require_ladder = [&] {
    if (cutoff_ladder.empty()) {
      throw ConfigError("config.cutoff_ladder: required for experiment \"" + experiment +
                        "\"");
    }
    for (std::size_t i = 0; i < cutoff_ladder.size(); ++i) {
      if (cutoff_ladder[i] < 1) {
        throw ConfigError("config.cutoff_ladder: entries must be >= 1");
      }
      if (i > 0 && cutoff_ladder[i] <= cutoff_ladder[i - 1]) {
        throw ConfigError("config.cutoff_ladder: entries must be strictly increasing");
      }
    }
  };
  auto require_phonons = [&] {
    if (model.phonon_cutoff < 1) {
      throw ConfigError("config.model.phonon_cutoff: must be >= 1 for experiment \"" +
                        experiment + "\"");
    }
  };
  auto require_dense_composite = [&](int cutoff) {
    double log2_dim = model.n_sites * std::log2(2.0 * (cutoff + 1));
    if (log2_dim > 12.0 + 1e-12) {
      throw ConfigError("config.model: composite space too large for exact evolution "
                        "(2^" + std::to_string(model.n_sites) + " * " +
                        std::to_string(cutoff + 1) + "^" + std::to_string(model.n_sites) +
                        " > 4096)");
    }
  };

  if (experiment == "verify-identities") {
    if (model.n_sites > 12) {
      throw ConfigError("config.model.n_sites: identity checks support at most 12 sites");
    }
  } else if (experiment == "verify-split") {
    require_ladder();
    require_dense_composite(cutoff_ladder.back());
  } else if (experiment == "verify-h2") {
    require_ladder();
  } else if (experiment == "verify-h3") {
    require_phonons();
  } else if (experiment == "markovian-run") {
    require_grid();
    if (model.n_sites > 6) {
      throw ConfigError("config.model.n_sites: eigenbasis labeling supports at most 6 sites");
    }
  } else if (experiment == "exact-vs-markovian") {
    require_grid();
    require_phonons();
    require_dense_composite(model.phonon_cutoff);
  } else if (experiment == "two-qubit-demo") {
    require_grid();
    require_phonons();
    if (model.n_sites != 2) {
      throw ConfigError("config.model.n_sites: two-qubit-demo requires exactly 2 sites");
    }
  } else if (experiment == "sweep") {
    if (!has_sweep) {
      throw ConfigError("config.sweep: required for experiment \"sweep\"");
    }
    if (sweep.g_values.empty()) {
      throw ConfigError("config.sweep.g_values: must not be empty");
    }
    for (double g : sweep.g_values) {
      if (!std::isfinite(g) || g <= 0.0) {
        throw ConfigError("config.sweep.g_values: entries must be finite and > 0");
      }
    }
    for (double j : sweep.j_star_values) {
      if (!std::isfinite(j)) {
        throw ConfigError("config.sweep.j_star_values: entries must be finite");
      }
    }
    if (sweep.cutoffs.empty()) {
      throw ConfigError("config.sweep.cutoffs: must not be empty");
    }
    for (int m : sweep.cutoffs) {
      if (m < 1) {
        throw ConfigError("config.sweep.cutoffs: entries must be >= 1");
      }
    }
    require_dense_composite(*std::max_element(sweep.cutoffs.begin(), sweep.cutoffs.end()));
    if (sweep.budget < 1) {
      throw ConfigError("config.sweep.budget: must be >= 1");
    }
    std::size_t n_jstar = sweep.j_star_values.empty() ? 1 : sweep.j_star_values.size();
    std::size_t points = sweep.g_values.size() * n_jstar * sweep.cutoffs.size();
    if (points > static_cast<std::size_t>(sweep.budget)) {
      throw ConfigError("config.sweep: " + std::to_string(points) +
                        " points exceed budget " + std::to_string(sweep.budget));
    }
  }
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "verify-identities", "verify-split",  "verify-h2",         "verify-h3",
      "markovian-run",     "exact-vs-markovian", "two-qubit-demo", "sweep"};
  return names;
}

bool experiment_matches_verb(const std::string& experiment, const std::string& verb) {
  if (verb == "verify") {
    return experiment.rfind("verify-", 0) == 0;
  }
  if (verb == "run") {
    return experiment == "markovian-run" || experiment == "exact-vs-markovian" ||
           experiment == "two-qubit-demo";
  }
  if (verb == "sweep") {
    return experiment == "sweep";
  }
  return false;
}

}  // namespace polq::config
