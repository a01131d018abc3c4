#include "difftest/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "difftest/errors.hpp"

namespace difftest {

namespace {

using nlohmann::json;

const std::set<std::string> kExperimentKeys = {
    "model",     "theta0",    "x0",         "n",           "h",       "phis",       "replications", "alpha",
    "seed",      "substeps",  "burn_in",    "threshold",   "shift_mask", "max_retries", "profile",  "alternative"};

template <class T>
T get_as(const json& obj, const std::string& key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

ExperimentConfig parse_experiment(const json& obj) {
  if (!obj.is_object()) throw ConfigError("each experiment must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!kExperimentKeys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (!obj.contains("model")) throw ConfigError("config key 'model' is required");

  const auto builtin = make_builtin_model(get_as<std::string>(obj, "model"));
  ExperimentConfig config = ExperimentConfig::for_builtin(builtin.model.name());

  if (obj.contains("theta0")) {
    const auto theta = get_as<std::vector<double>>(obj, "theta0");
    if (theta.size() != builtin.model.param_count()) {
      throw ConfigError("theta0 needs " + std::to_string(builtin.model.param_count()) + " values");
    }
    config.theta0 = ParamVector::from_theta(theta, builtin.model.drift_params());
  }
  if (obj.contains("x0")) config.x0 = get_as<std::vector<double>>(obj, "x0");
  if (obj.contains("n")) {
    const auto& n = obj.at("n");
    config.n_list = n.is_array() ? get_as<std::vector<std::size_t>>(obj, "n")
                                 : std::vector<std::size_t>{get_as<std::size_t>(obj, "n")};
  }
  if (obj.contains("h")) config.h_grid = get_as<std::vector<double>>(obj, "h");
  if (obj.contains("phis")) {
    config.phis.clear();
    for (const auto& name : get_as<std::vector<std::string>>(obj, "phis")) config.phis.push_back(PhiFunction::parse(name));
  }
  if (obj.contains("profile")) {
    const auto profile = get_as<std::string>(obj, "profile");
    if (profile == "fast") {
      config.replications = 200;
    } else if (profile != "full") {
      throw ConfigError("profile must be 'full' or 'fast'");
    }
  }
  if (obj.contains("replications")) config.replications = get_as<std::size_t>(obj, "replications");
  if (obj.contains("alpha")) config.alpha_level = get_as<double>(obj, "alpha");
  if (obj.contains("seed")) config.master_seed = get_as<std::uint64_t>(obj, "seed");
  if (obj.contains("substeps")) config.substeps = get_as<std::size_t>(obj, "substeps");
  if (obj.contains("burn_in")) config.burn_in = get_as<std::size_t>(obj, "burn_in");
  if (obj.contains("threshold")) config.threshold_mode = parse_threshold_mode(get_as<std::string>(obj, "threshold"));
  if (obj.contains("alternative")) config.alternative = parse_alternative_mode(get_as<std::string>(obj, "alternative"));
  if (obj.contains("shift_mask")) config.shift_mask = get_as<std::vector<bool>>(obj, "shift_mask");
  if (obj.contains("max_retries")) config.max_retries = get_as<std::size_t>(obj, "max_retries");

  config.validate(builtin.model);
  return config;
}

}  // namespace

std::vector<ExperimentConfig> parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<ExperimentConfig> out;
  if (doc.is_object() && doc.contains("experiments")) {
    if (doc.size() != 1) throw ConfigError("a config with 'experiments' must not have other top-level keys");
    const auto& list = doc.at("experiments");
    if (!list.is_array() || list.empty()) throw ConfigError("'experiments' must be a non-empty array");
    for (const auto& e : list) out.push_back(parse_experiment(e));
  } else {
    out.push_back(parse_experiment(doc));
  }
  return out;
}

std::vector<ExperimentConfig> load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + cell + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

}  // namespace difftest
