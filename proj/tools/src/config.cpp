#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "dta/error.hpp"

namespace dta::cli {
namespace {

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <class T>
Setter field(T RunConfig::*member) {
  return [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); };
}

Setter path_field(std::filesystem::path RunConfig::*member) {
  return [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<std::string>(); };
}

template <class T>
Setter optional_field(std::optional<T> RunConfig::*member) {
  return [member](RunConfig& c, const nlohmann::json& v) {
    if (v.is_null()) {
      (c.*member).reset();
    } else {
      c.*member = v.get<T>();
    }
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"command", field(&RunConfig::command)},
      {"dataset", path_field(&RunConfig::dataset)},
      {"model", path_field(&RunConfig::model)},
      {"out", path_field(&RunConfig::out)},
      {"scores", path_field(&RunConfig::scores)},
      {"input", path_field(&RunConfig::input)},
      {"reference", path_field(&RunConfig::reference)},
      {"category", field(&RunConfig::category)},
      {"seed", optional_field(&RunConfig::seed)},
      {"beta_max", field(&RunConfig::beta_max)},
      {"levels", field(&RunConfig::levels)},
      {"weight", field(&RunConfig::weight)},
      {"beta_star", optional_field(&RunConfig::beta_star)},
      {"precision", [](RunConfig& c, const nlohmann::json& v) { c.precision = parse_precision(v.get<std::string>()); }},
      {"steps", field(&RunConfig::steps)},
      {"batch_size", field(&RunConfig::batch_size)},
      {"learning_rate", field(&RunConfig::learning_rate)},
      {"train_beta_max", field(&RunConfig::train_beta_max)},
      {"size", field(&RunConfig::size)},
      {"train_count", field(&RunConfig::train_count)},
      {"test_per_defect", field(&RunConfig::test_per_defect)},
      {"test_good", field(&RunConfig::test_good)},
      {"threads", field(&RunConfig::threads)},
  };
  return table;
}

}  // namespace

NoiseSchedule RunConfig::schedule() const { return NoiseSchedule::linear(beta_max, levels); }

double RunConfig::resolved_beta_star() const { return beta_star.value_or(beta_max / 2.0); }

std::uint64_t RunConfig::master_seed() const {
  if (!seed) throw ConfigError("--seed is required");
  return *seed;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  if (!category.empty()) spec.category = category;
  spec.geometry = Geometry{size, size, 1};
  spec.train_count = train_count;
  spec.test_per_defect = test_per_defect;
  spec.test_good = test_good;
  spec.seed = master_seed();
  return spec;
}

TrainingConfig RunConfig::training_config() const {
  TrainingConfig t;
  t.steps = steps;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.beta_min = 0.0;
  t.beta_max = train_beta_max;
  t.seed = master_seed();
  return t;
}

std::size_t RunConfig::worker_count() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void RunConfig::validate() const {
  if (command == "synth" || command == "train" || command == "detect") master_seed();
  auto need = [&](const std::filesystem::path& p, const char* flag) {
    if (p.empty()) throw ConfigError(std::string(flag) + " is required for " + command);
  };
  if (command == "synth") {
    need(out, "--out");
    synthetic_spec().validate();
  } else if (command == "train") {
    need(dataset, "--dataset");
    need(out, "--out");
    training_config().validate();
  } else if (command == "detect") {
    need(dataset, "--dataset");
    need(model, "--model");
    need(out, "--out");
    schedule();
    if (!(weight >= 0.0)) throw ConfigError("--weight must be >= 0");
    if (!(resolved_beta_star() >= 0.0)) throw ConfigError("--beta-star must be >= 0");
  } else if (command == "evaluate") {
    need(dataset, "--dataset");
    need(scores, "--scores");
    need(out, "--out");
  } else if (command == "report") {
    need(input, "--input");
  }
}

void apply_json(RunConfig& config, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key \"" + key + "\"");
    try {
      it->second(config, value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key \"" + key + "\": " + e.what());
    }
  }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_json(base, j);
  return base;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["dataset"] = c.dataset.string();
  j["model"] = c.model.string();
  j["out"] = c.out.string();
  j["scores"] = c.scores.string();
  j["input"] = c.input.string();
  j["reference"] = c.reference.string();
  j["category"] = c.category;
  j["seed"] = opt(c.seed);
  j["beta_max"] = c.beta_max;
  j["levels"] = c.levels;
  j["weight"] = c.weight;
  j["beta_star"] = opt(c.beta_star);
  j["precision"] = to_string(c.precision);
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["train_beta_max"] = c.train_beta_max;
  j["size"] = c.size;
  j["train_count"] = c.train_count;
  j["test_per_defect"] = c.test_per_defect;
  j["test_good"] = c.test_good;
  j["threads"] = c.threads;
  return j;
}

}  // namespace dta::cli
