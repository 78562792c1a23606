#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dta/denoiser.hpp"
#include "dta/sweep.hpp"
#include "dta/synthetic.hpp"

namespace dta::cli {

/// Resolved parameters of one invocation. JSON keys are the long flag names
/// with '-' replaced by '_', so a manifest's "config" block can be fed back
/// through --config.
struct RunConfig {
  std::string command;
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path out;
  std::filesystem::path scores;
  std::filesystem::path input;
  std::filesystem::path reference;
  std::string category;
  std::optional<std::uint64_t> seed;

  // Sweep and fusion.
  double beta_max = 0.4;
  std::size_t levels = 16;
  double weight = 1.0;
  std::optional<double> beta_star;  // defaults to beta_max / 2

  // Training.
  Precision precision = Precision::f64;
  std::size_t steps = 2000;
  std::size_t batch_size = 4;
  double learning_rate = 0.5;
  double train_beta_max = 0.5;

  // Synthetic benchmark.
  std::size_t size = 64;
  std::size_t train_count = 256;
  std::size_t test_per_defect = 20;
  std::size_t test_good = 0;

  std::size_t threads = 0;  // 0 = hardware concurrency

  NoiseSchedule schedule() const;
  double resolved_beta_star() const;
  std::uint64_t master_seed() const;
  SyntheticSpec synthetic_spec() const;
  TrainingConfig training_config() const;
  std::size_t worker_count() const;

  /// Checks the parameters the current command consumes.
  void validate() const;
};

/// Overwrites fields named in `j`. Unknown keys and wrong types are ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& j);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace dta::cli
