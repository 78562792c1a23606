#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "dta/dataset.hpp"

namespace dta::cli {

inline constexpr const char* manifest_name = "run_manifest.json";

/// Everything needed to re-execute a run and verify its outputs.
struct RunManifest {
  RunConfig config;
  std::map<std::string, std::string> inputs;     // role -> sha256
  std::map<std::string, std::string> artifacts;  // path relative to config.out -> sha256
  nlohmann::ordered_json metrics;                // null when the command has none
  nlohmann::ordered_json extra;                  // command-specific details
  std::string version;
  double duration_seconds = 0.0;
};

nlohmann::ordered_json to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

/// sha256 of every regular file under `dir` except run manifests, keyed by
/// generic relative path.
std::map<std::string, std::string> checksum_tree(const std::filesystem::path& dir);

/// One digest over the sorted (path, sha256) list of all dataset files.
std::string dataset_digest(const DatasetManifest& manifest);

std::string tool_version();

}  // namespace dta::cli
