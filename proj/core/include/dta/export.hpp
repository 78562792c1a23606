#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dta/image.hpp"
#include "dta/trend.hpp"

namespace dta {

/// Run parameters recorded next to every exported score map.
struct ScoreSidecar {
  ScoreKind provenance = ScoreKind::proposed;
  double weight = 1.0;
  std::vector<double> schedule;
  std::optional<double> beta_star;
  std::uint64_t seed = 0;
  std::string source;
  /// Range of the raw (pre-normalization) map, so raw = min + score * (max - min).
  std::optional<double> raw_min;
  std::optional<double> raw_max;
};

/// 16-bit PGM (value * 65535) at `path`, sidecar JSON at path with ".json".
void write_score_map(const ScoreMap& map, const ScoreSidecar& sidecar, const std::filesystem::path& path);
Image read_score_map(const std::filesystem::path& path);
std::string to_json(const ScoreSidecar& sidecar, int indent = 2);

/// Lowercase hex SHA-256 of a byte buffer or file.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dta
