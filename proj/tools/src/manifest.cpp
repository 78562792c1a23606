#include "manifest.hpp"

#include <fstream>
#include <vector>

#include "dta/error.hpp"
#include "dta/export.hpp"

namespace dta::cli {

namespace fs = std::filesystem;

std::string tool_version() { return DTA_VERSION; }

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "dta";
  j["version"] = m.version;
  j["config"] = to_json(m.config);
  j["inputs"] = m.inputs;
  j["artifacts"] = m.artifacts;
  j["metrics"] = m.metrics;
  if (!m.extra.is_null()) j["details"] = m.extra;
  j["duration_seconds"] = m.duration_seconds;
  return j;
}

void write_manifest(const RunManifest& manifest, const fs::path& dir) {
  const fs::path path = dir / manifest_name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(manifest).dump(2) << '\n';
}

std::map<std::string, std::string> checksum_tree(const fs::path& dir) {
  std::map<std::string, std::string> sums;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file() || it->path().filename() == manifest_name) continue;
    sums[fs::relative(it->path(), dir).generic_string()] = sha256_file(it->path());
  }
  if (ec) throw IoError("cannot walk " + dir.string() + ": " + ec.message());
  return sums;
}

std::string dataset_digest(const DatasetManifest& manifest) {
  std::map<std::string, std::string> sums;
  auto add = [&](const fs::path& relative) { sums[relative.generic_string()] = sha256_file(manifest.resolve(relative)); };
  for (const auto& p : manifest.train) add(p);
  for (const auto& [type, entries] : manifest.test) {
    for (const TestEntry& e : entries) {
      add(e.image);
      if (e.mask) add(*e.mask);
    }
  }
  std::string listing;
  for (const auto& [path, sum] : sums) listing += sum + "  " + path + "\n";
  return sha256_hex(std::vector<std::uint8_t>(listing.begin(), listing.end()));
}

}  // namespace dta::cli
