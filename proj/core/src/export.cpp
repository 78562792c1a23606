#include "dta/export.hpp"

#include <fstream>

#include <json.hpp>

#include "dta/error.hpp"
#include "dta/pnm.hpp"

namespace dta {

std::string to_json(const ScoreSidecar& sidecar, int indent) {
  nlohmann::ordered_json j;
  j["provenance"] = to_string(sidecar.provenance);
  j["weight"] = sidecar.weight;
  j["schedule"] = sidecar.schedule;
  j["beta_star"] = sidecar.beta_star ? nlohmann::ordered_json(*sidecar.beta_star) : nlohmann::ordered_json(nullptr);
  j["seed"] = sidecar.seed;
  j["source"] = sidecar.source;
  if (sidecar.raw_min && sidecar.raw_max) j["raw_range"] = {*sidecar.raw_min, *sidecar.raw_max};
  j["encoding"] = "16-bit PGM, value = code / 65535";
  return j.dump(indent);
}

void write_score_map(const ScoreMap& map, const ScoreSidecar& sidecar, const std::filesystem::path& path) {
  if (map.values.channels() != 1) throw FormatError("score maps must have one channel");
  write_image(map.values, path, BitDepth::k16);
  std::filesystem::path json_path = path;
  json_path.replace_extension(".json");
  std::ofstream out(json_path);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << to_json(sidecar) << '\n';
}

Image read_score_map(const std::filesystem::path& path) { return read_image(path); }

}  // namespace dta
