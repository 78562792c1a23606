#include "dta/dataset.hpp"

#include <algorithm>
#include <system_error>

#include <json.hpp>

#include "dta/error.hpp"
#include "dta/pnm.hpp"

namespace fs = std::filesystem;

namespace dta {

std::vector<std::string> DatasetManifest::defect_types() const {
  std::vector<std::string> out;
  for (const auto& [name, entries] : test) {
    if (name != "good") out.push_back(name);
  }
  return out;
}

std::size_t DatasetManifest::test_count() const {
  std::size_t n = 0;
  for (const auto& [name, entries] : test) n += entries.size();
  return n;
}

namespace {

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".png";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  if (ec) throw LayoutError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> list_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory()) out.push_back(entry.path());
  }
  if (ec) throw LayoutError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<fs::path> find_mask(const fs::path& gt_dir, const fs::path& image) {
  for (const char* ext : {".pgm", ".ppm", ".pnm", ".png"}) {
    fs::path candidate = gt_dir / (image.stem().string() + "_mask" + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

Geometry header_geometry(const fs::path& path) {
  try {
    return read_image_header(path).geometry;
  } catch (const DecodeError& e) {
    throw LayoutError(path.string() + ": " + e.what());
  }
}

}  // namespace

DatasetManifest load_dataset(const fs::path& root, const std::string& category) {
  if (!fs::is_directory(root)) throw LayoutError("dataset root " + root.string() + " is not a directory");

  fs::path category_dir;
  DatasetManifest manifest;
  if (!category.empty()) {
    category_dir = root / category;
    manifest.root = root;
  } else if (fs::is_directory(root / "train")) {
    category_dir = root;
    manifest.root = root.has_parent_path() ? root.parent_path() : fs::path(".");
  } else {
    std::vector<fs::path> candidates;
    for (const auto& d : list_dirs(root)) {
      if (fs::is_directory(d / "train")) candidates.push_back(d);
    }
    if (candidates.size() != 1) {
      throw LayoutError("dataset root " + root.string() + " holds " + std::to_string(candidates.size()) +
                        " categories; select one explicitly");
    }
    category_dir = candidates.front();
    manifest.root = root;
  }
  manifest.category = category_dir.filename().string();
  if (manifest.category.empty()) manifest.category = category_dir.parent_path().filename().string();

  const fs::path train_dir = category_dir / "train" / "good";
  if (!fs::is_directory(train_dir)) throw LayoutError("missing directory " + train_dir.string());
  const auto train = list_images(train_dir);
  if (train.empty()) throw LayoutError("no training images in " + train_dir.string());

  manifest.geometry = header_geometry(train.front());
  auto check = [&](const fs::path& p) {
    const Geometry g = header_geometry(p);
    if (g != manifest.geometry) {
      throw LayoutError(p.string() + ": geometry " + g.to_string() + " differs from " + manifest.geometry.to_string());
    }
  };
  for (const auto& p : train) {
    check(p);
    manifest.train.push_back(fs::relative(p, manifest.root));
  }

  const fs::path test_dir = category_dir / "test";
  if (!fs::is_directory(test_dir)) throw LayoutError("missing directory " + test_dir.string());
  for (const auto& group_dir : list_dirs(test_dir)) {
    const std::string type = group_dir.filename().string();
    auto& entries = manifest.test[type];
    for (const auto& image : list_images(group_dir)) {
      check(image);
      TestEntry entry{fs::relative(image, manifest.root), std::nullopt};
      if (type != "good") {
        const auto mask = find_mask(category_dir / "ground_truth" / type, image);
        if (!mask) throw LayoutError("missing ground-truth mask for " + image.string());
        const Geometry g = header_geometry(*mask);
        if (g.height != manifest.geometry.height || g.width != manifest.geometry.width) {
          throw LayoutError(mask->string() + ": mask geometry " + g.to_string() + " does not match image");
        }
        entry.mask = fs::relative(*mask, manifest.root);
      }
      entries.push_back(std::move(entry));
    }
  }
  return manifest;
}

std::vector<Image> load_train_images(const DatasetManifest& manifest) {
  std::vector<Image> out;
  out.reserve(manifest.train.size());
  for (const auto& p : manifest.train) out.push_back(read_image(manifest.resolve(p)));
  return out;
}

Image load_mask(const DatasetManifest& manifest, const TestEntry& entry) {
  Image mask(manifest.geometry.height, manifest.geometry.width, 1);
  if (!entry.mask) return mask;
  const Image raw = channel_mean(read_image(manifest.resolve(*entry.mask)));
  if (raw.geometry() != mask.geometry()) throw LayoutError("mask geometry mismatch for " + entry.mask->string());
  for (std::size_t i = 0; i < raw.size(); ++i) mask.data()[i] = raw.data()[i] > 0.5 ? 1.0 : 0.0;
  return mask;
}

std::string to_json(const DatasetManifest& manifest, int indent) {
  nlohmann::ordered_json j;
  j["category"] = manifest.category;
  j["geometry"] = {{"height", manifest.geometry.height},
                   {"width", manifest.geometry.width},
                   {"channels", manifest.geometry.channels}};
  if (manifest.seed) j["seed"] = *manifest.seed;
  j["counts"]["train"] = manifest.train.size();
  for (const auto& [type, entries] : manifest.test) j["counts"]["test"][type] = entries.size();
  j["train"] = nlohmann::ordered_json::array();
  for (const auto& p : manifest.train) j["train"].push_back(p.generic_string());
  j["test"] = nlohmann::ordered_json::object();
  for (const auto& [type, entries] : manifest.test) {
    auto& group = j["test"][type];
    group = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      nlohmann::ordered_json item{{"image", e.image.generic_string()}};
      item["mask"] = e.mask ? nlohmann::ordered_json(e.mask->generic_string()) : nlohmann::ordered_json(nullptr);
      group.push_back(std::move(item));
    }
  }
  return j.dump(indent);
}

}  // namespace dta
