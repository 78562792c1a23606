#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dta/image.hpp"

namespace dta {

struct TestEntry {
  std::filesystem::path image;               // relative to DatasetManifest::root
  std::optional<std::filesystem::path> mask;  // absent for "good" images
};

/// One category laid out MVTEC-style:
///
///   <root>/<category>/train/good/*.pgm
///   <root>/<category>/test/<type>/*.pgm
///   <root>/<category>/ground_truth/<type>/<stem>_mask.pgm
struct DatasetManifest {
  std::string category;
  std::filesystem::path root;
  Geometry geometry;
  std::vector<std::filesystem::path> train;
  std::map<std::string, std::vector<TestEntry>> test;
  std::optional<std::uint64_t> seed;  // set for generated datasets

  /// Test groups that carry masks, i.e. everything but "good".
  std::vector<std::string> defect_types() const;
  std::size_t test_count() const;
  std::filesystem::path resolve(const std::filesystem::path& relative) const { return root / relative; }
};

/// Walks the directory convention above. `root` may hold several categories
/// (then `category` selects one) or be a category directory itself.
/// Throws LayoutError for missing masks, empty train sets or mixed geometry.
DatasetManifest load_dataset(const std::filesystem::path& root, const std::string& category = "");

std::vector<Image> load_train_images(const DatasetManifest& manifest);

/// Binary mask (1 = anomalous) for a test entry; all zeros when it has none.
Image load_mask(const DatasetManifest& manifest, const TestEntry& entry);

/// JSON with paths relative to root, geometry, counts and seed.
std::string to_json(const DatasetManifest& manifest, int indent = 2);

}  // namespace dta
