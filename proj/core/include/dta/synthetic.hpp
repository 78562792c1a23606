#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "dta/dataset.hpp"
#include "dta/image.hpp"
#include "dta/rng.hpp"

namespace dta {

enum class DefectType { dent, particle, scratch };

inline constexpr std::array<DefectType, 3> all_defect_types{DefectType::dent, DefectType::particle,
                                                            DefectType::scratch};

std::string to_string(DefectType type);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Background: mean + contrast/2 * tanh(s * sin(2*pi*u/period + phase)) / tanh(s),
/// u = x cos(theta) + y sin(theta), phase drawn per image.
struct GratingParams {
  double period = 8.0;
  double orientation_deg = 0.0;
  double contrast = 0.5;
  double sharpness = 3.0;
  double mean = 0.5;
};

/// `size` is the radius (dent, particle) or length (scratch) in pixels.
/// `amplitude` > 0 pulls pixels toward 1, < 0 toward 0, scaled by coverage.
struct DefectRecipe {
  Range size;
  Range amplitude;
  Range half_width{0.5, 0.5};  // scratch only
};

struct SyntheticSpec {
  std::string category = "grating";
  Geometry geometry{64, 64, 1};
  GratingParams grating;
  DefectRecipe dent{{4.0, 7.0}, {-0.7, -0.5}};
  DefectRecipe particle{{2.0, 4.0}, {0.55, 0.8}};
  DefectRecipe scratch{{10.0, 16.0}, {0.55, 0.8}, {0.6, 1.0}};
  std::size_t train_count = 256;
  std::size_t test_per_defect = 20;
  std::size_t test_good = 0;
  std::uint64_t seed = 7;

  /// Throws ConfigError: counts >= 1, defect extents in [1, side/4].
  void validate() const;
  const DefectRecipe& recipe(DefectType type) const;
};

/// A concrete defect instance.
struct DefectShape {
  DefectType type = DefectType::particle;
  double center_y = 0.0;
  double center_x = 0.0;
  double size = 1.0;       // radius, or length for scratches
  double amplitude = 0.0;
  double angle = 0.0;      // scratch direction, radians
  double half_width = 0.5; // scratch only
};

/// Coverage in [0,1] of `shape` at pixel (y, x); zero outside the support.
double defect_coverage(const DefectShape& shape, double y, double x);

/// Applies the defect in place and sets mask = 1 wherever coverage > 0.
void inject_defect(Image& image, Image& mask, const DefectShape& shape);

/// Normal grating drawn from `engine`.
Image make_normal(const SyntheticSpec& spec, Engine& engine);

struct SyntheticSample {
  Image normal;
  Image defect;
  Image mask;
  DefectShape shape;
};

Image make_train_image(const SyntheticSpec& spec, std::size_t index);
SyntheticSample make_defect_sample(const SyntheticSpec& spec, DefectType type, std::size_t index);
Image make_good_test_image(const SyntheticSpec& spec, std::size_t index);

/// Writes <out>/<category>/{train/good,test/<type>,ground_truth/<type>} plus
/// <out>/manifest.json. Byte-identical across runs for fixed parameters.
DatasetManifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out);

std::string to_json(const SyntheticSpec& spec, int indent = 2);

}  // namespace dta
