#include "dta/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "dta/error.hpp"
#include "dta/pnm.hpp"

namespace fs = std::filesystem;

namespace dta {

std::string to_string(DefectType type) {
  switch (type) {
    case DefectType::dent: return "dent";
    case DefectType::particle: return "particle";
    case DefectType::scratch: return "scratch";
  }
  return "unknown";
}

const DefectRecipe& SyntheticSpec::recipe(DefectType type) const {
  switch (type) {
    case DefectType::dent: return dent;
    case DefectType::particle: return particle;
    case DefectType::scratch: return scratch;
  }
  return particle;
}

void SyntheticSpec::validate() const {
  validate_geometry(geometry);
  if (geometry.channels != 1 && geometry.channels != 3) throw ConfigError("synthetic: channels must be 1 or 3");
  if (geometry.height < 8 || geometry.width < 8) throw ConfigError("synthetic: image sides must be >= 8");
  if (train_count == 0 || test_per_defect == 0) throw ConfigError("synthetic: counts must be >= 1");
  if (!(grating.period > 0.0)) throw ConfigError("synthetic: grating period must be > 0");
  const double side = static_cast<double>(std::min(geometry.height, geometry.width));
  for (DefectType type : all_defect_types) {
    const DefectRecipe& r = recipe(type);
    // Extent is the diameter for blobs and the length for scratches.
    const double factor = type == DefectType::scratch ? 1.0 : 2.0;
    if (!(r.size.lo <= r.size.hi) || r.size.lo * factor < 1.0 || r.size.hi * factor > side / 4.0) {
      throw ConfigError("synthetic: " + to_string(type) + " size range must give extents in [1, side/4]");
    }
    if (!(r.amplitude.lo <= r.amplitude.hi) || std::abs(r.amplitude.lo) > 1.0 || std::abs(r.amplitude.hi) > 1.0) {
      throw ConfigError("synthetic: " + to_string(type) + " amplitude must lie in [-1, 1]");
    }
    if (!(r.half_width.lo <= r.half_width.hi) || r.half_width.lo <= 0.0) {
      throw ConfigError("synthetic: " + to_string(type) + " half width must be positive");
    }
  }
}

namespace {

double uniform(Engine& engine, Range r) {
  if (!(r.hi > r.lo)) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(engine);
}

SeedStream synth_stream(const SyntheticSpec& spec) { return SeedStream(spec.seed).child("synth"); }

double raised_cosine(double t) { return 0.5 * (1.0 + std::cos(std::numbers::pi * t)); }

}  // namespace

double defect_coverage(const DefectShape& shape, double y, double x) {
  const double dy = y - shape.center_y;
  const double dx = x - shape.center_x;
  switch (shape.type) {
    case DefectType::particle:
      return dy * dy + dx * dx <= shape.size * shape.size ? 1.0 : 0.0;
    case DefectType::dent: {
      // Flat core out to r/2, cosine shoulder to zero at r.
      const double d = std::sqrt(dy * dy + dx * dx);
      const double core = 0.5 * shape.size;
      if (d >= shape.size) return 0.0;
      if (d <= core) return 1.0;
      return raised_cosine((d - core) / (shape.size - core));
    }
    case DefectType::scratch: {
      const double ux = std::cos(shape.angle);
      const double uy = std::sin(shape.angle);
      const double half_len = 0.5 * shape.size;
      const double along = std::clamp(dx * ux + dy * uy, -half_len, half_len);
      const double ex = dx - along * ux;
      const double ey = dy - along * uy;
      const double dist = std::sqrt(ex * ex + ey * ey);
      // One-pixel linear anti-aliasing ramp around the stroke edge.
      return std::clamp(shape.half_width + 0.5 - dist, 0.0, 1.0);
    }
  }
  return 0.0;
}

void inject_defect(Image& image, Image& mask, const DefectShape& shape) {
  if (mask.height() != image.height() || mask.width() != image.width() || mask.channels() != 1) {
    throw ConfigError("inject_defect: mask geometry must match image with one channel");
  }
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double w = defect_coverage(shape, static_cast<double>(y), static_cast<double>(x));
      if (w <= 0.0) continue;
      mask(y, x) = 1.0;
      const double a = shape.amplitude * w;
      for (std::size_t c = 0; c < image.channels(); ++c) {
        double& v = image(y, x, c);
        v = a >= 0.0 ? v + a * (1.0 - v) : v + a * v;
      }
    }
  }
}

Image make_normal(const SyntheticSpec& spec, Engine& engine) {
  const GratingParams& g = spec.grating;
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(engine);
  const double theta = g.orientation_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double norm = g.sharpness > 0.0 ? std::tanh(g.sharpness) : 1.0;
  Image image(spec.geometry);
  for (std::size_t y = 0; y < spec.geometry.height; ++y) {
    for (std::size_t x = 0; x < spec.geometry.width; ++x) {
      const double u = static_cast<double>(x) * ct + static_cast<double>(y) * st;
      const double s = std::sin(2.0 * std::numbers::pi * u / g.period + phase);
      const double wave = g.sharpness > 0.0 ? std::tanh(g.sharpness * s) / norm : s;
      const double v = std::clamp(g.mean + 0.5 * g.contrast * wave, 0.0, 1.0);
      for (std::size_t c = 0; c < spec.geometry.channels; ++c) image(y, x, c) = v;
    }
  }
  return image;
}

Image make_train_image(const SyntheticSpec& spec, std::size_t index) {
  Engine engine = synth_stream(spec).child("train").child(index).engine();
  return make_normal(spec, engine);
}

Image make_good_test_image(const SyntheticSpec& spec, std::size_t index) {
  Engine engine = synth_stream(spec).child("test").child("good").child(index).engine();
  return make_normal(spec, engine);
}

SyntheticSample make_defect_sample(const SyntheticSpec& spec, DefectType type, std::size_t index) {
  Engine engine = synth_stream(spec).child("test").child(to_string(type)).child(index).engine();
  SyntheticSample sample;
  sample.normal = make_normal(spec, engine);

  const DefectRecipe& r = spec.recipe(type);
  DefectShape& shape = sample.shape;
  shape.type = type;
  shape.size = uniform(engine, r.size);
  shape.amplitude = uniform(engine, r.amplitude);
  shape.half_width = uniform(engine, r.half_width);
  shape.angle = std::uniform_real_distribution<double>(0.0, std::numbers::pi)(engine);
  const double extent = type == DefectType::scratch ? 0.5 * shape.size + shape.half_width + 1.0 : shape.size;
  const double margin = std::ceil(extent) + 1.0;
  shape.center_y = uniform(engine, {margin, static_cast<double>(spec.geometry.height) - 1.0 - margin});
  shape.center_x = uniform(engine, {margin, static_cast<double>(spec.geometry.width) - 1.0 - margin});

  sample.defect = sample.normal;
  sample.mask = Image(spec.geometry.height, spec.geometry.width, 1);
  inject_defect(sample.defect, sample.mask, shape);
  return sample;
}

namespace {

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string numbered(std::size_t i, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu%s", i, suffix);
  return buf;
}

}  // namespace

DatasetManifest generate_synthetic(const SyntheticSpec& spec, const fs::path& out) {
  spec.validate();
  const fs::path base = out / spec.category;
  const char* ext = spec.geometry.channels == 1 ? ".pgm" : ".ppm";

  DatasetManifest manifest;
  manifest.category = spec.category;
  manifest.root = out;
  manifest.geometry = spec.geometry;
  manifest.seed = spec.seed;

  const fs::path train_dir = base / "train" / "good";
  make_dirs(train_dir);
  for (std::size_t i = 0; i < spec.train_count; ++i) {
    const fs::path p = train_dir / numbered(i, ext);
    write_image(make_train_image(spec, i), p);
    manifest.train.push_back(fs::relative(p, out));
  }
  for (DefectType type : all_defect_types) {
    const std::string name = to_string(type);
    const fs::path test_dir = base / "test" / name;
    const fs::path gt_dir = base / "ground_truth" / name;
    make_dirs(test_dir);
    make_dirs(gt_dir);
    auto& entries = manifest.test[name];
    for (std::size_t i = 0; i < spec.test_per_defect; ++i) {
      const SyntheticSample sample = make_defect_sample(spec, type, i);
      const fs::path image_path = test_dir / numbered(i, ext);
      const fs::path mask_path = gt_dir / numbered(i, "_mask.pgm");
      write_image(sample.defect, image_path);
      write_image(sample.mask, mask_path);
      entries.push_back({fs::relative(image_path, out), fs::relative(mask_path, out)});
    }
  }
  if (spec.test_good > 0) {
    const fs::path good_dir = base / "test" / "good";
    make_dirs(good_dir);
    auto& entries = manifest.test["good"];
    for (std::size_t i = 0; i < spec.test_good; ++i) {
      const fs::path p = good_dir / numbered(i, ext);
      write_image(make_good_test_image(spec, i), p);
      entries.push_back({fs::relative(p, out), std::nullopt});
    }
  }

  std::ofstream json(out / "manifest.json");
  if (!json) throw IoError("cannot write " + (out / "manifest.json").string());
  json << to_json(manifest) << '\n';
  return manifest;
}

std::string to_json(const SyntheticSpec& spec, int indent) {
  auto recipe = [](const DefectRecipe& r) {
    return nlohmann::ordered_json{{"size", {r.size.lo, r.size.hi}},
                                  {"amplitude", {r.amplitude.lo, r.amplitude.hi}},
                                  {"half_width", {r.half_width.lo, r.half_width.hi}}};
  };
  nlohmann::ordered_json j;
  j["category"] = spec.category;
  j["geometry"] = {{"height", spec.geometry.height}, {"width", spec.geometry.width}, {"channels", spec.geometry.channels}};
  j["grating"] = {{"period", spec.grating.period},
                  {"orientation_deg", spec.grating.orientation_deg},
                  {"contrast", spec.grating.contrast},
                  {"sharpness", spec.grating.sharpness},
                  {"mean", spec.grating.mean}};
  j["defects"] = {{"dent", recipe(spec.dent)}, {"particle", recipe(spec.particle)}, {"scratch", recipe(spec.scratch)}};
  j["counts"] = {{"train", spec.train_count}, {"test_per_defect", spec.test_per_defect}, {"test_good", spec.test_good}};
  j["seed"] = spec.seed;
  return j.dump(indent);
}

}  // namespace dta
