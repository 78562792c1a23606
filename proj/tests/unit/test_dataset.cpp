#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

#include "dta/dataset.hpp"
#include "dta/error.hpp"
#include "dta/pnm.hpp"
#include "dta/synthetic.hpp"

using namespace dta;
namespace fs = std::filesystem;

namespace {

void put(const fs::path& path, const Image& image) {
  fs::create_directories(path.parent_path());
  write_image(image, path);
}

/// cat/ with 3 train, 2 dent (masked) and 1 good test image.
void build_small_tree(const fs::path& root) {
  const fs::path cat = root / "cat";
  for (const char* name : {"a.pgm", "b.pgm", "c.pgm"}) put(cat / "train" / "good" / name, Image(8, 8, 1, 0.5));
  for (const char* stem : {"000", "001"}) {
    put(cat / "test" / "dent" / (std::string(stem) + ".pgm"), Image(8, 8, 1, 0.3));
    Image mask(8, 8, 1);
    mask(2, 3) = 1.0;
    put(cat / "ground_truth" / "dent" / (std::string(stem) + "_mask.pgm"), mask);
  }
  put(cat / "test" / "good" / "000.pgm", Image(8, 8, 1, 0.5));
}

double mask_area(const Image& mask) { return std::count(mask.data().begin(), mask.data().end(), 1.0); }

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.train_count = 8;
  spec.test_per_defect = 2;
  spec.seed = 7;
  return spec;
}

}  // namespace

TEST_SUITE("dataset layout") {
  TEST_CASE("layout walk") {
    oracle::TempDir dir("layout");
    build_small_tree(dir.path());
    const DatasetManifest m = load_dataset(dir.path());
    CHECK(m.category == "cat");
    CHECK(m.geometry == Geometry{8, 8, 1});
    CHECK(m.train.size() == 3);
    REQUIRE(m.test.size() == 2);
    REQUIRE(m.test.at("dent").size() == 2);
    REQUIRE(m.test.at("good").size() == 1);
    CHECK(m.test_count() == 3);
    CHECK(m.defect_types() == std::vector<std::string>{"dent"});
    for (const TestEntry& e : m.test.at("dent")) {
      REQUIRE(e.mask.has_value());
      CHECK(mask_area(load_mask(m, e)) == 1.0);
    }
    const TestEntry& good = m.test.at("good").front();
    CHECK_FALSE(good.mask.has_value());
    const Image zero = load_mask(m, good);
    CHECK(zero.geometry() == m.geometry);
    CHECK(mask_area(zero) == 0.0);
    CHECK(load_train_images(m).size() == 3);
  }

  TEST_CASE("category directory may be given directly") {
    oracle::TempDir dir("direct");
    build_small_tree(dir.path());
    const DatasetManifest m = load_dataset(dir.path() / "cat");
    CHECK(m.category == "cat");
    CHECK(m.train.size() == 3);
  }

  TEST_CASE("missing mask names the image") {
    oracle::TempDir dir("nomask");
    build_small_tree(dir.path());
    fs::remove(dir.path() / "cat" / "ground_truth" / "dent" / "001_mask.pgm");
    try {
      load_dataset(dir.path());
      FAIL("expected LayoutError");
    } catch (const LayoutError& e) {
      CHECK(std::string(e.what()).find("001.pgm") != std::string::npos);
    }
  }

  TEST_CASE("empty train directory") {
    oracle::TempDir dir("notrain");
    build_small_tree(dir.path());
    for (const auto& entry : fs::directory_iterator(dir.path() / "cat" / "train" / "good")) fs::remove(entry.path());
    CHECK_THROWS_AS(load_dataset(dir.path()), LayoutError);
  }

  TEST_CASE("mixed geometry") {
    oracle::TempDir dir("mixed");
    build_small_tree(dir.path());
    put(dir.path() / "cat" / "train" / "good" / "d.pgm", Image(8, 9, 1));
    CHECK_THROWS_AS(load_dataset(dir.path()), LayoutError);
  }

  TEST_CASE("mask geometry must match its image") {
    oracle::TempDir dir("maskgeom");
    build_small_tree(dir.path());
    put(dir.path() / "cat" / "ground_truth" / "dent" / "000_mask.pgm", Image(4, 4, 1));
    CHECK_THROWS_AS(load_dataset(dir.path()), LayoutError);
  }

  TEST_CASE("missing root") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/dataset"), LayoutError);
  }

  TEST_CASE("manifest JSON uses relative paths") {
    oracle::TempDir dir("json");
    build_small_tree(dir.path());
    const auto j = nlohmann::json::parse(to_json(load_dataset(dir.path())));
    CHECK(j["category"] == "cat");
    CHECK(j["geometry"]["height"] == 8);
    REQUIRE(j["train"].size() == 3);
    for (const auto& p : j["train"]) CHECK(fs::path(p.get<std::string>()).is_relative());
  }
}

TEST_SUITE("synthetic benchmark") {
  TEST_CASE("generator parameter validation") {
    SyntheticSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.train_count = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSpec{};
    spec.test_per_defect = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSpec{};
    spec.particle.size = {2.0, 17.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = SyntheticSpec{};
    spec.dent.size = {0.4, 3.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }

  TEST_CASE("generated tree counts and determinism") {
    oracle::TempDir a("synth_a");
    oracle::TempDir b("synth_b");
    const DatasetManifest m = generate_synthetic(small_spec(), a.path());
    generate_synthetic(small_spec(), b.path());
    CHECK(m.train.size() == 8);
    std::size_t images = 0;
    std::size_t masks = 0;
    for (const auto& [type, entries] : m.test) {
      for (const TestEntry& e : entries) {
        ++images;
        if (e.mask) ++masks;
      }
    }
    CHECK(images == 6);
    CHECK(masks == 6);

    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
      if (!entry.is_regular_file()) continue;
      ++files;
      const fs::path twin = b.path() / fs::relative(entry.path(), a.path());
      REQUIRE(fs::exists(twin));
      CHECK(read_file(entry.path()) == read_file(twin));
    }
    CHECK(files == 8 + 6 + 6 + 1);
  }

  TEST_CASE("different seeds give different trees") {
    SyntheticSpec other = small_spec();
    other.seed = 8;
    CHECK_FALSE(make_train_image(small_spec(), 0) == make_train_image(other, 0));
  }

  TEST_CASE("loader accepts generated trees") {
    oracle::TempDir dir("synth_load");
    SyntheticSpec spec = small_spec();
    spec.test_good = 2;
    const DatasetManifest generated = generate_synthetic(spec, dir.path());
    const DatasetManifest loaded = load_dataset(dir.path());
    CHECK(loaded.category == generated.category);
    CHECK(loaded.geometry == generated.geometry);
    CHECK(loaded.train == generated.train);
    REQUIRE(loaded.test.size() == generated.test.size());
    for (const auto& [type, entries] : generated.test) {
      REQUIRE(loaded.test.at(type).size() == entries.size());
      for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(loaded.test.at(type)[i].image == entries[i].image);
        CHECK(loaded.test.at(type)[i].mask == entries[i].mask);
      }
    }
    CHECK(load_train_images(loaded).front() == decode_pnm(encode_pnm(make_train_image(spec, 0), BitDepth::k8)).image);
  }

  TEST_CASE("discrete disk oracle") {
    CHECK(oracle::disk_pixel_count(3.0) == 29);
    CHECK(oracle::disk_pixel_count(1.0) == 5);
  }

  TEST_CASE("particle of radius 3 covers a discrete disk") {
    SyntheticSpec spec;
    spec.particle.size = {3.0, 3.0};
    for (std::size_t i = 0; i < 50; ++i) {
      const SyntheticSample s = make_defect_sample(spec, DefectType::particle, i);
      std::size_t expected = 0;
      for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
          const double dy = y - s.shape.center_y;
          const double dx = x - s.shape.center_x;
          if (dy * dy + dx * dx <= 9.0) ++expected;
        }
      }
      const double area = mask_area(s.mask);
      CHECK(area == static_cast<double>(expected));
      CHECK(area >= 13.0);
      CHECK(area <= 45.0);
    }
  }

  TEST_CASE("zero amplitude leaves the image untouched but records the support") {
    SyntheticSpec spec;
    spec.dent.amplitude = {0.0, 0.0};
    spec.particle.amplitude = {0.0, 0.0};
    spec.scratch.amplitude = {0.0, 0.0};
    for (DefectType type : all_defect_types) {
      const SyntheticSample s = make_defect_sample(spec, type, 3);
      CHECK(s.defect == s.normal);
      CHECK(mask_area(s.mask) > 0.0);
    }
  }

  TEST_CASE("mask fidelity") {
    const SyntheticSpec spec;
    for (DefectType type : all_defect_types) {
      for (std::size_t i = 0; i < 20; ++i) {
        const SyntheticSample s = make_defect_sample(spec, type, i);
        const auto h = static_cast<long>(s.mask.height());
        const auto w = static_cast<long>(s.mask.width());
        auto differs = [&](long y, long x) {
          return y >= 0 && x >= 0 && y < h && x < w && s.defect(y, x) != s.normal(y, x);
        };
        for (long y = 0; y < h; ++y) {
          for (long x = 0; x < w; ++x) {
            if (differs(y, x)) REQUIRE(s.mask(y, x) == 1.0);
            if (s.mask(y, x) == 1.0) {
              bool near = false;
              for (long oy = -1; oy <= 1; ++oy)
                for (long ox = -1; ox <= 1; ++ox) near = near || differs(y + oy, x + ox);
              REQUIRE(near);
            }
          }
        }
        CHECK(mask_area(s.mask) > 0.0);
      }
    }
  }

  TEST_CASE("defects stay inside the frame") {
    const SyntheticSpec spec;
    for (DefectType type : all_defect_types) {
      for (std::size_t i = 0; i < 20; ++i) {
        const Image& mask = make_defect_sample(spec, type, i).mask;
        for (std::size_t k = 0; k < 64; ++k) {
          CHECK(mask(0, k) == 0.0);
          CHECK(mask(63, k) == 0.0);
          CHECK(mask(k, 0) == 0.0);
          CHECK(mask(k, 63) == 0.0);
        }
      }
    }
  }

  TEST_CASE("defect polarity") {
    const SyntheticSpec spec;
    auto mean_shift = [&](DefectType type) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        const SyntheticSample s = make_defect_sample(spec, type, i);
        for (std::size_t p = 0; p < s.mask.size(); ++p) sum += s.defect.data()[p] - s.normal.data()[p];
      }
      return sum;
    };
    CHECK(mean_shift(DefectType::dent) < 0.0);
    CHECK(mean_shift(DefectType::particle) > 0.0);
    CHECK(mean_shift(DefectType::scratch) > 0.0);
  }

  TEST_CASE("unwritable output is an io error") {
    oracle::TempDir dir("ro");
    const fs::path blocker = dir.path() / "file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(generate_synthetic(small_spec(), blocker / "sub"), IoError);
  }
}
