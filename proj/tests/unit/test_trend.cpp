#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "dta/denoiser.hpp"
#include "dta/error.hpp"
#include "dta/trend.hpp"

using namespace dta;

namespace {

std::vector<double> cosine(std::size_t n) {
  std::vector<double> seq(n);
  for (std::size_t k = 0; k < n; ++k) seq[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  return seq;
}

TrendStack constant_stack(Geometry g, std::size_t length, double intensity, double uncertainty) {
  TrendStack stack;
  stack.geometry = g;
  for (std::size_t k = 0; k < length; ++k) {
    stack.intensity.emplace_back(g, intensity);
    stack.uncertainty.emplace_back(g, uncertainty);
  }
  return stack;
}

}  // namespace

TEST_SUITE("second fourier magnitude") {
  TEST_CASE("constant sequence has no fundamental") {
    const std::vector<double> seq(8, 5.0);
    CHECK(second_fourier_magnitude(seq) == 0.0);
  }

  TEST_CASE("pure fundamental gives N/2") {
    CHECK(second_fourier_magnitude(cosine(8)) == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("ramp against the naive dft") {
    const std::vector<double> ramp{0, 1, 2, 3, 4, 5, 6, 7};
    const double expected = std::abs(oracle::naive_dft(ramp)[1]);
    CHECK(std::abs(second_fourier_magnitude(ramp) - expected) <= 1e-12);
  }

  TEST_CASE("too short is a configuration error") {
    const std::vector<double> seq{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(second_fourier_magnitude(seq), ConfigError);
  }

  TEST_CASE("non-finite entry is a numeric error") {
    const std::vector<double> seq{1.0, NAN, 3.0, 4.0};
    CHECK_THROWS_AS(second_fourier_magnitude(seq), NumericError);
  }

  TEST_CASE("random sequences match the naive dft for N in 4..64") {
    std::mt19937_64 engine(64);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t n = 4; n <= 64; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> seq(n);
        for (double& v : seq) v = dist(engine);
        REQUIRE(std::abs(second_fourier_magnitude(seq) - std::abs(oracle::naive_dft(seq)[1])) <= 1e-12);
      }
    }
  }

  TEST_CASE("shift invariance and scaling") {
    std::mt19937_64 engine(3);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (std::size_t n : {4u, 7u, 16u, 33u}) {
      std::vector<double> seq(n);
      for (double& v : seq) v = dist(engine);
      const double base = second_fourier_magnitude(seq);
      std::vector<double> shifted = seq;
      for (double& v : shifted) v += 2.5;
      CHECK(second_fourier_magnitude(shifted) == doctest::Approx(base).epsilon(1e-12));
      for (double c : {0.0, 0.5, 3.0}) {
        std::vector<double> scaled = seq;
        for (double& v : scaled) v *= c;
        CHECK(second_fourier_magnitude(scaled) == doctest::Approx(c * base).epsilon(1e-12).scale(1.0));
      }
    }
  }

  TEST_CASE("a monotone ramp beats an alternating sequence of equal amplitude") {
    for (std::size_t n = 8; n <= 64; ++n) {
      for (double a : {0.01, 0.3, 1.0, 7.0}) {
        std::vector<double> ramp(n);
        std::vector<double> alternating(n);
        for (std::size_t k = 0; k < n; ++k) {
          ramp[k] = a * static_cast<double>(k) / static_cast<double>(n - 1);
          alternating[k] = k % 2 == 0 ? a / 2 : -a / 2;
        }
        CHECK(second_fourier_magnitude(ramp) > second_fourier_magnitude(alternating));
      }
    }
  }
}

TEST_SUITE("trend map") {
  TEST_CASE("constant sequences give an all-zero map") {
    const TrendStack stack = constant_stack({8, 8, 1}, 6, 0.4, 1.0);
    for (TrendKind kind : {TrendKind::intensity, TrendKind::uncertainty}) {
      const TrendMap map = trend_map(stack, kind);
      CHECK(map.kind == kind);
      CHECK(map.values.geometry() == Geometry{8, 8, 1});
      for (double v : map.values.data()) CHECK(v == 0.0);
    }
  }

  TEST_CASE("one oscillating pixel") {
    const std::size_t n = 16;
    TrendStack stack = constant_stack({8, 8, 1}, n, 0.5, 1.0);
    const auto seq = cosine(n);
    for (std::size_t k = 0; k < n; ++k) stack.intensity[k](3, 5) = seq[k];
    const TrendMap map = trend_map(stack, TrendKind::intensity);
    std::size_t nonzero = 0;
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        if (std::abs(map.values(y, x)) > 1e-12) ++nonzero;
      }
    }
    CHECK(nonzero == 1);
    CHECK(map.values(3, 5) == doctest::Approx(n / 2.0).epsilon(1e-13));
  }

  TEST_CASE("identical channels equal the single-channel result") {
    const std::size_t n = 8;
    std::mt19937_64 engine(9);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    TrendStack gray;
    TrendStack color;
    gray.geometry = {8, 8, 1};
    color.geometry = {8, 8, 3};
    for (std::size_t k = 0; k < n; ++k) {
      Image g(gray.geometry);
      Image c(color.geometry);
      for (std::size_t p = 0; p < 64; ++p) {
        const double v = dist(engine);
        g.data()[p] = v;
        for (std::size_t ch = 0; ch < 3; ++ch) c.data()[p * 3 + ch] = v;
      }
      gray.intensity.push_back(g);
      gray.uncertainty.push_back(g);
      color.intensity.push_back(c);
      color.uncertainty.push_back(c);
    }
    const TrendMap a = trend_map(gray, TrendKind::intensity);
    const TrendMap b = trend_map(color, TrendKind::intensity);
    REQUIRE(b.values.channels() == 1);
    for (std::size_t p = 0; p < 64; ++p) CHECK(b.values.data()[p] == doctest::Approx(a.values.data()[p]).epsilon(1e-14));
  }
}

TEST_SUITE("normalize01") {
  TEST_CASE("min-max") {
    const std::vector<double> v{2.0, 4.0, 6.0};
    CHECK(normalize01(v) == std::vector<double>{0.0, 0.5, 1.0});
  }

  TEST_CASE("constant input gives zeros") {
    const std::vector<double> v(5, 3.3);
    CHECK(normalize01(v) == std::vector<double>(5, 0.0));
  }

  TEST_CASE("already normalized input is unchanged") {
    const std::vector<double> v{0.0, 0.25, 1.0, 0.75};
    CHECK(normalize01(v) == v);
  }

  TEST_CASE("every non-constant map attains both ends") {
    std::mt19937_64 engine(12);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
      Image map(8, 8, 1);
      for (double& v : map.data()) v = dist(engine) * dist(engine);
      const Image n = normalize01(map);
      double lo = 1.0;
      double hi = 0.0;
      for (double v : n.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo == 0.0);
      CHECK(hi == 1.0);
    }
  }
}

TEST_SUITE("fuse") {
  TEST_CASE("ones times ones") {
    const ScoreMap s = fuse(Image(8, 8, 1, 1.0), Image(8, 8, 1, 1.0), 1.0);
    CHECK(s.kind == ScoreKind::proposed);
    for (double v : s.values.data()) CHECK(v == 1.0);
  }

  TEST_CASE("zero uncertainty annihilates") {
    const Image x = oracle::random_image({8, 8, 1}, 2);
    const ScoreMap s = fuse(x, Image(8, 8, 1, 0.0), 1.0);
    for (double v : s.values.data()) CHECK(v == 0.0);
  }

  TEST_CASE("weight is an exponent on uncertainty") {
    const ScoreMap s = fuse(Image(8, 8, 1, 0.5), Image(8, 8, 1, 0.5), 2.0);
    CHECK(s.values(0, 0) == doctest::Approx(0.125).epsilon(1e-15));
  }

  TEST_CASE("weight zero is intensity only") {
    const Image x = oracle::random_image({8, 8, 1}, 4);
    const Image u = oracle::random_image({8, 8, 1}, 5);
    CHECK(fuse(x, u, 0.0).values == x);
  }

  TEST_CASE("geometry mismatch and negative weight are configuration errors") {
    CHECK_THROWS_AS(fuse(Image(8, 8, 1), Image(8, 16, 1), 1.0), ConfigError);
    CHECK_THROWS_AS(fuse(Image(8, 8, 1), Image(8, 8, 1), -1.0), ConfigError);
  }

  TEST_CASE("monotone in each input") {
    std::mt19937_64 engine(17);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double w : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      for (int trial = 0; trial < 200; ++trial) {
        const double x = dist(engine);
        const double u = dist(engine);
        const double dx = dist(engine) * (1.0 - x);
        const double du = dist(engine) * (1.0 - u);
        auto score = [w](double a, double b) { return fuse(Image(8, 8, 1, a), Image(8, 8, 1, b), w).values(0, 0); };
        CHECK(score(x + dx, u) >= score(x, u));
        CHECK(score(x, u + du) >= score(x, u));
      }
    }
  }
}

TEST_SUITE("detect") {
  TEST_CASE("identity model gives an all-zero proposed map") {
    const DenoiserModel model = init_model(Architecture{}, 0);
    const Image image = oracle::random_image({16, 16, 1}, 6);
    const Detection d = detect(model, image, NoiseSchedule::linear(0.4, 8), SeedStream(1), 1.0);
    for (double v : d.raw_uncertainty.values.data()) CHECK(v == 0.0);
    for (double v : d.uncertainty_only.values.data()) CHECK(v == 0.0);
    for (double v : d.proposed.values.data()) CHECK(v == 0.0);
    CHECK(d.proposed.kind == ScoreKind::proposed);
    CHECK(d.intensity_only.kind == ScoreKind::intensity_only);
    CHECK(d.uncertainty_only.kind == ScoreKind::uncertainty_only);
    // Noise passes straight through, so the intensity trend is not flat.
    double hi = 0.0;
    for (double v : d.intensity_only.values.data()) hi = std::max(hi, v);
    CHECK(hi == 1.0);
  }

  TEST_CASE("fixed stream gives identical maps") {
    const DenoiserModel model = oracle::random_model(Architecture{1, {4, 4}, 3}, 8, 0.1);
    const Image image = oracle::random_image({16, 16, 1}, 7);
    const auto schedule = NoiseSchedule::linear(0.3, 5);
    const Detection a = detect(model, image, schedule, SeedStream(11).child("img"), 1.0);
    const Detection b = detect(model, image, schedule, SeedStream(11).child("img"), 1.0);
    CHECK(a.proposed.values == b.proposed.values);
    CHECK(a.intensity_only.values == b.intensity_only.values);
    CHECK(a.uncertainty_only.values == b.uncertainty_only.values);
    const Detection c = detect(model, image, schedule, SeedStream(12).child("img"), 1.0);
    CHECK_FALSE(a.intensity_only.values == c.intensity_only.values);
  }

  TEST_CASE("score maps stay in range for a random model") {
    const DenoiserModel model = oracle::random_model(Architecture{1, {4, 4}, 3}, 9, 0.3);
    const Image image = oracle::random_image({16, 16, 1}, 8);
    const Detection d = detect(model, image, NoiseSchedule::linear(0.4, 6), SeedStream(2), 1.5);
    for (const ScoreMap* m : {&d.proposed, &d.intensity_only, &d.uncertainty_only}) {
      for (double v : m->values.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_SUITE("baseline score") {
  TEST_CASE("identity model scores the normalized noise magnitude") {
    const DenoiserModel model = init_model(Architecture{}, 0);
    const Image image = oracle::random_image({16, 16, 1}, 10);
    const SeedStream stream(3);
    const ScoreMap s = baseline_score(model, image, 0.2, stream);
    CHECK(s.kind == ScoreKind::baseline);
    Engine engine = stream.child("baseline").engine();
    const Image noisy = corrupt(image, 0.2, engine);
    std::vector<double> err(image.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = std::abs(image.data()[i] - noisy.data()[i]);
    const std::vector<double> expected = normalize01(err);
    for (std::size_t i = 0; i < err.size(); ++i) CHECK(s.values.data()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  TEST_CASE("non-positive beta is a configuration error") {
    const DenoiserModel model = init_model(Architecture{}, 0);
    const Image image(16, 16, 1, 0.5);
    CHECK_THROWS_AS(baseline_score(model, image, 0.0, SeedStream(0)), ConfigError);
    CHECK_THROWS_AS(baseline_score(model, image, -0.1, SeedStream(0)), ConfigError);
  }
}
