#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

#include "dta/error.hpp"
#include "dta/metrics.hpp"

using namespace dta;

namespace {

LabeledScores make(std::vector<double> scores, std::vector<std::uint8_t> labels) {
  return LabeledScores{std::move(scores), std::move(labels)};
}

/// Random instance with both classes present; scores quantized so ties occur.
LabeledScores random_instance(std::mt19937_64& engine) {
  std::uniform_int_distribution<std::size_t> size_dist(2, 64);
  std::uniform_int_distribution<int> level_dist(1, 12);
  const std::size_t n = size_dist(engine);
  const int levels = level_dist(engine);
  std::uniform_int_distribution<int> score_dist(0, levels);
  std::bernoulli_distribution label_dist(0.3);
  LabeledScores data;
  for (std::size_t i = 0; i < n; ++i) data.add(score_dist(engine) / static_cast<double>(levels), label_dist(engine));
  data.labels[0] = 1;
  data.labels[1] = 0;
  return data;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Reference {
  MetricsReport report;
  std::vector<double> published_auroc;
  std::vector<double> published_ap;
};

Reference load_reference(const std::string& name) {
  const std::string text = slurp(std::string(DTA_REFERENCE_DIR) + "/" + name);
  const auto j = nlohmann::json::parse(text);
  return Reference{report_from_json(text), j["published_average"]["auroc"].get<std::vector<double>>(),
                   j["published_average"]["ap"].get<std::vector<double>>()};
}

}  // namespace

TEST_SUITE("auroc") {
  TEST_CASE("perfect separation") { CHECK(auroc(make({0.9, 0.1}, {1, 0})) == 1.0); }

  TEST_CASE("all ties give one half") { CHECK(auroc(make({0.3, 0.3, 0.3, 0.3}, {1, 0, 0, 1})) == 0.5); }

  TEST_CASE("eight random pairs against the pairwise oracle") {
    std::mt19937_64 engine(8);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    LabeledScores data;
    for (int i = 0; i < 8; ++i) {
      data.add(dist(engine), true);
      data.add(dist(engine), false);
    }
    CHECK(std::abs(auroc(data) - oracle::pairwise_auroc(data.scores, data.labels)) <= 1e-12);
  }

  TEST_CASE("single class is undefined") {
    CHECK_THROWS_AS(auroc(make({0.1, 0.2}, {1, 1})), MetricError);
    CHECK_THROWS_AS(auroc(make({0.1, 0.2}, {0, 0})), MetricError);
    CHECK_THROWS_AS(auroc(LabeledScores{}), MetricError);
  }

  TEST_CASE("complement symmetry on tie-free inputs") {
    std::mt19937_64 engine(21);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      LabeledScores data;
      LabeledScores flipped;
      for (int i = 0; i < 30; ++i) {
        const double s = dist(engine);
        const bool positive = i % 3 == 0;
        data.add(s, positive);
        flipped.add(-s, !positive);
      }
      // Negating scores and flipping labels reproduces the same ranking problem.
      CHECK(std::abs(auroc(data) - auroc(flipped)) <= 1e-12);
      // Flipping labels alone mirrors the curve.
      LabeledScores swapped = data;
      for (auto& l : swapped.labels) l = 1 - l;
      CHECK(std::abs(auroc(data) + auroc(swapped) - 1.0) <= 1e-12);
    }
  }
}

TEST_SUITE("average precision") {
  TEST_CASE("positive ranked first") { CHECK(average_precision(make({0.9, 0.1}, {1, 0})) == 1.0); }

  TEST_CASE("positive ranked second") { CHECK(average_precision(make({0.9, 0.1}, {0, 1})) == 0.5); }

  TEST_CASE("ten scores with three positives against the rank walk") {
    std::mt19937_64 engine(10);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    LabeledScores data;
    for (int i = 0; i < 10; ++i) data.add(dist(engine), i == 2 || i == 5 || i == 7);
    CHECK(std::abs(average_precision(data) - oracle::rank_walk_ap(data.scores, data.labels)) <= 1e-12);
  }

  TEST_CASE("ties put negatives first") {
    // One positive tied with two negatives at the top: it sits at rank 3.
    CHECK(average_precision(make({0.5, 0.5, 0.5, 0.1}, {0, 1, 0, 0})) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("no positives is undefined") {
    CHECK_THROWS_AS(average_precision(make({0.1, 0.2}, {0, 0})), MetricError);
  }
}

TEST_SUITE("metric properties") {
  TEST_CASE("oracle equivalence on random instances with ties") {
    std::mt19937_64 engine(1000);
    for (int trial = 0; trial < 1000; ++trial) {
      const LabeledScores data = random_instance(engine);
      REQUIRE(std::abs(auroc(data) - oracle::pairwise_auroc(data.scores, data.labels)) <= 1e-12);
      REQUIRE(std::abs(average_precision(data) - oracle::rank_walk_ap(data.scores, data.labels)) <= 1e-12);
    }
  }

  TEST_CASE("invariant under strictly monotone transforms") {
    std::mt19937_64 engine(5);
    for (int trial = 0; trial < 100; ++trial) {
      const LabeledScores data = random_instance(engine);
      LabeledScores mapped = data;
      for (double& s : mapped.scores) s = std::exp(3.0 * s) - 7.0;
      CHECK(auroc(mapped) == auroc(data));
      CHECK(average_precision(mapped) == average_precision(data));
    }
  }

  TEST_CASE("values stay in the unit interval") {
    std::mt19937_64 engine(6);
    for (int trial = 0; trial < 200; ++trial) {
      const LabeledScores data = random_instance(engine);
      const double a = auroc(data);
      const double p = average_precision(data);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_SUITE("aggregation") {
  TEST_CASE("singleton mean") {
    const std::vector<double> v{0.7};
    CHECK(aggregate(v) == 0.7);
  }

  TEST_CASE("empty list is a configuration error") {
    CHECK_THROWS_AS(aggregate(std::vector<double>{}), ConfigError);
  }

  TEST_CASE("product categories before column") {
    const std::vector<double> before{87.0, 63.4, 85.6, 60.2, 82.8, 94.1, 80.0, 83.1,
                                     90.0, 88.0, 73.5, 61.8, 93.4, 68.5, 76.8};
    CHECK(format_percent(aggregate(before) / 100.0) == "79.2");
  }

  TEST_CASE("display defects before column") {
    const std::vector<double> before{85.8, 85.1, 86.4};
    CHECK(format_percent(aggregate(before) / 100.0) == "85.8");
  }

  TEST_CASE("product categories: every average cell matches the published row") {
    const Reference ref = load_reference("product_categories.json");
    REQUIRE(ref.report.categories.size() == 15);
    for (std::size_t m = 0; m < ref.report.methods.size(); ++m) {
      CAPTURE(ref.report.methods[m].name);
      CHECK(format_percent(ref.report.methods[m].mean_auroc()) == format_percent(ref.published_auroc[m] / 100.0));
      CHECK(format_percent(ref.report.methods[m].mean_ap()) == format_percent(ref.published_ap[m] / 100.0));
    }
  }

  TEST_CASE("display defects: averages of the listed rows") {
    const Reference ref = load_reference("display_defects.json");
    std::vector<std::string> auroc_cells;
    std::vector<std::string> ap_cells;
    for (const auto& m : ref.report.methods) {
      auroc_cells.push_back(format_percent(m.mean_auroc()));
      ap_cells.push_back(format_percent(m.mean_ap()));
    }
    CHECK(auroc_cells == std::vector<std::string>{"85.8", "93.1", "95.8", "92.8"});
    // (16.8 + 65.7 + 27.5) / 3 = 36.67 for the third mAP column; the
    // published average row lists 36.6 there.
    CHECK(ap_cells == std::vector<std::string>{"29.2", "32.8", "36.7", "38.6"});
  }
}

TEST_SUITE("compare") {
  TEST_CASE("variant B against before on product categories") {
    const Reference ref = load_reference("product_categories.json");
    const DeltaReport d = compare(ref.report.categories, ref.report.method("before"), ref.report.method("B"));
    CHECK(format_points(d.mean_auroc_pp) == "+8.0");
    CHECK(format_points(d.mean_ap_pp) == "+20.3");
    CHECK(d.per_category.size() == 15);
    CHECK(d.per_category.front().auroc_pp == doctest::Approx(74.3 - 87.0));
  }

  TEST_CASE("self comparison is all zeros") {
    const Reference ref = load_reference("display_defects.json");
    for (const auto& d : compare(ref.report, ref.report)) {
      CHECK(d.mean_auroc_pp == 0.0);
      CHECK(d.mean_ap_pp == 0.0);
      for (const auto& c : d.per_category) {
        CHECK(c.auroc_pp == 0.0);
        CHECK(c.ap_pp == 0.0);
      }
      CHECK(format_points(d.mean_auroc_pp) == "+0.0");
    }
  }

  TEST_CASE("category mismatch is a configuration error") {
    const Reference ref = load_reference("display_defects.json");
    MetricsReport other = ref.report;
    other.categories[0] = "crack";
    CHECK_THROWS_AS(compare(ref.report, other), ConfigError);
    MethodMetrics short_method = ref.report.methods[1];
    short_method.per_category.pop_back();
    CHECK_THROWS_AS(compare(ref.report.categories, ref.report.methods[0], short_method), ConfigError);
  }

  TEST_CASE("compare(report) pairs every method with the first") {
    const Reference ref = load_reference("display_defects.json");
    const auto deltas = compare(ref.report);
    REQUIRE(deltas.size() == 3);
    CHECK(deltas[0].baseline == "before");
    CHECK(deltas[0].variant == "A");
    CHECK(deltas[2].variant == "C");
  }
}

TEST_SUITE("report formatting") {
  TEST_CASE("percent and point formatting") {
    CHECK(format_percent(0.79213) == "79.2");
    CHECK(format_percent(1.0) == "100.0");
    CHECK(format_points(7.973) == "+8.0");
    CHECK(format_points(-0.04) == "+0.0");
    CHECK(format_points(-1.26) == "-1.3");
  }

  TEST_CASE("json round trip") {
    const Reference ref = load_reference("product_categories.json");
    const MetricsReport back = report_from_json(to_json(ref.report));
    REQUIRE(back.categories == ref.report.categories);
    REQUIRE(back.methods.size() == ref.report.methods.size());
    for (std::size_t m = 0; m < back.methods.size(); ++m) {
      CHECK(back.methods[m].name == ref.report.methods[m].name);
      for (std::size_t c = 0; c < back.categories.size(); ++c) {
        CHECK(back.methods[m].per_category[c].auroc == ref.report.methods[m].per_category[c].auroc);
        CHECK(back.methods[m].per_category[c].ap == ref.report.methods[m].per_category[c].ap);
      }
    }
  }

  TEST_CASE("malformed json is a format error") {
    CHECK_THROWS_AS(report_from_json("{\"categories\": [\"a\"]}"), FormatError);
    CHECK_THROWS_AS(report_from_json("not json"), FormatError);
  }

  TEST_CASE("out-of-range metric fails validation") {
    MetricsReport report;
    report.categories = {"dent"};
    report.methods = {MethodMetrics{"before", {{1.2, 0.5}}}};
    CHECK_THROWS_AS(report.validate(), ConfigError);
  }

  TEST_CASE("table layout has the average and delta rows") {
    const Reference ref = load_reference("product_categories.json");
    const std::string table = format_table(ref.report);
    CHECK(table.find("mAUROC") != std::string::npos);
    CHECK(table.find("mAP") != std::string::npos);
    CHECK(table.find("(B)") != std::string::npos);
    std::istringstream lines(table);
    std::string line;
    bool saw_average = false;
    bool saw_delta = false;
    while (std::getline(lines, line)) {
      if (line.rfind("average", 0) == 0) {
        saw_average = true;
        for (const char* cell : {"79.2", "84.2", "87.2", "80.7", "21.9", "29.1", "42.2", "38.8"}) {
          CHECK_MESSAGE(line.find(cell) != std::string::npos, cell);
        }
      }
      if (line.rfind("delta vs before", 0) == 0) {
        saw_delta = true;
        CHECK(line.find("+8.0") != std::string::npos);
        CHECK(line.find("+20.3") != std::string::npos);
      }
    }
    CHECK(saw_average);
    CHECK(saw_delta);
  }
}
