#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dta {

/// Pooled (score, label) pairs; label 1 marks an anomalous pixel.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void add(double score, bool positive) {
    scores.push_back(score);
    labels.push_back(positive ? 1 : 0);
  }
  std::size_t size() const noexcept { return scores.size(); }
  std::size_t positives() const noexcept;
};

/// Mann-Whitney statistic P(s+ > s-) + 0.5 P(s+ == s-), via midranks.
/// Throws MetricError unless both classes are present.
double auroc(const LabeledScores& data);

/// Rank-walk average precision over a descending-score order in which
/// negatives precede positives at equal score (pessimistic tie handling).
/// Throws MetricError when there are no positives.
double average_precision(const LabeledScores& data);

/// Arithmetic mean; throws ConfigError for an empty list.
double aggregate(std::span<const double> values);

struct MetricPair {
  double auroc = 0.0;
  double ap = 0.0;
};

/// Per-category results of one method, in the report's category order.
struct MethodMetrics {
  std::string name;
  std::vector<MetricPair> per_category;

  double mean_auroc() const;
  double mean_ap() const;
};

/// Rows are categories (defect types or products), columns are methods.
/// By convention methods[0] is the single-noise-level baseline ("before").
struct MetricsReport {
  std::vector<std::string> categories;
  std::vector<MethodMetrics> methods;

  const MethodMetrics& method(const std::string& name) const;
  /// Throws ConfigError on shape mismatch or metric values outside [0,1].
  void validate() const;
};

struct MetricDelta {
  std::string category;
  double auroc_pp = 0.0;  // percentage points, variant - baseline
  double ap_pp = 0.0;
};

struct DeltaReport {
  std::string baseline;
  std::string variant;
  std::vector<MetricDelta> per_category;
  double mean_auroc_pp = 0.0;
  double mean_ap_pp = 0.0;
};

/// variant - baseline in percentage points. Category lists must match.
DeltaReport compare(const std::vector<std::string>& categories, const MethodMetrics& baseline,
                    const MethodMetrics& variant);
/// Every method after the first against methods[0].
std::vector<DeltaReport> compare(const MetricsReport& report);
/// Each method of `candidate` against the same-named method of `reference`.
std::vector<DeltaReport> compare(const MetricsReport& reference, const MetricsReport& candidate);

/// Percentage with one decimal, e.g. 0.79213 -> "79.2".
std::string format_percent(double fraction);
/// Signed percentage points with one decimal, e.g. 7.973 -> "+8.0".
std::string format_points(double points);

std::string to_json(const MetricsReport& report, int indent = 2);
MetricsReport report_from_json(const std::string& text);

/// Aligned text table: one row per category plus "average" and delta rows,
/// mAUROC columns then mAP columns, one column per method.
std::string format_table(const MetricsReport& report);

}  // namespace dta
