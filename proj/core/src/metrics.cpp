#include "dta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dta/error.hpp"

namespace dta {

std::size_t LabeledScores::positives() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

namespace {

void check_shape(const LabeledScores& data) {
  if (data.scores.size() != data.labels.size()) throw ConfigError("scores and labels differ in length");
  if (data.scores.empty()) throw MetricError("no scored pixels");
  for (double s : data.scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite score");
  }
}

}  // namespace

double auroc(const LabeledScores& data) {
  check_shape(data);
  const std::size_t n = data.size();
  const std::size_t pos = data.positives();
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw MetricError("AUROC undefined: labels contain a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.scores[a] < data.scores[b]; });

  // Doubled midranks keep the rank sum integral.
  double twice_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t tied_pos = 0;
    while (j < n && data.scores[order[j]] == data.scores[order[i]]) {
      tied_pos += data.labels[order[j]];
      ++j;
    }
    // ranks i+1 .. j, midrank (i+1+j)/2
    twice_rank_sum += static_cast<double>(tied_pos) * static_cast<double>(i + 1 + j);
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = twice_rank_sum / 2.0 - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double average_precision(const LabeledScores& data) {
  check_shape(data);
  const std::size_t pos = data.positives();
  if (pos == 0) throw MetricError("average precision undefined: no positive labels");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data.scores[a] != data.scores[b]) return data.scores[a] > data.scores[b];
    return data.labels[a] < data.labels[b];
  });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (data.labels[order[rank]] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  return sum / static_cast<double>(pos);
}

double aggregate(std::span<const double> values) {
  if (values.empty()) throw ConfigError("cannot aggregate an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double MethodMetrics::mean_auroc() const {
  std::vector<double> v;
  for (const auto& m : per_category) v.push_back(m.auroc);
  return aggregate(v);
}

double MethodMetrics::mean_ap() const {
  std::vector<double> v;
  for (const auto& m : per_category) v.push_back(m.ap);
  return aggregate(v);
}

const MethodMetrics& MetricsReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  throw ConfigError("report has no method '" + name + "'");
}

void MetricsReport::validate() const {
  if (categories.empty()) throw ConfigError("report has no categories");
  if (methods.empty()) throw ConfigError("report has no methods");
  for (const auto& m : methods) {
    if (m.per_category.size() != categories.size()) {
      throw ConfigError("method '" + m.name + "' has " + std::to_string(m.per_category.size()) + " entries for " +
                        std::to_string(categories.size()) + " categories");
    }
    for (const auto& v : m.per_category) {
      if (!(v.auroc >= 0.0 && v.auroc <= 1.0 && v.ap >= 0.0 && v.ap <= 1.0)) {
        throw ConfigError("method '" + m.name + "' has a metric outside [0,1]");
      }
    }
  }
}

DeltaReport compare(const std::vector<std::string>& categories, const MethodMetrics& baseline,
                    const MethodMetrics& variant) {
  if (baseline.per_category.size() != categories.size() || variant.per_category.size() != categories.size()) {
    throw ConfigError("compare: category mismatch between '" + baseline.name + "' and '" + variant.name + "'");
  }
  DeltaReport out{baseline.name, variant.name, {}, 0.0, 0.0};
  for (std::size_t i = 0; i < categories.size(); ++i) {
    out.per_category.push_back({categories[i], 100.0 * (variant.per_category[i].auroc - baseline.per_category[i].auroc),
                                100.0 * (variant.per_category[i].ap - baseline.per_category[i].ap)});
  }
  out.mean_auroc_pp = 100.0 * (variant.mean_auroc() - baseline.mean_auroc());
  out.mean_ap_pp = 100.0 * (variant.mean_ap() - baseline.mean_ap());
  return out;
}

std::vector<DeltaReport> compare(const MetricsReport& report) {
  report.validate();
  std::vector<DeltaReport> out;
  for (std::size_t m = 1; m < report.methods.size(); ++m) {
    out.push_back(compare(report.categories, report.methods[0], report.methods[m]));
  }
  return out;
}

std::vector<DeltaReport> compare(const MetricsReport& reference, const MetricsReport& candidate) {
  reference.validate();
  candidate.validate();
  if (reference.categories != candidate.categories) throw ConfigError("compare: reports cover different categories");
  std::vector<DeltaReport> out;
  for (const auto& m : candidate.methods) out.push_back(compare(reference.categories, reference.method(m.name), m));
  return out;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

std::string format_points(double points) {
  char buf[32];
  // Avoid printing "-0.0" for deltas that round to zero.
  const double rounded = std::round(points * 10.0) / 10.0;
  std::snprintf(buf, sizeof buf, "%+.1f", rounded == 0.0 ? 0.0 : rounded);
  return buf;
}

std::string to_json(const MetricsReport& report, int indent) {
  report.validate();
  nlohmann::ordered_json j;
  j["categories"] = report.categories;
  j["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : report.methods) {
    nlohmann::ordered_json method;
    method["name"] = m.name;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < report.categories.size(); ++i) {
      per[report.categories[i]] = {{"auroc", m.per_category[i].auroc}, {"ap", m.per_category[i].ap}};
    }
    method["per_category"] = std::move(per);
    method["mean_auroc"] = m.mean_auroc();
    method["mean_ap"] = m.mean_ap();
    j["methods"].push_back(std::move(method));
  }
  j["deltas"] = nlohmann::ordered_json::array();
  for (const auto& d : compare(report)) {
    j["deltas"].push_back({{"baseline", d.baseline},
                           {"variant", d.variant},
                           {"mean_auroc_pp", d.mean_auroc_pp},
                           {"mean_ap_pp", d.mean_ap_pp}});
  }
  return j.dump(indent);
}

MetricsReport report_from_json(const std::string& text) {
  MetricsReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.categories = j.at("categories").get<std::vector<std::string>>();
    for (const auto& m : j.at("methods")) {
      MethodMetrics method;
      method.name = m.at("name").get<std::string>();
      const auto& per = m.at("per_category");
      for (const auto& category : report.categories) {
        const auto& entry = per.at(category);
        method.per_category.push_back({entry.at("auroc").get<double>(), entry.at("ap").get<double>()});
      }
      report.methods.push_back(std::move(method));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metrics report: ") + e.what());
  }
  report.validate();
  return report;
}

namespace {

std::string column_label(const std::string& name) {
  return name.size() == 1 ? "(" + name + ")" : name;
}

}  // namespace

std::string format_table(const MetricsReport& report) {
  report.validate();
  std::size_t label_width = std::string("average").size();
  for (const auto& c : report.categories) label_width = std::max(label_width, c.size());
  label_width = std::max(label_width, ("delta vs " + report.methods[0].name).size());
  label_width += 2;
  const int cell = 8;
  const std::size_t group = report.methods.size() * cell;

  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  auto cellf = [&](const std::string& s) {
    std::string t = s;
    if (t.size() < static_cast<std::size_t>(cell)) t.insert(0, cell - t.size(), ' ');
    return t;
  };

  out << pad("", label_width) << pad("mAUROC (%)", group) << "  " << "mAP (%)" << '\n';
  out << pad("", label_width);
  for (const auto& m : report.methods) out << cellf(column_label(m.name));
  out << "  ";
  for (const auto& m : report.methods) out << cellf(column_label(m.name));
  out << '\n';

  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    out << pad(report.categories[i], label_width);
    for (const auto& m : report.methods) out << cellf(format_percent(m.per_category[i].auroc));
    out << "  ";
    for (const auto& m : report.methods) out << cellf(format_percent(m.per_category[i].ap));
    out << '\n';
  }
  out << pad("average", label_width);
  for (const auto& m : report.methods) out << cellf(format_percent(m.mean_auroc()));
  out << "  ";
  for (const auto& m : report.methods) out << cellf(format_percent(m.mean_ap()));
  out << '\n';

  if (report.methods.size() > 1) {
    const auto deltas = compare(report);
    out << pad("delta vs " + report.methods[0].name, label_width);
    out << cellf("-");
    for (const auto& d : deltas) out << cellf(format_points(d.mean_auroc_pp));
    out << "  " << cellf("-");
    for (const auto& d : deltas) out << cellf(format_points(d.mean_ap_pp));
    out << '\n';
  }
  return out.str();
}

}  // namespace dta
