#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "dta/checkpoint.hpp"
#include "dta/dataset.hpp"
#include "dta/error.hpp"
#include "dta/export.hpp"
#include "dta/metrics.hpp"
#include "dta/pnm.hpp"
#include "dta/synthetic.hpp"

namespace dta::cli {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

RunManifest start_manifest(const RunConfig& config) {
  RunManifest m;
  m.config = config;
  m.version = tool_version();
  return m;
}

void finish(RunManifest& m, const Stopwatch& clock) {
  m.artifacts = checksum_tree(m.config.out);
  m.duration_seconds = clock.seconds();
  write_manifest(m, m.config.out);
}

std::pair<double, double> value_range(const Image& image) {
  const auto [lo, hi] = std::minmax_element(image.data().begin(), image.data().end());
  return {*lo, *hi};
}

/// Runs job(i) for i in [0, count) on `workers` threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, std::size_t workers, const Job& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(workers, count); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string method_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::baseline: return "before";
    case ScoreKind::intensity_only: return "A";
    case ScoreKind::uncertainty_only: return "B";
    case ScoreKind::proposed: return "C";
  }
  return "?";
}

fs::path score_map_path(const fs::path& scores, const std::string& type, const std::string& stem, ScoreKind kind) {
  return scores / type / (stem + "_" + to_string(kind) + ".pgm");
}

RunManifest cmd_synth(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Stopwatch clock;
  RunManifest m = start_manifest(config);
  const SyntheticSpec spec = config.synthetic_spec();
  const DatasetManifest dataset = generate_synthetic(spec, config.out);
  m.extra = nlohmann::ordered_json::parse(to_json(spec));
  finish(m, clock);
  log << "synth: " << dataset.train.size() << " train and " << dataset.test_count() << " test images in "
      << config.out.string() << "\n";
  return m;
}

RunManifest cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Stopwatch clock;
  RunManifest m = start_manifest(config);
  const DatasetManifest dataset = load_dataset(config.dataset, config.category);
  const std::vector<Image> normals = load_train_images(dataset);

  Architecture arch;
  arch.image_channels = dataset.geometry.channels;
  DenoiserModel model = init_model(arch, config.master_seed(), config.precision);
  model.check_geometry(dataset.geometry);

  const TrainingConfig tc = config.training_config();
  log << "train: " << normals.size() << " images, " << tc.steps << " steps, batch " << tc.batch_size << "\n";
  TrainingResult result = train(std::move(model), normals, tc, [&](std::size_t step, double loss) {
    if (step % 250 == 0 || step + 1 == tc.steps) log << "train: step " << step << " loss " << loss << "\n";
  });

  ensure_dir(config.out);
  save_checkpoint(result.model, config.out / "model.ckpt");
  std::string csv = "step,loss\n";
  char line[64];
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", i, result.loss_history[i]);
    csv += line;
  }
  write_text(config.out / "loss.csv", csv);

  const auto& h = result.loss_history;
  const std::size_t tail = std::min<std::size_t>(50, h.size());
  double tail_sum = 0.0;
  for (std::size_t i = h.size() - tail; i < h.size(); ++i) tail_sum += h[i];
  m.metrics = {{"steps", h.size()},
               {"initial_loss", h.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(h.front())},
               {"final_loss", tail == 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(tail_sum / tail)}};
  m.inputs["dataset"] = dataset_digest(dataset);
  m.extra = {{"parameters", result.model.parameter_count()}, {"widths", arch.widths}, {"kernel", arch.kernel}};
  finish(m, clock);
  return m;
}

RunManifest cmd_detect(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Stopwatch clock;
  RunManifest m = start_manifest(config);
  const DenoiserModel model = load_checkpoint(config.model);
  const DatasetManifest dataset = load_dataset(config.dataset, config.category);
  model.check_geometry(dataset.geometry);
  const NoiseSchedule schedule = config.schedule();
  const double beta_star = config.resolved_beta_star();
  const SeedStream master = SeedStream(config.master_seed()).child("detect");

  struct Job {
    std::string type;
    const TestEntry* entry;
  };
  std::vector<Job> jobs;
  for (const auto& [type, entries] : dataset.test) {
    ensure_dir(config.out / type);
    for (const TestEntry& e : entries) jobs.push_back({type, &e});
  }

  parallel_for(jobs.size(), config.worker_count(), [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string stem = job.entry->image.stem().string();
    const Image image = read_image(dataset.resolve(job.entry->image));
    const SeedStream stream = master.child(job.type).child(stem);
    const Detection d = detect(model, image, schedule, stream, config.weight);
    const ScoreMap baseline = baseline_score(model, image, beta_star, stream);

    ScoreSidecar sidecar;
    sidecar.weight = config.weight;
    sidecar.schedule = schedule.levels();
    sidecar.seed = config.master_seed();
    sidecar.source = job.entry->image.generic_string();
    auto emit = [&](const ScoreMap& map, const Image* raw) {
      ScoreSidecar s = sidecar;
      s.provenance = map.kind;
      if (map.kind == ScoreKind::baseline) s.beta_star = beta_star;
      if (raw) std::tie(s.raw_min, s.raw_max) = value_range(*raw);
      write_score_map(map, s, score_map_path(config.out, job.type, stem, map.kind));
    };
    emit(baseline, nullptr);
    emit(d.intensity_only, &d.raw_intensity.values);
    emit(d.uncertainty_only, &d.raw_uncertainty.values);
    emit(d.proposed, nullptr);
  });

  m.inputs["model"] = sha256_file(config.model);
  m.inputs["dataset"] = dataset_digest(dataset);
  m.extra = {{"images", jobs.size()},
             {"schedule", schedule.levels()},
             {"beta_star", beta_star},
             {"precision", to_string(model.precision())}};
  finish(m, clock);
  log << "detect: " << jobs.size() << " images, " << schedule.size() << " levels, " << clock.seconds() << " s\n";
  return m;
}

RunManifest cmd_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Stopwatch clock;
  RunManifest m = start_manifest(config);
  const DatasetManifest dataset = load_dataset(config.dataset, config.category);

  MetricsReport report;
  report.categories = dataset.defect_types();
  for (ScoreKind kind : detect_kinds) report.methods.push_back({method_name(kind), {}});
  nlohmann::ordered_json separation = nlohmann::ordered_json::object();

  for (const std::string& type : report.categories) {
    std::vector<LabeledScores> pooled(std::size(detect_kinds));
    double anomalous_sum = 0.0;
    double normal_sum = 0.0;
    std::size_t anomalous_count = 0;
    std::size_t normal_count = 0;
    for (const TestEntry& entry : dataset.test.at(type)) {
      const Image mask = load_mask(dataset, entry);
      const std::string stem = entry.image.stem().string();
      for (std::size_t k = 0; k < std::size(detect_kinds); ++k) {
        const fs::path path = score_map_path(config.scores, type, stem, detect_kinds[k]);
        if (!fs::exists(path)) throw LayoutError("missing score map " + path.string());
        const Image map = read_score_map(path);
        if (map.geometry() != mask.geometry()) throw LayoutError(path.string() + ": geometry does not match its mask");
        for (std::size_t p = 0; p < map.size(); ++p) pooled[k].add(map.data()[p], mask.data()[p] > 0.5);

        if (detect_kinds[k] != ScoreKind::intensity_only) continue;
        fs::path sidecar_path = path;
        sidecar_path.replace_extension(".json");
        const auto sidecar = nlohmann::json::parse(read_text(sidecar_path));
        if (!sidecar.contains("raw_range")) throw LayoutError(sidecar_path.string() + ": no raw_range");
        const double lo = sidecar["raw_range"][0].get<double>();
        const double hi = sidecar["raw_range"][1].get<double>();
        for (std::size_t p = 0; p < map.size(); ++p) {
          const double raw = lo + map.data()[p] * (hi - lo);
          if (mask.data()[p] > 0.5) {
            anomalous_sum += raw;
            ++anomalous_count;
          } else {
            normal_sum += raw;
            ++normal_count;
          }
        }
      }
    }
    for (std::size_t k = 0; k < pooled.size(); ++k) {
      report.methods[k].per_category.push_back({auroc(pooled[k]), average_precision(pooled[k])});
    }
    const double anomalous_mean = anomalous_count ? anomalous_sum / static_cast<double>(anomalous_count) : 0.0;
    const double normal_mean = normal_count ? normal_sum / static_cast<double>(normal_count) : 0.0;
    separation[type] = {{"anomalous_mean", anomalous_mean},
                        {"normal_mean", normal_mean},
                        {"ratio", normal_mean > 0.0 ? nlohmann::ordered_json(anomalous_mean / normal_mean)
                                                    : nlohmann::ordered_json(nullptr)}};
  }
  report.validate();

  ensure_dir(config.out);
  write_text(config.out / "metrics.json", to_json(report) + "\n");
  const std::string table = format_table(report);
  std::string text = table + "\nintensity trend, mean over anomalous / normal pixels\n";
  char line[160];
  for (const auto& [type, s] : separation.items()) {
    std::snprintf(line, sizeof line, "  %-12s %.6g / %.6g = %.3f\n", type.c_str(), s["anomalous_mean"].get<double>(),
                  s["normal_mean"].get<double>(), s["ratio"].is_null() ? 0.0 : s["ratio"].get<double>());
    text += line;
  }
  write_text(config.out / "metrics.txt", text);

  m.metrics = {{"report", nlohmann::ordered_json::parse(to_json(report))}, {"trend_separation", separation}};
  m.inputs["dataset"] = dataset_digest(dataset);
  std::string listing;
  for (const auto& [path, sum] : checksum_tree(config.scores)) listing += sum + "  " + path + "\n";
  m.inputs["scores"] = sha256_hex(std::vector<std::uint8_t>(listing.begin(), listing.end()));
  finish(m, clock);
  log << text;
  return m;
}

void cmd_report(const RunConfig& config, std::ostream& out) {
  config.validate();
  const MetricsReport report = report_from_json(read_text(config.input));
  std::string text = format_table(report);
  if (!config.reference.empty()) {
    const MetricsReport reference = report_from_json(read_text(config.reference));
    text += "\nagainst " + config.reference.filename().string() + "\n";
    for (const DeltaReport& d : compare(reference, report)) {
      text += "  " + d.variant + ": mAUROC " + format_points(d.mean_auroc_pp) + "  mAP " + format_points(d.mean_ap_pp);
      for (const MetricDelta& c : d.per_category) {
        text += "  | " + c.category + " " + format_points(c.auroc_pp) + "/" + format_points(c.ap_pp);
      }
      text += "\n";
    }
  }
  out << text;
  if (!config.out.empty()) write_text(config.out, text);
}

}  // namespace dta::cli
