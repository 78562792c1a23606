#include "dta/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dta/error.hpp"
#include "dta/pnm.hpp"

namespace dta {

NoiseSchedule::NoiseSchedule(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.size() < min_levels) {
    throw ConfigError("noise schedule needs at least " + std::to_string(min_levels) + " levels, got " +
                      std::to_string(levels_.size()));
  }
  if (levels_.front() != 0.0) throw ConfigError("noise schedule must start at 0");
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    if (!std::isfinite(levels_[k]) || !(levels_[k] > levels_[k - 1])) {
      throw ConfigError("noise schedule must be finite and strictly increasing");
    }
  }
}

NoiseSchedule NoiseSchedule::linear(double beta_max, std::size_t level_count) {
  if (!(beta_max > 0.0) || !std::isfinite(beta_max)) throw ConfigError("beta_max must be finite and > 0");
  if (level_count < min_levels) {
    throw ConfigError("noise schedule needs at least " + std::to_string(min_levels) + " levels, got " +
                      std::to_string(level_count));
  }
  std::vector<double> levels(level_count);
  const double last = static_cast<double>(level_count - 1);
  for (std::size_t k = 0; k < level_count; ++k) levels[k] = beta_max * static_cast<double>(k) / last;
  levels.back() = beta_max;
  return NoiseSchedule(std::move(levels));
}

NoiseSchedule default_schedule() { return NoiseSchedule::linear(0.4, 16); }

Image corrupt(const Image& image, double beta, Engine& engine) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("noise level must be finite and >= 0");
  Image out = image;
  if (beta == 0.0) return out;
  std::normal_distribution<double> noise(0.0, beta);
  for (double& v : out.data()) v += noise(engine);
  return out;
}

SeedStream level_stream(const SeedStream& image_stream, std::size_t level) {
  return image_stream.child("level").child(level);
}

TrendStack sweep(const DenoiserModel& model, const Image& image, const NoiseSchedule& schedule,
                 const SeedStream& stream) {
  model.check_geometry(image.geometry());
  if (!image.all_finite()) throw NumericError("sweep input contains non-finite values");

  DenoiserSession session(model);
  TrendStack stack;
  stack.geometry = image.geometry();
  stack.intensity.reserve(schedule.size());
  stack.uncertainty.reserve(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double beta = schedule[k];
    Engine engine = level_stream(stream, k).engine();
    Image reconstruction = session.predict_x0(corrupt(image, beta, engine), beta);
    stack.uncertainty.push_back(session.input_gradient(reconstruction, schedule.beta_max()).values);
    stack.intensity.push_back(k == 0 ? image : std::move(reconstruction));
  }
  return stack;
}

void dump_trend_stack(const TrendStack& stack, const NoiseSchedule& schedule, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json index;
  index["geometry"] = {{"height", stack.geometry.height},
                       {"width", stack.geometry.width},
                       {"channels", stack.geometry.channels}};
  index["levels"] = nlohmann::json::array();
  auto write_frame = [&](const Image& frame, const std::string& name) {
    auto [lo_it, hi_it] = std::minmax_element(frame.data().begin(), frame.data().end());
    const double lo = *lo_it;
    const double span = *hi_it > lo ? *hi_it - lo : 1.0;
    Image scaled = frame;
    for (double& v : scaled.data()) v = (v - lo) / span;
    write_image(scaled, dir / name, BitDepth::k16);
    return nlohmann::json{{"file", name}, {"min", lo}, {"max", lo + (*hi_it > lo ? span : 0.0)}};
  };
  for (std::size_t k = 0; k < stack.length(); ++k) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "%03zu", k);
    const std::string ext = stack.geometry.channels == 1 ? ".pgm" : ".ppm";
    nlohmann::json level;
    level["index"] = k;
    level["beta"] = schedule[k];
    level["intensity"] = write_frame(stack.intensity[k], std::string("intensity_") + suffix + ext);
    level["uncertainty"] = write_frame(stack.uncertainty[k], std::string("uncertainty_") + suffix + ext);
    index["levels"].push_back(std::move(level));
  }
  std::ofstream out(dir / "index.json");
  if (!out) throw IoError("cannot write " + (dir / "index.json").string());
  out << index.dump(2) << '\n';
}

}  // namespace dta
