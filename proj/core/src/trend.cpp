#include "dta/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dta/error.hpp"

namespace dta {

std::string to_string(TrendKind kind) { return kind == TrendKind::intensity ? "intensity" : "uncertainty"; }

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::proposed: return "proposed";
    case ScoreKind::baseline: return "baseline";
    case ScoreKind::intensity_only: return "intensity";
    case ScoreKind::uncertainty_only: return "uncertainty";
  }
  return "unknown";
}

namespace {

struct Twiddles {
  explicit Twiddles(std::size_t n) : cos(n), sin(n) {
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      cos[k] = std::cos(angle);
      sin[k] = std::sin(angle);
    }
  }

  // The twiddles sum to zero, so subtracting seq[0] leaves X_1 unchanged
  // while making constant sequences come out as exactly 0.
  double magnitude(std::span<const double> seq) const {
    const double offset = seq[0];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 1; k < seq.size(); ++k) {
      const double v = seq[k] - offset;
      re += v * cos[k];
      im -= v * sin[k];
    }
    return std::hypot(re, im);
  }

  std::vector<double> cos;
  std::vector<double> sin;
};

void check_length(std::size_t n) {
  if (n < NoiseSchedule::min_levels) {
    throw ConfigError("trend sequence needs at least " + std::to_string(NoiseSchedule::min_levels) +
                      " samples, got " + std::to_string(n));
  }
}

}  // namespace

double second_fourier_magnitude(std::span<const double> sequence) {
  check_length(sequence.size());
  for (double v : sequence) {
    if (!std::isfinite(v)) throw NumericError("trend sequence contains non-finite values");
  }
  return Twiddles(sequence.size()).magnitude(sequence);
}

TrendMap trend_map(const TrendStack& stack, TrendKind kind) {
  const auto& frames = kind == TrendKind::intensity ? stack.intensity : stack.uncertainty;
  const std::size_t n = frames.size();
  check_length(n);
  const Geometry g = stack.geometry;
  for (const Image& f : frames) {
    if (f.geometry() != g) throw ConfigError("trend stack frame geometry mismatch");
  }

  const Twiddles twiddles(n);
  Image out(g.height, g.width, 1);
  std::vector<double> seq(n);
  const double inv_channels = 1.0 / static_cast<double>(g.channels);
  for (std::size_t p = 0; p < g.pixels(); ++p) {
    double sum = 0.0;
    for (std::size_t c = 0; c < g.channels; ++c) {
      const std::size_t idx = p * g.channels + c;
      for (std::size_t k = 0; k < n; ++k) seq[k] = frames[k].data()[idx];
      sum += twiddles.magnitude(seq);
    }
    out.data()[p] = g.channels == 1 ? sum : sum * inv_channels;
  }
  if (!out.all_finite()) throw NumericError("trend map contains non-finite values");
  return TrendMap{std::move(out), kind};
}

std::vector<double> normalize01(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - min;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] == *hi ? 1.0 : (values[i] - min) / range;
  }
  return out;
}

Image normalize01(const Image& map) { return Image(map.geometry(), normalize01(map.data())); }

ScoreMap fuse(const Image& intensity_norm, const Image& uncertainty_norm, double weight) {
  if (intensity_norm.geometry() != uncertainty_norm.geometry()) {
    throw ConfigError("fuse: geometry mismatch " + intensity_norm.geometry().to_string() + " vs " +
                      uncertainty_norm.geometry().to_string());
  }
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw ConfigError("fuse: weight must be finite and >= 0");
  Image out(intensity_norm.geometry());
  auto x = intensity_norm.data();
  auto u = uncertainty_norm.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double uw = weight == 1.0 ? u[i] : std::pow(u[i], weight);
    dst[i] = std::clamp(x[i] * uw, 0.0, 1.0);
  }
  return ScoreMap{std::move(out), ScoreKind::proposed};
}

Detection detect_from_stack(const TrendStack& stack, double weight) {
  TrendMap raw_x = trend_map(stack, TrendKind::intensity);
  TrendMap raw_u = trend_map(stack, TrendKind::uncertainty);
  Image x_norm = normalize01(raw_x.values);
  Image u_norm = normalize01(raw_u.values);
  ScoreMap proposed = fuse(x_norm, u_norm, weight);
  return Detection{std::move(proposed), ScoreMap{std::move(x_norm), ScoreKind::intensity_only},
                   ScoreMap{std::move(u_norm), ScoreKind::uncertainty_only}, std::move(raw_x), std::move(raw_u)};
}

Detection detect(const DenoiserModel& model, const Image& image, const NoiseSchedule& schedule,
                 const SeedStream& stream, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw ConfigError("detect: weight must be finite and >= 0");
  return detect_from_stack(sweep(model, image, schedule, stream), weight);
}

ScoreMap baseline_score(const DenoiserModel& model, const Image& image, double beta_star, const SeedStream& stream) {
  if (!(beta_star > 0.0) || !std::isfinite(beta_star)) throw ConfigError("baseline: beta_star must be > 0");
  Engine engine = stream.child("baseline").engine();
  const Image reconstruction = predict_x0(model, corrupt(image, beta_star, engine), beta_star);
  Image error(image.geometry());
  auto src = image.data();
  auto rec = reconstruction.data();
  auto dst = error.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::abs(src[i] - rec[i]);
  return ScoreMap{normalize01(channel_mean(error)), ScoreKind::baseline};
}

}  // namespace dta
