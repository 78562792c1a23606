#pragma once

#include <span>
#include <string>
#include <vector>

#include "dta/denoiser.hpp"
#include "dta/image.hpp"
#include "dta/rng.hpp"
#include "dta/sweep.hpp"

namespace dta {

enum class TrendKind { intensity, uncertainty };

/// Which method produced a score map.
enum class ScoreKind { proposed, baseline, intensity_only, uncertainty_only };

std::string to_string(TrendKind kind);
std::string to_string(ScoreKind kind);

/// Single-channel map of non-negative trend magnitudes.
struct TrendMap {
  Image values;
  TrendKind kind = TrendKind::intensity;
};

/// Single-channel map with values in [0,1].
struct ScoreMap {
  Image values;
  ScoreKind kind = ScoreKind::proposed;
};

/// |X_1| for X_1 = sum_k seq[k] * exp(-2*pi*i*k/N): the lowest non-DC bin.
/// Throws ConfigError for N < 4.
double second_fourier_magnitude(std::span<const double> sequence);

/// Per pixel and channel, |X_1| of the chosen sequence, then averaged over channels.
TrendMap trend_map(const TrendStack& stack, TrendKind kind);

/// (v - min) / (max - min); a constant input maps to all zeros.
std::vector<double> normalize01(std::span<const double> values);
Image normalize01(const Image& map);

/// trend_x * trend_u^weight per pixel. weight = 1 is the plain product.
ScoreMap fuse(const Image& intensity_norm, const Image& uncertainty_norm, double weight);

struct Detection {
  ScoreMap proposed;
  ScoreMap intensity_only;
  ScoreMap uncertainty_only;
  TrendMap raw_intensity;
  TrendMap raw_uncertainty;
};

/// Full trend pipeline: sweep, both trend maps, per-image normalization, fusion.
Detection detect(const DenoiserModel& model, const Image& image, const NoiseSchedule& schedule,
                 const SeedStream& stream, double weight = 1.0);

/// Same as detect() but starting from an existing sweep.
Detection detect_from_stack(const TrendStack& stack, double weight = 1.0);

/// Single-level reconstruction error |x - x0*(x_beta)|, channel-averaged and
/// normalized to [0,1]. Noise comes from stream.child("baseline").
ScoreMap baseline_score(const DenoiserModel& model, const Image& image, double beta_star, const SeedStream& stream);

}  // namespace dta
