#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "dta/denoiser.hpp"
#include "dta/image.hpp"
#include "dta/rng.hpp"

namespace dta {

/// Ordered noise levels 0 = beta_0 < beta_1 < ... < beta_K = beta_max.
class NoiseSchedule {
 public:
  static constexpr std::size_t min_levels = 4;

  /// Evenly spaced levels from 0 to beta_max inclusive.
  static NoiseSchedule linear(double beta_max, std::size_t level_count);
  /// Validates and adopts explicit levels.
  explicit NoiseSchedule(std::vector<double> levels);

  const std::vector<double>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double beta_max() const noexcept { return levels_.back(); }
  double operator[](std::size_t k) const { return levels_[k]; }

 private:
  std::vector<double> levels_;
};

/// Default sweep: 16 levels up to 0.4.
NoiseSchedule default_schedule();

/// x + n with n ~ N(0, beta^2) i.i.d. per element. beta == 0 returns x unchanged
/// and draws nothing from the engine.
Image corrupt(const Image& image, double beta, Engine& engine);

/// Per-pixel sequences gathered across one sweep.
///
/// intensity[0] is the untouched input; intensity[k] (k >= 1) is the
/// reconstruction at level k. uncertainty[k] is the input gradient of the
/// model evaluated at the level-k reconstruction, including k = 0. Every
/// gradient is taken with the model conditioned on beta_max, so the sequence
/// varies only through the reconstruction it is evaluated at.
struct TrendStack {
  Geometry geometry;
  std::vector<Image> intensity;
  std::vector<Image> uncertainty;

  std::size_t length() const noexcept { return intensity.size(); }
};

/// Stream used for the noise at schedule index `level`.
SeedStream level_stream(const SeedStream& image_stream, std::size_t level);

/// Corrupt, reconstruct and differentiate at every scheduled level. Level k
/// draws its noise from level_stream(stream, k).
TrendStack sweep(const DenoiserModel& model, const Image& image, const NoiseSchedule& schedule,
                 const SeedStream& stream);

/// Writes every stack entry as a 16-bit PNM (one per level and kind) plus
/// `index.json` naming levels, files and the value range each file maps onto.
void dump_trend_stack(const TrendStack& stack, const NoiseSchedule& schedule, const std::filesystem::path& dir);

}  // namespace dta
