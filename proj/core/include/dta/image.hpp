#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dta {

struct Geometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;

  std::size_t pixels() const noexcept { return height * width; }
  std::size_t size() const noexcept { return height * width * channels; }
  bool operator==(const Geometry&) const = default;

  std::string to_string() const;
};

/// Row-major H x W x C buffer of doubles, channels interleaved per pixel.
///
/// Nominal range is [0,1] but nothing clamps: noisy inputs, gradients and raw
/// trend magnitudes all live in this container. Any positive geometry is
/// representable; the denoiser imposes its own minimum size.
class Image {
 public:
  Image() = default;
  explicit Image(Geometry geometry, double fill = 0.0);
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  Image(Geometry geometry, std::vector<double> data);

  const Geometry& geometry() const noexcept { return geometry_; }
  std::size_t height() const noexcept { return geometry_.height; }
  std::size_t width() const noexcept { return geometry_.width; }
  std::size_t channels() const noexcept { return geometry_.channels; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t y, std::size_t x, std::size_t c = 0) {
    return data_[(y * geometry_.width + x) * geometry_.channels + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data_[(y * geometry_.width + x) * geometry_.channels + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  /// Exact element-wise equality (bitwise for finite values).
  bool operator==(const Image& other) const = default;

 private:
  Geometry geometry_{};
  std::vector<double> data_;
};

/// Per-pixel mean over channels; returns a single-channel image.
Image channel_mean(const Image& image);

/// Throws ConfigError unless every dimension is positive.
void validate_geometry(const Geometry& geometry);

}  // namespace dta
