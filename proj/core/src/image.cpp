#include "dta/image.hpp"

#include <algorithm>
#include <cmath>

#include "dta/error.hpp"

namespace dta {

std::string Geometry::to_string() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

void validate_geometry(const Geometry& geometry) {
  if (geometry.height == 0 || geometry.width == 0 || geometry.channels == 0) {
    throw ConfigError("invalid image geometry " + geometry.to_string());
  }
}

Image::Image(Geometry geometry, double fill) : geometry_(geometry) {
  validate_geometry(geometry);
  data_.assign(geometry.size(), fill);
}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : Image(Geometry{height, width, channels}, fill) {}

Image::Image(Geometry geometry, std::vector<double> data) : geometry_(geometry), data_(std::move(data)) {
  validate_geometry(geometry);
  if (data_.size() != geometry.size()) {
    throw ConfigError("image data length " + std::to_string(data_.size()) + " does not match geometry " +
                      geometry.to_string());
  }
}

bool Image::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image channel_mean(const Image& image) {
  const std::size_t channels = image.channels();
  Image out(image.height(), image.width(), 1);
  auto src = image.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += src[p * channels + c];
    dst[p] = channels == 1 ? sum : sum / static_cast<double>(channels);
  }
  return out;
}

}  // namespace dta
