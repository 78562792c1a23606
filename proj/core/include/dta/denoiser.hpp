#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dta/image.hpp"

namespace dta {

enum class Activation : std::uint32_t { silu = 0, linear = 1 };
enum class Precision : std::uint32_t { f64 = 0, f32 = 1 };

std::string to_string(Precision precision);
Precision parse_precision(const std::string& text);

/// Shape of the noise-conditioned encoder/decoder.
///
/// `widths[i]` is the feature width at resolution level i; level 0 is full
/// resolution and every further level halves it with a stride-2 convolution.
/// The decoder mirrors the encoder with nearest upsampling and a skip
/// concatenation per level. A constant beta channel is appended to the input
/// and the network output is added to the input (global residual).
///
/// The network sees (x - 0.5) / sqrt(beta^2 + s^2) and its correction is
/// scaled by beta * s / sqrt(beta^2 + s^2) with s = 0.25, so the prediction
/// is exactly x at beta = 0 and the correction grows with the noise level.
struct Architecture {
  std::size_t image_channels = 1;
  std::vector<std::size_t> widths{16, 32, 32};
  std::size_t kernel = 3;
  Activation activation = Activation::silu;

  /// Throws ConfigError for zero-sized layers or an even kernel.
  void validate() const;
  /// Image height and width must be multiples of this.
  std::size_t size_multiple() const;
  bool operator==(const Architecture&) const = default;
};

struct LayerShape {
  std::string name;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t weight_offset = 0;  // Cout x (k*k*Cin), column-major
  std::size_t bias_offset = 0;

  std::size_t weight_count() const noexcept { return out_channels * kernel * kernel * in_channels; }
  bool operator==(const LayerShape&) const = default;
};

/// Layer table in parameter order: encoder levels, bottleneck, decoder levels, output.
std::vector<LayerShape> layer_table(const Architecture& arch);

/// Parameters of the fixed convolutional denoiser, stored flat in f64.
///
/// Under Precision::f32 every stored value is exactly representable as a
/// float and all arithmetic runs in single precision.
class DenoiserModel {
 public:
  explicit DenoiserModel(Architecture arch, Precision precision = Precision::f64);

  const Architecture& architecture() const noexcept { return arch_; }
  Precision precision() const noexcept { return precision_; }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }
  /// Throws ConfigError on size mismatch and NumericError on non-finite values.
  void set_parameters(std::vector<double> values);

  /// Smallest accepted side length.
  static constexpr std::size_t min_side = 8;
  /// Throws ConfigError unless the model can run on images of this geometry.
  void check_geometry(const Geometry& geometry) const;
  bool accepts(const Geometry& geometry) const;

  bool operator==(const DenoiserModel&) const = default;

 private:
  Architecture arch_;
  Precision precision_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

/// Deterministic initialization. The output layer starts at zero, so the
/// fresh model is exactly the identity map through the residual skip.
DenoiserModel init_model(const Architecture& arch, std::uint64_t seed, Precision precision = Precision::f64);

/// One-shot clean-image estimate from a noisy input at noise level `beta`.
Image predict_x0(const DenoiserModel& model, const Image& noisy, double beta);

/// Per-pixel |d(sum of all outputs)/d(input pixel)|, same geometry as the image.
struct GradientMap {
  Image values;
};

GradientMap input_gradient(const DenoiserModel& model, const Image& image, double beta);

/// Evaluates one model repeatedly while reusing scratch buffers. The model
/// is copied in, so the session stays valid on its own. Not thread-safe: use
/// one session per worker.
class DenoiserSession {
 public:
  explicit DenoiserSession(const DenoiserModel& model);
  ~DenoiserSession();
  DenoiserSession(DenoiserSession&&) noexcept;
  DenoiserSession& operator=(DenoiserSession&&) noexcept;

  const DenoiserModel& model() const noexcept;
  Image predict_x0(const Image& noisy, double beta);
  GradientMap input_gradient(const Image& image, double beta);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Mean squared error between predict_x0(noisy) and `clean`. When
/// `param_gradient` is non-null it receives dLoss/dParams (resized to match).
double reconstruction_loss(const DenoiserModel& model, const Image& noisy, const Image& clean, double beta,
                           std::vector<double>* param_gradient = nullptr);

struct TrainingConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 4;
  double learning_rate = 0.05;
  double beta_min = 0.0;
  double beta_max = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingResult {
  DenoiserModel model;
  std::vector<double> loss_history;  // one batch-mean loss per step
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

/// Plain SGD on normal images. Each step samples a batch with replacement,
/// draws beta ~ U[beta_min, beta_max] per sample, corrupts with additive
/// Gaussian noise and descends the MSE against the clean image.
TrainingResult train(DenoiserModel model, std::span<const Image> normals, const TrainingConfig& config,
                     const StepCallback& on_step = {});

}  // namespace dta
