#include "dta/denoiser.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "dta/error.hpp"
#include "dta/rng.hpp"
#include "dta/sweep.hpp"
#include "unet.hpp"

namespace dta {

std::string to_string(Precision precision) { return precision == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& text) {
  if (text == "f64" || text == "float64") return Precision::f64;
  if (text == "f32" || text == "float32") return Precision::f32;
  throw ConfigError("unknown precision '" + text + "' (expected f64 or f32)");
}

void Architecture::validate() const {
  if (image_channels == 0) throw ConfigError("architecture: image_channels must be positive");
  if (widths.empty()) throw ConfigError("architecture: at least one resolution level is required");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("architecture: zero-width layer");
  }
  if (kernel == 0 || kernel % 2 == 0) throw ConfigError("architecture: kernel size must be odd and positive");
  if (widths.size() > 6) throw ConfigError("architecture: at most 6 resolution levels are supported");
}

std::size_t Architecture::size_multiple() const { return std::size_t{1} << (widths.size() - 1); }

std::vector<LayerShape> layer_table(const Architecture& arch) {
  arch.validate();
  std::vector<LayerShape> layers;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t in, std::size_t out, std::size_t stride) {
    LayerShape shape{std::move(name), in, out, arch.kernel, stride, offset, 0};
    offset += shape.weight_count();
    shape.bias_offset = offset;
    offset += out;
    layers.push_back(std::move(shape));
  };

  const auto& w = arch.widths;
  const std::size_t levels = w.size();
  add("enc0", arch.image_channels + 1, w[0], 1);
  for (std::size_t i = 1; i < levels; ++i) add("enc" + std::to_string(i), w[i - 1], w[i], 2);
  add("mid", w[levels - 1], w[levels - 1], 1);
  for (std::size_t i = levels - 1; i >= 1; --i) add("dec" + std::to_string(i), w[i] + w[i - 1], w[i - 1], 1);
  add("out", w[0], arch.image_channels, 1);
  return layers;
}

namespace {

std::size_t total_parameters(const std::vector<LayerShape>& layers) {
  const LayerShape& last = layers.back();
  return last.bias_offset + last.out_channels;
}

double round_to(Precision precision, double v) {
  return precision == Precision::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

}  // namespace

DenoiserModel::DenoiserModel(Architecture arch, Precision precision)
    : arch_(std::move(arch)), precision_(precision), layers_(layer_table(arch_)) {
  params_.assign(total_parameters(layers_), 0.0);
}

void DenoiserModel::set_parameters(std::vector<double> values) {
  if (values.size() != params_.size()) {
    throw ConfigError("parameter count " + std::to_string(values.size()) + " does not match architecture (" +
                      std::to_string(params_.size()) + ")");
  }
  for (double& v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite model parameter");
    v = round_to(precision_, v);
  }
  params_ = std::move(values);
}

bool DenoiserModel::accepts(const Geometry& g) const {
  const std::size_t m = arch_.size_multiple();
  return g.channels == arch_.image_channels && g.height >= min_side && g.width >= min_side && g.height % m == 0 &&
         g.width % m == 0;
}

void DenoiserModel::check_geometry(const Geometry& g) const {
  if (!accepts(g)) {
    throw ConfigError("image geometry " + g.to_string() + " incompatible with model (channels " +
                      std::to_string(arch_.image_channels) + ", sides >= " + std::to_string(min_side) +
                      " and multiples of " + std::to_string(arch_.size_multiple()) + ")");
  }
}

DenoiserModel init_model(const Architecture& arch, std::uint64_t seed, Precision precision) {
  DenoiserModel model(arch, precision);
  Engine engine = SeedStream(seed).child("init").engine();
  std::vector<double> params(model.parameter_count(), 0.0);
  const auto& layers = model.layers();
  // He-style normal init; the output layer and all biases stay zero.
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const LayerShape& shape = layers[l];
    const double fan_in = static_cast<double>(shape.kernel * shape.kernel * shape.in_channels);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (std::size_t i = 0; i < shape.weight_count(); ++i) params[shape.weight_offset + i] = dist(engine);
  }
  model.set_parameters(std::move(params));
  return model;
}

namespace {

void require_finite(const Image& image, const char* what) {
  if (!image.all_finite()) throw NumericError(std::string(what) + " contains non-finite values");
}

void require_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("noise level must be finite and >= 0");
}

template <typename T>
double loss_impl(const detail::UNet<T>& net, const Image& noisy, const Image& clean, double beta, double grad_scale,
                 detail::AlignedVector<T>* grad, detail::Tape<T>& tape) {
  const detail::Plane plane{noisy.height(), noisy.width()};
  const detail::Matrix<T>& y = net.forward(detail::to_matrix<T>(noisy), plane, static_cast<T>(beta), tape);
  const detail::Matrix<T> diff = y - detail::to_matrix<T>(clean);
  const double n = static_cast<double>(diff.size());
  const double loss = static_cast<double>(diff.squaredNorm()) / n;
  if (grad != nullptr) {
    const detail::Matrix<T> out_grad = diff * static_cast<T>(2.0 * grad_scale / n);
    net.backward(tape, out_grad, grad->data());
  }
  return loss;
}

template <typename T>
struct Evaluator {
  explicit Evaluator(const DenoiserModel& model) : net(model) {}

  Image predict(const Image& noisy, double beta) {
    const detail::Plane plane{noisy.height(), noisy.width()};
    return detail::to_image<T>(net.forward(detail::to_matrix<T>(noisy), plane, static_cast<T>(beta), tape),
                               noisy.geometry());
  }

  Image gradient(const Image& image, double beta) {
    const detail::Plane plane{image.height(), image.width()};
    const detail::Matrix<T>& y = net.forward(detail::to_matrix<T>(image), plane, static_cast<T>(beta), tape);
    ones.setOnes(y.rows(), y.cols());
    return detail::to_image<T>(net.backward(tape, ones, nullptr).cwiseAbs(), image.geometry());
  }

  detail::UNet<T> net;
  detail::Tape<T> tape;
  detail::Matrix<T> ones;
};

}  // namespace

struct DenoiserSession::Impl {
  explicit Impl(const DenoiserModel& m) : model(m) {
    if (m.precision() == Precision::f32) {
      f32.emplace(model);
    } else {
      f64.emplace(model);
    }
  }

  DenoiserModel model;
  std::optional<Evaluator<double>> f64;
  std::optional<Evaluator<float>> f32;
};

DenoiserSession::DenoiserSession(const DenoiserModel& model) : impl_(std::make_unique<Impl>(model)) {}
DenoiserSession::~DenoiserSession() = default;
DenoiserSession::DenoiserSession(DenoiserSession&&) noexcept = default;
DenoiserSession& DenoiserSession::operator=(DenoiserSession&&) noexcept = default;

const DenoiserModel& DenoiserSession::model() const noexcept { return impl_->model; }

Image DenoiserSession::predict_x0(const Image& noisy, double beta) {
  impl_->model.check_geometry(noisy.geometry());
  require_beta(beta);
  require_finite(noisy, "denoiser input");
  return impl_->f64 ? impl_->f64->predict(noisy, beta) : impl_->f32->predict(noisy, beta);
}

GradientMap DenoiserSession::input_gradient(const Image& image, double beta) {
  impl_->model.check_geometry(image.geometry());
  require_beta(beta);
  require_finite(image, "gradient input");
  return GradientMap{impl_->f64 ? impl_->f64->gradient(image, beta) : impl_->f32->gradient(image, beta)};
}

Image predict_x0(const DenoiserModel& model, const Image& noisy, double beta) {
  return DenoiserSession(model).predict_x0(noisy, beta);
}

GradientMap input_gradient(const DenoiserModel& model, const Image& image, double beta) {
  return DenoiserSession(model).input_gradient(image, beta);
}

double reconstruction_loss(const DenoiserModel& model, const Image& noisy, const Image& clean, double beta,
                           std::vector<double>* param_gradient) {
  model.check_geometry(noisy.geometry());
  if (clean.geometry() != noisy.geometry()) throw ConfigError("clean and noisy geometries differ");
  require_beta(beta);
  require_finite(noisy, "denoiser input");
  if (model.precision() == Precision::f32) {
    detail::UNet<float> net(model);
    detail::AlignedVector<float> grad(param_gradient != nullptr ? model.parameter_count() : 0, 0.0f);
    detail::Tape<float> tape;
    const double loss =
        loss_impl<float>(net, noisy, clean, beta, 1.0, param_gradient != nullptr ? &grad : nullptr, tape);
    if (param_gradient != nullptr) param_gradient->assign(grad.begin(), grad.end());
    return loss;
  }
  detail::UNet<double> net(model);
  detail::AlignedVector<double> grad(param_gradient != nullptr ? model.parameter_count() : 0, 0.0);
  detail::Tape<double> tape;
  const double loss =
      loss_impl<double>(net, noisy, clean, beta, 1.0, param_gradient != nullptr ? &grad : nullptr, tape);
  if (param_gradient != nullptr) param_gradient->assign(grad.begin(), grad.end());
  return loss;
}

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("training: batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("training: learning rate must be > 0");
  if (!(beta_min >= 0.0) || !(beta_max >= beta_min) || !std::isfinite(beta_max)) {
    throw ConfigError("training: require 0 <= beta_min <= beta_max");
  }
}

namespace {

template <typename T>
void train_loop(DenoiserModel& model, std::span<const Image> normals, const TrainingConfig& config,
                std::vector<double>& history, const StepCallback& on_step) {
  Engine engine = SeedStream(config.seed).child("train").engine();
  std::uniform_int_distribution<std::size_t> pick(0, normals.size() - 1);
  std::uniform_real_distribution<double> level(config.beta_min, config.beta_max);
  const double scale = 1.0 / static_cast<double>(config.batch_size);
  detail::AlignedVector<T> grad(model.parameter_count());
  detail::Tape<T> tape;

  for (std::size_t step = 0; step < config.steps; ++step) {
    detail::UNet<T> net(model);
    std::fill(grad.begin(), grad.end(), T(0));
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const Image& clean = normals[pick(engine)];
      const double beta = config.beta_max > config.beta_min ? level(engine) : config.beta_min;
      const Image noisy = corrupt(clean, beta, engine);
      batch_loss += loss_impl<T>(net, noisy, clean, beta, scale, &grad, tape);
    }
    batch_loss *= scale;
    if (!std::isfinite(batch_loss)) throw NumericError("training loss is not finite", step);

    auto params = model.parameters();
    std::vector<double> next(params.begin(), params.end());
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] -= config.learning_rate * static_cast<double>(grad[i]);
      if (!std::isfinite(next[i])) throw NumericError("parameter update is not finite", step);
    }
    model.set_parameters(std::move(next));
    history.push_back(batch_loss);
    if (on_step) on_step(step, batch_loss);
  }
}

}  // namespace

TrainingResult train(DenoiserModel model, std::span<const Image> normals, const TrainingConfig& config,
                     const StepCallback& on_step) {
  config.validate();
  if (normals.empty()) throw ConfigError("training: dataset is empty");
  const Geometry geometry = normals.front().geometry();
  for (const Image& image : normals) {
    if (image.geometry() != geometry) throw ConfigError("training: images have mixed geometry");
    require_finite(image, "training image");
  }
  model.check_geometry(geometry);

  std::vector<double> history;
  history.reserve(config.steps);
  if (model.precision() == Precision::f32) {
    train_loop<float>(model, normals, config, history, on_step);
  } else {
    train_loop<double>(model, normals, config, history, on_step);
  }
  return TrainingResult{std::move(model), std::move(history)};
}

}  // namespace dta
