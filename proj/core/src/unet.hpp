#pragma once

// Forward and reverse passes for the fixed denoiser graph. Feature maps are
// Eigen matrices with one row per channel and one column per pixel
// (row-major pixel order), so each pixel's channel vector is contiguous.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <vector>

#include "dta/denoiser.hpp"

namespace dta::detail {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// Buffers mapped into Eigen products. Eigen picks vectorized code paths from
/// pointer alignment, so a fixed alignment keeps results bit-reproducible.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// Noise-level preconditioning. The network sees (x - 0.5) * input_scale and
/// its correction is multiplied by output_scale, which vanishes at beta = 0.
struct Scaling {
  static constexpr double data_sd = 0.25;
  double input = 1.0;
  double output = 0.0;

  static Scaling at(double beta) {
    const double norm = std::sqrt(beta * beta + data_sd * data_sd);
    return Scaling{1.0 / norm, beta * data_sd / norm};
  }
};

struct Plane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t pixels() const noexcept { return height * width; }
};

template <typename T>
void im2col(const Matrix<T>& in, Plane in_plane, std::size_t kernel, std::size_t stride, Plane out_plane,
            Matrix<T>& columns) {
  const auto cin = static_cast<std::size_t>(in.rows());
  const auto pad = static_cast<long>(kernel / 2);
  columns.setZero(static_cast<Eigen::Index>(kernel * kernel * cin), static_cast<Eigen::Index>(out_plane.pixels()));
  for (std::size_t oy = 0; oy < out_plane.height; ++oy) {
    for (std::size_t ox = 0; ox < out_plane.width; ++ox) {
      T* dst = columns.col(static_cast<Eigen::Index>(oy * out_plane.width + ox)).data();
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        const long iy = static_cast<long>(oy * stride + ky) - pad;
        if (iy < 0 || iy >= static_cast<long>(in_plane.height)) continue;
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const long ix = static_cast<long>(ox * stride + kx) - pad;
          if (ix < 0 || ix >= static_cast<long>(in_plane.width)) continue;
          const T* src = in.col(iy * static_cast<long>(in_plane.width) + ix).data();
          T* block = dst + (ky * kernel + kx) * cin;
          for (std::size_t c = 0; c < cin; ++c) block[c] = src[c];
        }
      }
    }
  }
}

template <typename T>
void col2im(const Matrix<T>& columns, Plane in_plane, std::size_t kernel, std::size_t stride, Plane out_plane,
            Matrix<T>& in_grad) {
  const auto cin = static_cast<std::size_t>(in_grad.rows());
  const auto pad = static_cast<long>(kernel / 2);
  for (std::size_t oy = 0; oy < out_plane.height; ++oy) {
    for (std::size_t ox = 0; ox < out_plane.width; ++ox) {
      const T* src = columns.col(static_cast<Eigen::Index>(oy * out_plane.width + ox)).data();
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        const long iy = static_cast<long>(oy * stride + ky) - pad;
        if (iy < 0 || iy >= static_cast<long>(in_plane.height)) continue;
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const long ix = static_cast<long>(ox * stride + kx) - pad;
          if (ix < 0 || ix >= static_cast<long>(in_plane.width)) continue;
          T* dst = in_grad.col(iy * static_cast<long>(in_plane.width) + ix).data();
          const T* block = src + (ky * kernel + kx) * cin;
          for (std::size_t c = 0; c < cin; ++c) dst[c] += block[c];
        }
      }
    }
  }
}

template <typename T>
struct ConvRecord {
  Matrix<T> columns;
  Matrix<T> pre;   // conv output before the activation
  Matrix<T> post;  // after the activation (unused for the output layer)
  Matrix<T> in_grad;
  Plane in_plane;
  Plane out_plane;
};

/// Activations recorded by forward() plus scratch reused by backward().
/// Keeping one tape alive across calls avoids reallocating large buffers.
template <typename T>
struct Tape {
  std::vector<ConvRecord<T>> convs;  // indexed like the layer table
  std::vector<Plane> planes;         // per resolution level
  std::vector<Matrix<T>> merged;     // decoder inputs, by level
  std::vector<Matrix<T>> skip_grads;
  Matrix<T> input;
  Matrix<T> column_grad;
  Matrix<T> pre_grad;
  Matrix<T> hidden_grad;
  Matrix<T> scaled_grad;
  Matrix<T> output;
  Scaling scaling;
};

template <typename T>
class UNet {
 public:
  explicit UNet(const DenoiserModel& model) : arch_(model.architecture()), layers_(model.layers()) {
    auto params = model.parameters();
    params_.assign(params.begin(), params.end());
  }

  /// Runs the graph on `x` (C x P). Returns a reference into `tape`.
  const Matrix<T>& forward(const Matrix<T>& x, Plane plane, T beta, Tape<T>& tape) const {
    const std::size_t levels = arch_.widths.size();
    tape.convs.resize(layers_.size());
    tape.planes.resize(levels);
    tape.merged.resize(levels);
    tape.planes[0] = plane;
    for (std::size_t i = 1; i < levels; ++i) {
      tape.planes[i] = Plane{tape.planes[i - 1].height / 2, tape.planes[i - 1].width / 2};
    }

    tape.scaling = Scaling::at(static_cast<double>(beta));
    const auto input_scale = static_cast<T>(tape.scaling.input);
    tape.input.resize(x.rows() + 1, x.cols());
    tape.input.topRows(x.rows()) = (x.array() - T(0.5)) * input_scale;
    tape.input.row(x.rows()).setConstant(beta);

    std::size_t layer = 0;
    std::vector<const Matrix<T>*> skips(levels);
    skips[0] = &activate(layer++, tape.input, tape.planes[0], tape);
    for (std::size_t i = 1; i < levels; ++i) {
      skips[i] = &activate(layer++, *skips[i - 1], tape.planes[i - 1], tape);
    }
    const Matrix<T>* hidden = &activate(layer++, *skips[levels - 1], tape.planes[levels - 1], tape);
    for (std::size_t i = levels - 1; i >= 1; --i) {
      Matrix<T>& merged = tape.merged[i];
      upsample_into(*hidden, tape.planes[i], *skips[i - 1], merged);
      hidden = &activate(layer++, merged, tape.planes[i - 1], tape);
    }
    conv(layer++, *hidden, tape.planes[0], tape);
    tape.output = x + static_cast<T>(tape.scaling.output) * tape.convs.back().pre;
    return tape.output;
  }

  /// Reverse pass from dLoss/dOutput. Returns dLoss/dx for the image channels
  /// and, if `param_grad` is non-null, accumulates parameter gradients into it.
  Matrix<T> backward(Tape<T>& tape, const Matrix<T>& out_grad, T* param_grad) const {
    const std::size_t levels = arch_.widths.size();
    const std::size_t last = layers_.size() - 1;

    tape.skip_grads.resize(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      tape.skip_grads[i].setZero(static_cast<Eigen::Index>(arch_.widths[i]),
                                 static_cast<Eigen::Index>(tape.planes[i].pixels()));
    }

    tape.scaled_grad = static_cast<T>(tape.scaling.output) * out_grad;
    const Matrix<T>* upstream = &conv_backward(last, tape.scaled_grad, tape, param_grad);
    // Decoder layers were recorded for levels L-1..1, so walk them back 1..L-1.
    std::size_t layer = last;
    for (std::size_t i = 1; i < levels; ++i) {
      --layer;
      activation_backward(layer, *upstream, tape);
      const Matrix<T>& merged_grad = conv_backward(layer, tape.pre_grad, tape, param_grad);
      const auto up_rows = static_cast<Eigen::Index>(arch_.widths[i]);
      tape.skip_grads[i - 1] += merged_grad.bottomRows(merged_grad.rows() - up_rows);
      upsample_backward_into(merged_grad.topRows(up_rows), tape.planes[i], tape.hidden_grad);
      upstream = &tape.hidden_grad;
    }
    --layer;  // bottleneck
    activation_backward(layer, *upstream, tape);
    tape.skip_grads[levels - 1] += conv_backward(layer, tape.pre_grad, tape, param_grad);
    for (std::size_t i = levels - 1; i >= 1; --i) {
      --layer;
      activation_backward(layer, tape.skip_grads[i], tape);
      tape.skip_grads[i - 1] += conv_backward(layer, tape.pre_grad, tape, param_grad);
    }
    --layer;
    activation_backward(layer, tape.skip_grads[0], tape);
    const Matrix<T>& input_grad = conv_backward(layer, tape.pre_grad, tape, param_grad);
    return out_grad + static_cast<T>(tape.scaling.input) * input_grad.topRows(out_grad.rows());
  }

 private:
  using ConstMap = Eigen::Map<const Matrix<T>>;

  ConstMap weights(std::size_t layer) const {
    const LayerShape& shape = layers_[layer];
    return ConstMap(params_.data() + shape.weight_offset, static_cast<Eigen::Index>(shape.out_channels),
                    static_cast<Eigen::Index>(shape.kernel * shape.kernel * shape.in_channels));
  }

  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(std::size_t layer) const {
    const LayerShape& shape = layers_[layer];
    return Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(params_.data() + shape.bias_offset,
                                                                  static_cast<Eigen::Index>(shape.out_channels));
  }

  void conv(std::size_t layer, const Matrix<T>& in, Plane in_plane, Tape<T>& tape) const {
    const LayerShape& shape = layers_[layer];
    ConvRecord<T>& rec = tape.convs[layer];
    rec.in_plane = in_plane;
    rec.out_plane = Plane{in_plane.height / shape.stride, in_plane.width / shape.stride};
    im2col<T>(in, in_plane, shape.kernel, shape.stride, rec.out_plane, rec.columns);
    rec.pre.noalias() = weights(layer) * rec.columns;
    rec.pre.colwise() += bias(layer);
  }

  const Matrix<T>& activate(std::size_t layer, const Matrix<T>& in, Plane in_plane, Tape<T>& tape) const {
    conv(layer, in, in_plane, tape);
    ConvRecord<T>& rec = tape.convs[layer];
    if (arch_.activation == Activation::linear) {
      rec.post = rec.pre;
    } else {
      rec.post = rec.pre.unaryExpr([](T v) { return v / (T(1) + std::exp(-v)); });
    }
    return rec.post;
  }

  const Matrix<T>& conv_backward(std::size_t layer, const Matrix<T>& pre_grad, Tape<T>& tape, T* param_grad) const {
    const LayerShape& shape = layers_[layer];
    ConvRecord<T>& rec = tape.convs[layer];
    if (param_grad != nullptr) {
      Eigen::Map<Matrix<T>> w_grad(param_grad + shape.weight_offset, static_cast<Eigen::Index>(shape.out_channels),
                                   static_cast<Eigen::Index>(shape.kernel * shape.kernel * shape.in_channels));
      w_grad.noalias() += pre_grad * rec.columns.transpose();
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> b_grad(param_grad + shape.bias_offset,
                                                             static_cast<Eigen::Index>(shape.out_channels));
      b_grad += pre_grad.rowwise().sum();
    }
    tape.column_grad.noalias() = weights(layer).transpose() * pre_grad;
    rec.in_grad.setZero(static_cast<Eigen::Index>(shape.in_channels), static_cast<Eigen::Index>(rec.in_plane.pixels()));
    col2im<T>(tape.column_grad, rec.in_plane, shape.kernel, shape.stride, rec.out_plane, rec.in_grad);
    return rec.in_grad;
  }

  // Leaves dLoss/dPre of `layer` in tape.pre_grad.
  void activation_backward(std::size_t layer, const Matrix<T>& out_grad, Tape<T>& tape) const {
    if (arch_.activation == Activation::linear) {
      tape.pre_grad = out_grad;
      return;
    }
    const Matrix<T>& pre = tape.convs[layer].pre;
    // d/dv [v * s(v)] = s(v) * (1 + v * (1 - s(v)))
    tape.pre_grad = out_grad.binaryExpr(pre, [](T g, T v) {
      const T s = T(1) / (T(1) + std::exp(-v));
      return g * s * (T(1) + v * (T(1) - s));
    });
  }

  static void upsample_into(const Matrix<T>& low, Plane low_plane, const Matrix<T>& skip, Matrix<T>& merged) {
    const std::size_t out_width = low_plane.width * 2;
    const auto up_rows = low.rows();
    merged.resize(up_rows + skip.rows(), skip.cols());
    for (std::size_t y = 0; y < low_plane.height * 2; ++y) {
      for (std::size_t x = 0; x < out_width; ++x) {
        merged.col(static_cast<Eigen::Index>(y * out_width + x)).head(up_rows) =
            low.col(static_cast<Eigen::Index>((y / 2) * low_plane.width + x / 2));
      }
    }
    merged.bottomRows(skip.rows()) = skip;
  }

  template <typename Block>
  static void upsample_backward_into(const Block& high_grad, Plane low_plane, Matrix<T>& low_grad) {
    const std::size_t out_width = low_plane.width * 2;
    low_grad.setZero(high_grad.rows(), static_cast<Eigen::Index>(low_plane.pixels()));
    for (std::size_t y = 0; y < low_plane.height * 2; ++y) {
      for (std::size_t x = 0; x < out_width; ++x) {
        low_grad.col(static_cast<Eigen::Index>((y / 2) * low_plane.width + x / 2)) +=
            high_grad.col(static_cast<Eigen::Index>(y * out_width + x));
      }
    }
  }

  Architecture arch_;
  std::vector<LayerShape> layers_;
  AlignedVector<T> params_;
};

/// Packs an image into a channels x pixels matrix.
template <typename T>
Matrix<T> to_matrix(const Image& image) {
  Matrix<T> out(static_cast<Eigen::Index>(image.channels()), static_cast<Eigen::Index>(image.height() * image.width()));
  auto data = image.data();
  T* dst = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) dst[i] = static_cast<T>(data[i]);
  return out;
}

template <typename T>
Image to_image(const Matrix<T>& m, const Geometry& geometry) {
  std::vector<double> values(geometry.size());
  const T* src = m.data();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(src[i]);
  return Image(geometry, std::move(values));
}

}  // namespace dta::detail
