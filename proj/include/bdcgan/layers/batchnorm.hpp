/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BDCGAN_LAYERS_BATCHNORM_HPP_
#define BDCGAN_LAYERS_BATCHNORM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdcgan/binkernels.hpp"
#include "bdcgan/errors.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

constexpr double kBatchNormEps = 1e-4;
constexpr double kMinFoldScale = 1e-12;

// Batchnorm followed by an activation: sign() when binarized (B-BNA), ReLU
// otherwise. Statistics are per channel; an input [batch, C, spatial...] is
// normalized over batch and spatial positions.
template <typename R>
struct BatchNormLayer {
  Tensor<R> gamma;         // [C]
  Tensor<R> beta;          // [C]
  Tensor<R> running_mean;  // [C]
  Tensor<R> running_var;   // [C], biased
  bool binarized = false;
  double eps = kBatchNormEps;

  static BatchNormLayer make(std::size_t channels, bool binarized) {
    return {Tensor<R>({channels}, R(1)), Tensor<R>({channels}, R(0)), Tensor<R>({channels}, R(0)),
            Tensor<R>({channels}, R(1)), binarized, kBatchNormEps};
  }

  std::size_t channels() const { return gamma.size(); }
  double inv_std(std::size_t c) const {
    return 1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps);
  }
};

// One neuron's parameter set: output = gamma * (a - mean) * inv_std + shift.
struct BnNeuron {
  double gamma = 1.0;
  double mean = 0.0;
  double inv_std = 1.0;
  double shift = 0.0;

  double apply(double a) const { return gamma * (a - mean) * inv_std + shift; }
};

enum class ThresholdDir : std::uint8_t {
  kGreaterEqual = 1,  // +1 iff a >= tau_b (gamma * inv_std > 0)
  kLessEqual = 0,     // +1 iff a <= tau_b (gamma * inv_std < 0)
};

struct FoldedThreshold {
  double tau = 0.0;
  std::int32_t tau_b = 0;
  ThresholdDir dir = ThresholdDir::kGreaterEqual;

  friend bool operator==(const FoldedThreshold&, const FoldedThreshold&) = default;
};

// Per-layer parameter sets together with their folded thresholds.
struct BNParams {
  std::vector<BnNeuron> neurons;
  std::vector<FoldedThreshold> thresholds;
};

// Solve gamma * (tau - mean) * inv_std + shift = 0 and round the root
// half away from zero. Throws ValueError when |gamma * inv_std| < 1e-12.
inline FoldedThreshold bna_fold(const BnNeuron& n) {
  const double scale = n.gamma * n.inv_std;
  if (!(std::abs(scale) >= kMinFoldScale)) throw ValueError("degenerate batchnorm neuron");
  FoldedThreshold t;
  t.tau = n.mean - n.shift / scale;
  const double rounded = std::round(t.tau);
  if (!(rounded >= INT32_MIN && rounded <= INT32_MAX))
    throw ValueError("batchnorm threshold out of int32 range");
  t.tau_b = static_cast<std::int32_t>(rounded);
  t.dir = scale > 0 ? ThresholdDir::kGreaterEqual : ThresholdDir::kLessEqual;
  return t;
}

inline std::int32_t threshold_activate(std::int32_t a, const FoldedThreshold& t) {
  const bool on = t.dir == ThresholdDir::kGreaterEqual ? a >= t.tau_b : a <= t.tau_b;
  return on ? 1 : -1;
}

template <typename R>
BnNeuron bn_neuron(const BatchNormLayer<R>& layer, std::size_t c) {
  return {static_cast<double>(layer.gamma[c]), static_cast<double>(layer.running_mean[c]),
          layer.inv_std(c), static_cast<double>(layer.beta[c])};
}

// Fold every neuron; `name` identifies the layer in DegenerateNeuronError.
template <typename R>
BNParams bn_params(const BatchNormLayer<R>& layer, const std::string& name) {
  BNParams p;
  p.neurons.reserve(layer.channels());
  p.thresholds.reserve(layer.channels());
  for (std::size_t c = 0; c < layer.channels(); ++c) {
    p.neurons.push_back(bn_neuron(layer, c));
    try {
      p.thresholds.push_back(bna_fold(p.neurons.back()));
    } catch (const ValueError&) {
      throw DegenerateNeuronError(name, c);
    }
  }
  return p;
}

namespace detail {
struct ChannelLayout {
  std::size_t batch, channels, spatial;
};

inline ChannelLayout channel_layout(const Shape& shape, std::size_t channels) {
  if (shape.size() < 2 || shape[1] != channels)
    throw ShapeError("batchnorm input " + to_string(shape) + " does not have " +
                     std::to_string(channels) + " channels on axis 1");
  std::size_t spatial = 1;
  for (std::size_t i = 2; i < shape.size(); ++i) spatial *= shape[i];
  return {shape[0], channels, spatial};
}
}  // namespace detail

// Run-time B-BNA: integer comparison against the folded thresholds.
inline IntTensor bna_forward_threshold(const IntTensor& a, std::span<const FoldedThreshold> thresholds) {
  const auto l = detail::channel_layout(a.shape(), thresholds.size());
  IntTensor out(a.shape());
  for (std::size_t b = 0; b < l.batch; ++b)
    for (std::size_t c = 0; c < l.channels; ++c)
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const std::size_t i = (b * l.channels + c) * l.spatial + s;
        out[i] = threshold_activate(a[i], thresholds[c]);
      }
  return out;
}

enum class Mode { kTrain, kEval };

// Cached quantities of a train-mode pass, consumed by the backward pass.
template <typename R>
struct BnTape {
  Tensor<R> xhat;       // normalized input
  Tensor<R> preact;     // gamma * xhat + beta
  std::vector<R> mean;  // batch statistics
  std::vector<R> var;
  std::vector<R> inv_std;
};

// Batchnorm plus activation. Train mode normalizes with batch statistics and
// fills `tape` when given; eval mode uses the running statistics.
template <typename R>
Tensor<R> bna_forward(const BatchNormLayer<R>& layer, const Tensor<R>& x, Mode mode,
                      BnTape<R>* tape = nullptr) {
  const auto l = detail::channel_layout(x.shape(), layer.channels());
  const std::size_t count = l.batch * l.spatial;
  std::vector<R> mean(l.channels), var(l.channels), inv(l.channels);
  for (std::size_t c = 0; c < l.channels; ++c) {
    if (mode == Mode::kTrain) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t b = 0; b < l.batch; ++b) {
        const R* p = x.ptr() + (b * l.channels + c) * l.spatial;
        for (std::size_t s = 0; s < l.spatial; ++s) sum += p[s];
      }
      const double m = sum / static_cast<double>(count);
      for (std::size_t b = 0; b < l.batch; ++b) {
        const R* p = x.ptr() + (b * l.channels + c) * l.spatial;
        for (std::size_t s = 0; s < l.spatial; ++s) sq += (p[s] - m) * (p[s] - m);
      }
      mean[c] = static_cast<R>(m);
      var[c] = static_cast<R>(sq / static_cast<double>(count));
    } else {
      mean[c] = layer.running_mean[c];
      var[c] = layer.running_var[c];
    }
    inv[c] = static_cast<R>(1.0 / std::sqrt(static_cast<double>(var[c]) + layer.eps));
  }

  Tensor<R> out(x.shape());
  Tensor<R> xhat, preact;
  if (tape) {
    xhat = Tensor<R>(x.shape());
    preact = Tensor<R>(x.shape());
  }
  if (layer.binarized) ++detail::kernel_calls;
  for (std::size_t b = 0; b < l.batch; ++b)
    for (std::size_t c = 0; c < l.channels; ++c) {
      const std::size_t base = (b * l.channels + c) * l.spatial;
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const R xh = (x[base + s] - mean[c]) * inv[c];
        const R v = layer.gamma[c] * xh + layer.beta[c];
        out[base + s] = layer.binarized ? sign_of(v) : (v > R(0) ? v : R(0));
        if (tape) {
          xhat[base + s] = xh;
          preact[base + s] = v;
        }
      }
    }
  if (tape) *tape = {std::move(xhat), std::move(preact), std::move(mean), std::move(var), std::move(inv)};
  return out;
}

// The unfolded reference form of B-BNA: sign of the batchnorm output.
template <typename R>
Tensor<R> bna_forward_float(const BatchNormLayer<R>& layer, const Tensor<R>& a, Mode mode) {
  BatchNormLayer<R> l = layer;
  l.binarized = true;
  return bna_forward(l, a, mode);
}

// Backward through activation and batch-statistics normalization. The sign
// activation uses the straight-through gradient (pass where |preact| <= 1).
template <typename R>
Tensor<R> bna_backward(const BatchNormLayer<R>& layer, const BnTape<R>& tape, const Tensor<R>& grad_out,
                       BatchNormLayer<R>* grads) {
  const auto l = detail::channel_layout(grad_out.shape(), layer.channels());
  const double count = static_cast<double>(l.batch * l.spatial);
  Tensor<R> dx(grad_out.shape());
  for (std::size_t c = 0; c < l.channels; ++c) {
    double sum_d = 0.0, sum_dx = 0.0;
    auto d_pre = [&](std::size_t i) -> R {
      const R v = tape.preact[i];
      if (layer.binarized) return std::abs(v) <= R(1) ? grad_out[i] : R(0);
      return v > R(0) ? grad_out[i] : R(0);
    };
    for (std::size_t b = 0; b < l.batch; ++b) {
      const std::size_t base = (b * l.channels + c) * l.spatial;
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const R g = d_pre(base + s);
        sum_d += g;
        sum_dx += g * tape.xhat[base + s];
      }
    }
    if (grads) {
      grads->gamma[c] += static_cast<R>(sum_dx);
      grads->beta[c] += static_cast<R>(sum_d);
    }
    // dL/dxhat = g * gamma; the normalization Jacobian folds in the batch means.
    const double gam = layer.gamma[c];
    const double k = static_cast<double>(tape.inv_std[c]) / count;
    for (std::size_t b = 0; b < l.batch; ++b) {
      const std::size_t base = (b * l.channels + c) * l.spatial;
      for (std::size_t s = 0; s < l.spatial; ++s) {
        const double g = d_pre(base + s);
        dx[base + s] = static_cast<R>(
            gam * k * (count * g - sum_d - static_cast<double>(tape.xhat[base + s]) * sum_dx));
      }
    }
  }
  return dx;
}

template <typename R>
void update_running_stats(BatchNormLayer<R>& layer, const BnTape<R>& tape, double momentum) {
  for (std::size_t c = 0; c < layer.channels(); ++c) {
    layer.running_mean[c] =
        static_cast<R>(momentum * layer.running_mean[c] + (1.0 - momentum) * tape.mean[c]);
    layer.running_var[c] =
        static_cast<R>(momentum * layer.running_var[c] + (1.0 - momentum) * tape.var[c]);
  }
}

}  // namespace bdcgan

#endif  // BDCGAN_LAYERS_BATCHNORM_HPP_
