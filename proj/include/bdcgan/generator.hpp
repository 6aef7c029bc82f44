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

#ifndef BDCGAN_GENERATOR_HPP_
#define BDCGAN_GENERATOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bdcgan/architecture.hpp"
#include "bdcgan/binkernels.hpp"
#include "bdcgan/layers/batchnorm.hpp"
#include "bdcgan/layers/conv.hpp"
#include "bdcgan/layers/fc.hpp"
#include "bdcgan/rng.hpp"
#include "bdcgan/scenario.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

constexpr double kInitStddev = 0.02;

// Encoder: fc1 -> bna1 -> fc2 -> bna1b. Decoder: deconv1 -> bna2 -> deconv2 -> tanh.
template <typename R>
struct GeneratorModel {
  Architecture arch;
  ScenarioConfig scenario;
  FcLayer<R> fc1;             // [fc_units, z_dim + classes]
  BatchNormLayer<R> bna1;     // fc_units
  FcLayer<R> fc2;             // [proj_features, fc_units]
  BatchNormLayer<R> bna1b;    // proj_features
  DeconvLayer<R> deconv1;     // proj_channels -> deconv_filters
  BatchNormLayer<R> bna2;     // deconv_filters, per channel
  DeconvLayer<R> deconv2;     // deconv_filters -> 1, with bias
};

using Generator = GeneratorModel<float>;

namespace detail {
template <typename Bn, typename F>
void visit_bn(Bn& bn, const std::string& name, F& f) {
  f(name + "_gamma", bn.gamma, TensorRole::kParameter);
  f(name + "_beta", bn.beta, TensorRole::kParameter);
  f(name + "_mean", bn.running_mean, TensorRole::kStatistic);
  f(name + "_var", bn.running_var, TensorRole::kStatistic);
}
}  // namespace detail

// Visits every tensor in a fixed order: f(name, tensor, role). Works on const
// and mutable models alike.
template <typename Model, typename F>
  requires requires(Model& m) { m.fc1; m.deconv2; }
void visit_tensors(Model& m, F&& f) {
  auto wrole = [](bool binarized) {
    return binarized ? TensorRole::kBinarizedWeight : TensorRole::kParameter;
  };
  f(std::string("fc1_w"), m.fc1.weight, wrole(m.fc1.binarized));
  if (m.fc1.has_bias()) f(std::string("fc1_b"), m.fc1.bias, TensorRole::kParameter);
  detail::visit_bn(m.bna1, "bna1", f);
  f(std::string("fc2_w"), m.fc2.weight, wrole(m.fc2.binarized));
  if (m.fc2.has_bias()) f(std::string("fc2_b"), m.fc2.bias, TensorRole::kParameter);
  detail::visit_bn(m.bna1b, "bna1b", f);
  f(std::string("deconv1_w"), m.deconv1.weight, wrole(m.deconv1.binarized));
  if (m.deconv1.has_bias()) f(std::string("deconv1_b"), m.deconv1.bias, TensorRole::kParameter);
  detail::visit_bn(m.bna2, "bna2", f);
  f(std::string("deconv2_w"), m.deconv2.weight, wrole(m.deconv2.binarized));
  if (m.deconv2.has_bias()) f(std::string("deconv2_b"), m.deconv2.bias, TensorRole::kParameter);
}

// Same layout and flags, all tensors zero. Used as a gradient accumulator.
template <typename R>
GeneratorModel<R> zeros_like(const GeneratorModel<R>& m) {
  GeneratorModel<R> g = m;
  visit_tensors(g, [](const std::string&, Tensor<R>& t, TensorRole) { t.fill(R(0)); });
  return g;
}

// Wire the scenario flags onto a freshly initialized generator. Weights are
// N(0, 0.02); batchnorm starts at gamma = 1, beta = 0, mean 0, var 1.
template <typename R = float>
GeneratorModel<R> build_generator(const ScenarioConfig& cfg, Rng& rng, const Architecture& arch = {}) {
  GeneratorModel<R> m;
  m.arch = arch;
  m.scenario = cfg;
  m.fc1.weight = normal<R>(rng, {arch.fc_units, arch.input_features()}, 0.0, kInitStddev);
  m.fc1.binarized = cfg.bfc;
  m.bna1 = BatchNormLayer<R>::make(arch.fc_units, cfg.bbna1);
  m.fc2.weight = normal<R>(rng, {arch.proj_features(), arch.fc_units}, 0.0, kInitStddev);
  m.fc2.binarized = cfg.bfc;
  m.bna1b = BatchNormLayer<R>::make(arch.proj_features(), cfg.bbna1);
  m.deconv1.weight = normal<R>(rng, {arch.proj_channels, arch.deconv_filters, 5, 5}, 0.0, kInitStddev);
  m.deconv1.binarized = cfg.bdeconv1;
  m.bna2 = BatchNormLayer<R>::make(arch.deconv_filters, cfg.bbna2);
  m.deconv2.weight = normal<R>(rng, {arch.deconv_filters, 1, 5, 5}, 0.0, kInitStddev);
  m.deconv2.bias = Tensor<R>({1});
  m.deconv2.binarized = cfg.bdeconv2;
  return m;
}

namespace detail {

template <typename R>
void check_generator_inputs(const GeneratorModel<R>& m, const Tensor<R>& z, const Tensor<R>& y) {
  if (z.rank() != 2 || z.dim(1) != m.arch.z_dim)
    throw ShapeError("z must be [batch, " + std::to_string(m.arch.z_dim) + "], got " + to_string(z.shape()));
  if (y.rank() != 2 || y.dim(0) != z.dim(0) || y.dim(1) != m.arch.num_classes)
    throw ShapeError("y must be [batch, " + std::to_string(m.arch.num_classes) + "], got " +
                     to_string(y.shape()));
  for (std::size_t b = 0; b < y.dim(0); ++b) {
    std::size_t ones = 0;
    for (R v : y.row(b)) {
      if (v == R(1)) {
        ++ones;
      } else if (v != R(0)) {
        ones = 2;
      }
    }
    if (ones != 1) throw ValueError("label row " + std::to_string(b) + " is not one-hot");
  }
}

// Generator input on the real-valued path; holds the quantized integers
// (as reals) when the scenario feeds integer inputs.
template <typename R>
Tensor<R> generator_input(const GeneratorModel<R>& m, const Tensor<R>& z, const Tensor<R>& y) {
  check_generator_inputs(m, z, y);
  if (!m.scenario.input_as_integer) return concat_features(z, y);
  return concat_features(quantize_input(z, m.scenario.a), quantize_label(y, m.scenario.a)).template cast<R>();
}

template <typename R>
Tensor<R> tanh_of(const Tensor<R>& x) {
  Tensor<R> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

}  // namespace detail

// Train-mode intermediates kept for the backward pass.
template <typename R>
struct GeneratorTape {
  Tensor<R> x0, a1, h1, a2, h2, a3, h3, a4, images;
  BnTape<R> bn1, bn1b, bn2;
};

// Train mode: real-valued arithmetic throughout, sign(W) for binarized layers,
// batch statistics in every batchnorm.
template <typename R>
Tensor<R> generator_forward_train(const GeneratorModel<R>& m, const Tensor<R>& z, const Tensor<R>& y,
                                  GeneratorTape<R>& t) {
  const std::size_t batch = z.dim(0), base = m.arch.base_size;
  t.x0 = detail::generator_input(m, z, y);
  t.a1 = fc_forward(m.fc1, t.x0);
  t.h1 = bna_forward(m.bna1, t.a1, Mode::kTrain, &t.bn1);
  t.a2 = fc_forward(m.fc2, t.h1);
  t.h2 = bna_forward(m.bna1b, t.a2, Mode::kTrain, &t.bn1b);
  t.h2.set_shape({batch, m.arch.proj_channels, base, base});
  t.a3 = deconv_forward(m.deconv1, t.h2);
  t.h3 = bna_forward(m.bna2, t.a3, Mode::kTrain, &t.bn2);
  t.a4 = deconv_forward(m.deconv2, t.h3);
  t.images = detail::tanh_of(t.a4);
  return t.images;
}

// Accumulates parameter gradients for the loss whose gradient w.r.t. the
// output images is `grad_images`.
template <typename R>
void generator_backward(const GeneratorModel<R>& m, const GeneratorTape<R>& t, const Tensor<R>& grad_images,
                        GeneratorModel<R>& grads) {
  const std::size_t batch = t.images.dim(0);
  Tensor<R> d(grad_images.shape());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = grad_images[i] * (R(1) - t.images[i] * t.images[i]);
  d = deconv_backward(m.deconv2, t.h3, d, &grads.deconv2);
  d = bna_backward(m.bna2, t.bn2, d, &grads.bna2);
  d = deconv_backward(m.deconv1, t.h2, d, &grads.deconv1);
  d.set_shape({batch, m.arch.proj_features()});
  d = bna_backward(m.bna1b, t.bn1b, d, &grads.bna1b);
  d = fc_backward(m.fc2, t.h1, d, &grads.fc2);
  d = bna_backward(m.bna1, t.bn1, d, &grads.bna1);
  fc_backward(m.fc1, t.x0, d, &grads.fc1, false);
}

template <typename R>
void update_running_stats(GeneratorModel<R>& m, const GeneratorTape<R>& t, double momentum) {
  update_running_stats(m.bna1, t.bn1, momentum);
  update_running_stats(m.bna1b, t.bn1b, momentum);
  update_running_stats(m.bna2, t.bn2, momentum);
}

// A stage output on the eval path: integer while the run-time path stays in
// integer arithmetic, real once a real-valued layer has been applied.
template <typename R>
using Activation = std::variant<IntTensor, Tensor<R>>;

template <typename R>
Tensor<R> as_real(const Activation<R>& a) {
  if (const auto* i = std::get_if<IntTensor>(&a)) return i->template cast<R>();
  return std::get<Tensor<R>>(a);
}

template <typename R>
struct StageRecord {
  std::string name;
  Activation<R> value;

  bool is_integer() const { return std::holds_alternative<IntTensor>(value); }
};

template <typename R>
struct GeneratorTrace {
  std::vector<StageRecord<R>> stages;  // input, fc1, bna1, fc2, bna1b, deconv1, bna2, deconv2
  Tensor<R> images;

  const StageRecord<R>& stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.name == name) return s;
    throw ValueError("no stage named " + name);
  }
};

namespace detail {

template <typename R>
Activation<R> eval_fc(const FcLayer<R>& layer, const Activation<R>& x) {
  if (const auto* xi = std::get_if<IntTensor>(&x); xi && layer.binarized) {
    IntTensor acc = fc_forward_int(layer, *xi);
    if (!layer.has_bias()) return acc;
    Tensor<R> out = acc.template cast<R>();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer.bias[i % layer.out_features()];
    return out;
  }
  return fc_forward(layer, as_real(x));
}

template <typename R>
Activation<R> eval_bna(const BatchNormLayer<R>& layer, const std::string& name, const Activation<R>& a) {
  if (const auto* ai = std::get_if<IntTensor>(&a); ai && layer.binarized)
    return bna_forward_threshold(*ai, bn_params(layer, name).thresholds);
  return bna_forward(layer, as_real(a), Mode::kEval);
}

template <typename R>
Activation<R> eval_deconv(const DeconvLayer<R>& layer, const Activation<R>& x) {
  if (const auto* xi = std::get_if<IntTensor>(&x); xi && layer.binarized) {
    IntTensor acc = deconv_forward_int(layer, *xi);
    if (!layer.has_bias()) return acc;
    Tensor<R> out = acc.template cast<R>();
    const std::size_t plane = out.dim(2) * out.dim(3), oc = out.dim(1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer.bias[(i / plane) % oc];
    return out;
  }
  return deconv_forward(layer, as_real(x));
}

template <typename R>
Activation<R> reshape_activation(Activation<R> a, const Shape& shape) {
  std::visit([&](auto& t) { t.set_shape(shape); }, a);
  return a;
}

}  // namespace detail

// Eval mode. Binarized stages fed integer activations stay integer: quantized
// input, add/subtract and XNOR/popcount accumulators, folded thresholds.
// The output stage is always real (tanh).
template <typename R>
GeneratorTrace<R> generator_trace(const GeneratorModel<R>& m, const Tensor<R>& z, const Tensor<R>& y) {
  detail::check_generator_inputs(m, z, y);
  const std::size_t batch = z.dim(0), base = m.arch.base_size;
  GeneratorTrace<R> tr;
  Activation<R> x;
  if (m.scenario.input_as_integer) {
    x = concat_features(quantize_input(z, m.scenario.a), quantize_label(y, m.scenario.a));
  } else {
    x = concat_features(z, y);
  }
  tr.stages.push_back({"input", x});
  x = detail::eval_fc(m.fc1, x);
  tr.stages.push_back({"fc1", x});
  x = detail::eval_bna(m.bna1, "bna1", x);
  tr.stages.push_back({"bna1", x});
  x = detail::eval_fc(m.fc2, x);
  tr.stages.push_back({"fc2", x});
  x = detail::eval_bna(m.bna1b, "bna1b", x);
  tr.stages.push_back({"bna1b", x});
  x = detail::reshape_activation(std::move(x), {batch, m.arch.proj_channels, base, base});
  x = detail::eval_deconv(m.deconv1, x);
  tr.stages.push_back({"deconv1", x});
  x = detail::eval_bna(m.bna2, "bna2", x);
  tr.stages.push_back({"bna2", x});
  x = detail::eval_deconv(m.deconv2, x);
  tr.stages.push_back({"deconv2", x});
  tr.images = detail::tanh_of(as_real(x));
  return tr;
}

template <typename R>
Tensor<R> generator_forward(const GeneratorModel<R>& m, const Tensor<R>& z, const Tensor<R>& y, Mode mode) {
  if (mode == Mode::kEval) return generator_trace(m, z, y).images;
  GeneratorTape<R> tape;
  return generator_forward_train(m, z, y, tape);
}

template <typename R = float>
Tensor<R> one_hot(const std::vector<int>& labels, std::size_t classes) {
  Tensor<R> y({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw ValueError("label " + std::to_string(labels[i]) + " out of range");
    y[i * classes + static_cast<std::size_t>(labels[i])] = R(1);
  }
  return y;
}

}  // namespace bdcgan

#endif  // BDCGAN_GENERATOR_HPP_
