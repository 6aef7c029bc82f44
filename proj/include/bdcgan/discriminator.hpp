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

#ifndef BDCGAN_DISCRIMINATOR_HPP_
#define BDCGAN_DISCRIMINATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>

#include "bdcgan/architecture.hpp"
#include "bdcgan/layers/conv.hpp"
#include "bdcgan/layers/fc.hpp"
#include "bdcgan/rng.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

constexpr double kLeakySlope = 0.2;

// Conditional discriminator, real-valued throughout. The label is appended as
// constant feature maps in front of both convolutions.
template <typename R>
struct DiscriminatorModel {
  Architecture arch;
  ConvLayer<R> conv1;  // 1 + classes -> d_conv1_filters
  ConvLayer<R> conv2;  // d_conv1_filters + classes -> d_conv2_filters
  FcLayer<R> fc;       // d_features -> 1
};

template <typename Model, typename F>
  requires requires(Model& m) { m.conv1; }
void visit_tensors(Model& m, F&& f) {
  f(std::string("conv1_w"), m.conv1.weight, TensorRole::kParameter);
  f(std::string("conv1_b"), m.conv1.bias, TensorRole::kParameter);
  f(std::string("conv2_w"), m.conv2.weight, TensorRole::kParameter);
  f(std::string("conv2_b"), m.conv2.bias, TensorRole::kParameter);
  f(std::string("fc_w"), m.fc.weight, TensorRole::kParameter);
  f(std::string("fc_b"), m.fc.bias, TensorRole::kParameter);
}

template <typename R>
DiscriminatorModel<R> zeros_like(const DiscriminatorModel<R>& d) {
  DiscriminatorModel<R> g = d;
  visit_tensors(g, [](const std::string&, Tensor<R>& t, TensorRole) { t.fill(R(0)); });
  return g;
}

template <typename R = float>
DiscriminatorModel<R> build_discriminator(Rng& rng, const Architecture& arch = {}) {
  DiscriminatorModel<R> d;
  d.arch = arch;
  const std::size_t c = arch.num_classes;
  d.conv1.weight = normal<R>(rng, {arch.d_conv1_filters, 1 + c, 5, 5}, 0.0, 0.02);
  d.conv1.bias = Tensor<R>({arch.d_conv1_filters});
  d.conv2.weight = normal<R>(rng, {arch.d_conv2_filters, arch.d_conv1_filters + c, 5, 5}, 0.0, 0.02);
  d.conv2.bias = Tensor<R>({arch.d_conv2_filters});
  d.fc.weight = normal<R>(rng, {1, arch.d_features()}, 0.0, 0.02);
  d.fc.bias = Tensor<R>({1});
  return d;
}

template <typename R>
struct DiscriminatorTape {
  Tensor<R> in1, pre1, in2, pre2, flat;
};

namespace detail {

// [B, C, H, W] ++ y broadcast to [B, classes, H, W].
template <typename R>
Tensor<R> append_label_maps(const Tensor<R>& x, const Tensor<R>& y) {
  const std::size_t batch = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3), k = y.dim(1);
  Tensor<R> out({batch, c + k, x.dim(2), x.dim(3)});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(x.ptr() + b * c * plane, c * plane, out.ptr() + b * (c + k) * plane);
    for (std::size_t j = 0; j < k; ++j)
      std::fill_n(out.ptr() + (b * (c + k) + c + j) * plane, plane, y[b * k + j]);
  }
  return out;
}

// Gradient w.r.t. the first `c` channels of an appended tensor.
template <typename R>
Tensor<R> strip_label_maps(const Tensor<R>& g, std::size_t c) {
  const std::size_t batch = g.dim(0), total = g.dim(1), plane = g.dim(2) * g.dim(3);
  Tensor<R> out({batch, c, g.dim(2), g.dim(3)});
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(g.ptr() + b * total * plane, c * plane, out.ptr() + b * c * plane);
  return out;
}

template <typename R>
Tensor<R> leaky(const Tensor<R>& x) {
  Tensor<R> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > R(0) ? x[i] : R(kLeakySlope) * x[i];
  return out;
}

template <typename R>
void leaky_backward(const Tensor<R>& pre, Tensor<R>& grad) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(pre[i] > R(0))) grad[i] *= R(kLeakySlope);
}

}  // namespace detail

// Raw logits [batch, 1]; fills `tape` for a subsequent backward pass.
template <typename R>
Tensor<R> discriminator_logits(const DiscriminatorModel<R>& d, const Tensor<R>& img, const Tensor<R>& y,
                               DiscriminatorTape<R>* tape = nullptr) {
  const std::size_t s = d.arch.image_size();
  if (img.rank() != 4 || img.dim(1) != 1 || img.dim(2) != s || img.dim(3) != s)
    throw ShapeError("discriminator input must be [batch, 1, " + std::to_string(s) + ", " +
                     std::to_string(s) + "], got " + to_string(img.shape()));
  if (y.rank() != 2 || y.dim(0) != img.dim(0) || y.dim(1) != d.arch.num_classes)
    throw ShapeError("discriminator labels must be [batch, classes], got " + to_string(y.shape()));
  DiscriminatorTape<R> local;
  DiscriminatorTape<R>& t = tape ? *tape : local;
  t.in1 = detail::append_label_maps(img, y);
  t.pre1 = conv_forward(d.conv1, t.in1);
  t.in2 = detail::append_label_maps(detail::leaky(t.pre1), y);
  t.pre2 = conv_forward(d.conv2, t.in2);
  t.flat = reshape(detail::leaky(t.pre2), {img.dim(0), d.arch.d_features()});
  return fc_forward(d.fc, t.flat);
}

template <typename R>
Tensor<R> sigmoid(const Tensor<R>& x) {
  Tensor<R> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = R(1) / (R(1) + std::exp(-x[i]));
  return out;
}

// Probability that each (image, label) pair is real, [batch, 1].
template <typename R>
Tensor<R> discriminator_forward(const DiscriminatorModel<R>& d, const Tensor<R>& img, const Tensor<R>& y) {
  return sigmoid(discriminator_logits(d, img, y));
}

// Backward from dL/dlogits. Accumulates into `grads` when non-null and returns
// dL/dimg when requested.
template <typename R>
Tensor<R> discriminator_backward(const DiscriminatorModel<R>& d, const DiscriminatorTape<R>& t,
                                 const Tensor<R>& grad_logits, std::type_identity_t<DiscriminatorModel<R>>* grads,
                                 bool need_input_grad) {
  Tensor<R> g = fc_backward(d.fc, t.flat, grad_logits, grads ? &grads->fc : nullptr);
  g.set_shape(t.pre2.shape());
  detail::leaky_backward(t.pre2, g);
  g = conv_backward(d.conv2, t.in2, g, grads ? &grads->conv2 : nullptr);
  g = detail::strip_label_maps(g, d.arch.d_conv1_filters);
  detail::leaky_backward(t.pre1, g);
  if (!need_input_grad) {
    conv_backward(d.conv1, t.in1, g, grads ? &grads->conv1 : nullptr, false);
    return {};
  }
  g = conv_backward(d.conv1, t.in1, g, grads ? &grads->conv1 : nullptr);
  return detail::strip_label_maps(g, 1);
}

}  // namespace bdcgan

#endif  // BDCGAN_DISCRIMINATOR_HPP_
