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

#ifndef BDCGAN_LAYERS_FC_HPP_
#define BDCGAN_LAYERS_FC_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include "bdcgan/binkernels.hpp"
#include "bdcgan/linalg.hpp"
#include "bdcgan/ste.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

// Fully connected layer. `weight` holds the real-valued master copy; when
// `binarized` is set every forward pass uses sign(weight) instead.
template <typename R>
struct FcLayer {
  Tensor<R> weight;  // [out, in]
  Tensor<R> bias;    // [out], empty when the layer has no bias
  bool binarized = false;

  std::size_t out_features() const { return weight.dim(0); }
  std::size_t in_features() const { return weight.dim(1); }
  bool has_bias() const { return !bias.empty(); }

  Tensor<R> forward_weight() const { return binarized ? sign_binarize(weight) : weight; }
  BitMatrix weight_bits() const { return pack(sign_binarize(weight)); }
};

namespace detail {
inline void check_fc_input(std::size_t got, std::size_t want, const Shape& shape) {
  if (got != want)
    throw ShapeError("fc input " + to_string(shape) + " does not match in_features " +
                     std::to_string(want));
}
}  // namespace detail

// Real-valued path: y = x * W^T (+ b), with W replaced by sign(W) when binarized.
template <typename R>
Tensor<R> fc_forward(const FcLayer<R>& layer, const Tensor<R>& x) {
  if (x.rank() != 2) throw ShapeError("fc input must be [batch, in], got " + to_string(x.shape()));
  detail::check_fc_input(x.dim(1), layer.in_features(), x.shape());
  const std::size_t batch = x.dim(0), out = layer.out_features(), in = layer.in_features();
  const Tensor<R> w = layer.forward_weight();
  Tensor<R> y({batch, out});
  auto ym = linalg::view(y.ptr(), batch, out);
  ym.noalias() = linalg::view(x.ptr(), batch, in) * linalg::view(w.ptr(), out, in).transpose();
  if (layer.has_bias()) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < out; ++j) y[b * out + j] += layer.bias[j];
  }
  return y;
}

// Integer path against packed weights; exact. Inputs that are all +-1 use the
// XNOR/popcount kernel, anything else the add/subtract kernel. Bias is not
// applied here.
template <typename R>
IntTensor fc_forward_int(const FcLayer<R>& layer, const IntTensor& x, const BitMatrix& w_bits) {
  if (x.rank() != 2) throw ShapeError("fc input must be [batch, in], got " + to_string(x.shape()));
  detail::check_fc_input(x.dim(1), w_bits.cols(), x.shape());
  if (!layer.binarized) throw ValueError("integer fc path needs a binarized layer");
  const std::size_t batch = x.dim(0), out = w_bits.rows();
  IntTensor y({batch, out});
  const bool pm_one = std::all_of(x.data().begin(), x.data().end(),
                                  [](std::int32_t v) { return v == 1 || v == -1; });
  if (pm_one) {
    const BitMatrix xb = pack(x);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < out; ++j) y[b * out + j] = bin_dot(xb.row(b), w_bits.row(j));
  } else {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < out; ++j) y[b * out + j] = int_dot(x.row(b), w_bits.row(j));
  }
  return y;
}

template <typename R>
IntTensor fc_forward_int(const FcLayer<R>& layer, const IntTensor& x) {
  return fc_forward_int(layer, x, layer.weight_bits());
}

// Accumulates parameter gradients into `grads` (same layout as `layer`) and
// returns dL/dx. Binarized weights receive the straight-through gradient.
template <typename R>
Tensor<R> fc_backward(const FcLayer<R>& layer, const Tensor<R>& x, const Tensor<R>& grad_out,
                      FcLayer<R>* grads, bool need_input_grad = true) {
  const std::size_t batch = x.dim(0), out = layer.out_features(), in = layer.in_features();
  if (grad_out.shape() != Shape{batch, out})
    throw ShapeError("fc grad " + to_string(grad_out.shape()) + " does not match output");
  const auto g = linalg::view(grad_out.ptr(), batch, out);
  if (grads) {
    Tensor<R> dw({out, in});
    linalg::view(dw.ptr(), out, in).noalias() = g.transpose() * linalg::view(x.ptr(), batch, in);
    if (layer.binarized) dw = ste_backward_sign(dw, layer.weight);
    linalg::view(grads->weight.ptr(), out, in) += linalg::view(dw.ptr(), out, in);
    if (layer.has_bias()) {
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < out; ++j) grads->bias[j] += grad_out[b * out + j];
    }
  }
  if (!need_input_grad) return {};
  const Tensor<R> w = layer.forward_weight();
  Tensor<R> dx({batch, in});
  linalg::view(dx.ptr(), batch, in).noalias() = g * linalg::view(w.ptr(), out, in);
  return dx;
}

}  // namespace bdcgan

#endif  // BDCGAN_LAYERS_FC_HPP_
