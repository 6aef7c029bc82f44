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

#ifndef BDCGAN_LAYERS_CONV_HPP_
#define BDCGAN_LAYERS_CONV_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bdcgan/binkernels.hpp"
#include "bdcgan/linalg.hpp"
#include "bdcgan/ste.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

// Square-kernel geometry shared by the stride-2 convolution and its transpose.
// With kernel 5, stride 2, pad 2, output_padding 1 the transpose exactly
// doubles the spatial size and the convolution exactly halves it.
struct ConvGeometry {
  std::size_t kernel = 5;
  std::size_t stride = 2;
  std::size_t pad = 2;
  std::size_t output_padding = 1;

  std::size_t conv_out(std::size_t in) const {
    if (in + 2 * pad < kernel) throw ShapeError("convolution input smaller than kernel");
    return (in + 2 * pad - kernel) / stride + 1;
  }
  std::size_t deconv_out(std::size_t in) const {
    const std::ptrdiff_t out = static_cast<std::ptrdiff_t>((in - 1) * stride + kernel + output_padding) -
                               static_cast<std::ptrdiff_t>(2 * pad);
    if (out < 1) throw ShapeError("transposed convolution output would be empty");
    return static_cast<std::size_t>(out);
  }
};

namespace detail {

// cols[(c * k + ky) * k + kx][y * ws + x] = big[c][y * s - p + ky][x * s - p + kx]
// (zero outside the image). `big` is [channels, hb, wb], the column grid is hs x ws.
template <typename R>
void im2col(const R* big, std::size_t channels, std::size_t hb, std::size_t wb, std::size_t hs,
            std::size_t ws, const ConvGeometry& g, R* cols) {
  const std::size_t k = g.kernel, n = hs * ws;
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        R* dst = cols + ((c * k + ky) * k + kx) * n;
        for (std::size_t y = 0; y < hs; ++y) {
          const std::ptrdiff_t by = static_cast<std::ptrdiff_t>(y * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          for (std::size_t x = 0; x < ws; ++x) {
            const std::ptrdiff_t bx = static_cast<std::ptrdiff_t>(x * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            const bool inside = by >= 0 && by < static_cast<std::ptrdiff_t>(hb) && bx >= 0 &&
                                bx < static_cast<std::ptrdiff_t>(wb);
            dst[y * ws + x] = inside ? big[(c * hb + by) * wb + bx] : R(0);
          }
        }
      }
}

// Adjoint of im2col: scatter-add the columns back onto `big`.
template <typename R>
void col2im(const R* cols, std::size_t channels, std::size_t hb, std::size_t wb, std::size_t hs,
            std::size_t ws, const ConvGeometry& g, R* big) {
  const std::size_t k = g.kernel, n = hs * ws;
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        const R* src = cols + ((c * k + ky) * k + kx) * n;
        for (std::size_t y = 0; y < hs; ++y) {
          const std::ptrdiff_t by = static_cast<std::ptrdiff_t>(y * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (by < 0 || by >= static_cast<std::ptrdiff_t>(hb)) continue;
          for (std::size_t x = 0; x < ws; ++x) {
            const std::ptrdiff_t bx = static_cast<std::ptrdiff_t>(x * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (bx < 0 || bx >= static_cast<std::ptrdiff_t>(wb)) continue;
            big[(c * hb + by) * wb + bx] += src[y * ws + x];
          }
        }
      }
}

inline void check_image(const Shape& s, std::size_t channels, const char* what) {
  if (s.size() != 4 || s[1] != channels)
    throw ShapeError(std::string(what) + " input " + to_string(s) + " must be [batch, " +
                     std::to_string(channels) + ", H, W]");
}

}  // namespace detail

// Strided convolution, weight [out_ch, in_ch, k, k]. Real-valued only.
template <typename R>
struct ConvLayer {
  Tensor<R> weight;
  Tensor<R> bias;  // [out_ch]
  ConvGeometry geometry;

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
};

template <typename R>
Tensor<R> conv2d(const Tensor<R>& x, const Tensor<R>& weight, const Tensor<R>* bias, const ConvGeometry& g) {
  const std::size_t oc = weight.dim(0), ic = weight.dim(1), k = g.kernel;
  detail::check_image(x.shape(), ic, "conv2d");
  const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = g.conv_out(h), wo = g.conv_out(w), n = ho * wo, kk = ic * k * k;
  Tensor<R> y({batch, oc, ho, wo});
  std::vector<R> cols(kk * n);
  const auto wm = linalg::view(weight.ptr(), oc, kk);
  for (std::size_t b = 0; b < batch; ++b) {
    detail::im2col(x.ptr() + b * ic * h * w, ic, h, w, ho, wo, g, cols.data());
    auto yb = linalg::view(y.ptr() + b * oc * n, oc, n);
    yb.noalias() = wm * linalg::view(cols.data(), kk, n);
    if (bias)
      for (std::size_t c = 0; c < oc; ++c) yb.row(static_cast<Eigen::Index>(c)).array() += (*bias)[c];
  }
  return y;
}

template <typename R>
Tensor<R> conv_forward(const ConvLayer<R>& layer, const Tensor<R>& x) {
  return conv2d(x, layer.weight, layer.bias.empty() ? nullptr : &layer.bias, layer.geometry);
}

// Returns dL/dx; accumulates weight and bias gradients into `grads` when given.
template <typename R>
Tensor<R> conv_backward(const ConvLayer<R>& layer, const Tensor<R>& x, const Tensor<R>& grad_out,
                        ConvLayer<R>* grads, bool need_input_grad = true) {
  const ConvGeometry& g = layer.geometry;
  const std::size_t oc = layer.out_channels(), ic = layer.in_channels(), k = g.kernel;
  const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = grad_out.dim(2), wo = grad_out.dim(3), n = ho * wo, kk = ic * k * k;
  std::vector<R> cols(kk * n);
  Tensor<R> dx;
  if (need_input_grad) dx = Tensor<R>(x.shape());
  const auto wm = linalg::view(layer.weight.ptr(), oc, kk);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto gb = linalg::view(grad_out.ptr() + b * oc * n, oc, n);
    if (grads) {
      detail::im2col(x.ptr() + b * ic * h * w, ic, h, w, ho, wo, g, cols.data());
      linalg::view(grads->weight.ptr(), oc, kk).noalias() += gb * linalg::view(cols.data(), kk, n).transpose();
      if (!grads->bias.empty())
        for (std::size_t c = 0; c < oc; ++c) grads->bias[c] += gb.row(static_cast<Eigen::Index>(c)).sum();
    }
    if (need_input_grad) {
      linalg::view(cols.data(), kk, n).noalias() = wm.transpose() * gb;
      detail::col2im(cols.data(), ic, h, w, ho, wo, g, dx.ptr() + b * ic * h * w);
    }
  }
  return dx;
}

// Transposed convolution, weight [in_ch, out_ch, k, k]. The same weight tensor
// read as [out, in, k, k] is the convolution this layer is the adjoint of.
template <typename R>
struct DeconvLayer {
  Tensor<R> weight;
  Tensor<R> bias;  // [out_ch], empty when absent
  ConvGeometry geometry;
  bool binarized = false;

  std::size_t in_channels() const { return weight.dim(0); }
  std::size_t out_channels() const { return weight.dim(1); }
  bool has_bias() const { return !bias.empty(); }

  Tensor<R> forward_weight() const { return binarized ? sign_binarize(weight) : weight; }
  // Packed as [in_ch, out_ch * k * k].
  BitMatrix weight_bits() const {
    return pack(reshape(sign_binarize(weight), {in_channels(), weight.size() / in_channels()}));
  }
};

template <typename R>
Tensor<R> deconv2d(const Tensor<R>& x, const Tensor<R>& weight, const Tensor<R>* bias, const ConvGeometry& g) {
  const std::size_t ic = weight.dim(0), oc = weight.dim(1), k = g.kernel;
  detail::check_image(x.shape(), ic, "deconv2d");
  const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3), n = h * w;
  const std::size_t ho = g.deconv_out(h), wo = g.deconv_out(w), kk = oc * k * k;
  Tensor<R> y({batch, oc, ho, wo});
  std::vector<R> cols(kk * n);
  const auto wm = linalg::view(weight.ptr(), ic, kk);
  for (std::size_t b = 0; b < batch; ++b) {
    linalg::view(cols.data(), kk, n).noalias() = wm.transpose() * linalg::view(x.ptr() + b * ic * n, ic, n);
    R* yb = y.ptr() + b * oc * ho * wo;
    detail::col2im(cols.data(), oc, ho, wo, h, w, g, yb);
    if (bias)
      for (std::size_t c = 0; c < oc; ++c)
        for (std::size_t i = 0; i < ho * wo; ++i) yb[c * ho * wo + i] += (*bias)[c];
  }
  return y;
}

template <typename R>
Tensor<R> deconv_forward(const DeconvLayer<R>& layer, const Tensor<R>& x) {
  const Tensor<R> w = layer.forward_weight();
  return deconv2d(x, w, layer.has_bias() ? &layer.bias : nullptr, layer.geometry);
}

// Integer transposed convolution with packed sign weights; every term is a
// signed add of an input value. Bias is not applied.
template <typename R>
IntTensor deconv_forward_int(const DeconvLayer<R>& layer, const IntTensor& x, const BitMatrix& w_bits) {
  if (!layer.binarized) throw ValueError("integer deconv path needs a binarized layer");
  const ConvGeometry& g = layer.geometry;
  const std::size_t ic = layer.in_channels(), oc = layer.out_channels(), k = g.kernel;
  detail::check_image(x.shape(), ic, "deconv");
  const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = g.deconv_out(h), wo = g.deconv_out(w);
  IntTensor y({batch, oc, ho, wo});
  for (std::size_t b = 0; b < batch; ++b) {
    std::int32_t* yb = y.ptr() + b * oc * ho * wo;
    for (std::size_t c = 0; c < ic; ++c)
      for (std::size_t iy = 0; iy < h; ++iy)
        for (std::size_t ix = 0; ix < w; ++ix) {
          const std::int32_t v = x[((b * ic + c) * h + iy) * w + ix];
          if (v == 0) continue;
          for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t ky = 0; ky < k; ++ky) {
              const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy * g.stride + ky) -
                                        static_cast<std::ptrdiff_t>(g.pad);
              if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(ho)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(ix * g.stride + kx) -
                                          static_cast<std::ptrdiff_t>(g.pad);
                if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(wo)) continue;
                const bool plus = w_bits.bit(c, (o * k + ky) * k + kx);
                yb[(o * ho + oy) * wo + ox] += plus ? v : -v;
              }
            }
        }
  }
  return y;
}

template <typename R>
IntTensor deconv_forward_int(const DeconvLayer<R>& layer, const IntTensor& x) {
  return deconv_forward_int(layer, x, layer.weight_bits());
}

template <typename R>
Tensor<R> deconv_backward(const DeconvLayer<R>& layer, const Tensor<R>& x, const Tensor<R>& grad_out,
                          DeconvLayer<R>* grads, bool need_input_grad = true) {
  const ConvGeometry& g = layer.geometry;
  const std::size_t ic = layer.in_channels(), oc = layer.out_channels(), k = g.kernel;
  const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3), n = h * w;
  const std::size_t ho = grad_out.dim(2), wo = grad_out.dim(3), kk = oc * k * k;
  const Tensor<R> wf = layer.forward_weight();
  const auto wm = linalg::view(wf.ptr(), ic, kk);
  std::vector<R> cols(kk * n);
  Tensor<R> dw;
  if (grads) dw = Tensor<R>(layer.weight.shape());
  Tensor<R> dx;
  if (need_input_grad) dx = Tensor<R>(x.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const R* gb = grad_out.ptr() + b * oc * ho * wo;
    detail::im2col(gb, oc, ho, wo, h, w, g, cols.data());
    const auto cm = linalg::view(cols.data(), kk, n);
    if (grads) {
      linalg::view(dw.ptr(), ic, kk).noalias() += linalg::view(x.ptr() + b * ic * n, ic, n) * cm.transpose();
      if (grads->has_bias())
        for (std::size_t c = 0; c < oc; ++c)
          for (std::size_t i = 0; i < ho * wo; ++i) grads->bias[c] += gb[c * ho * wo + i];
    }
    if (need_input_grad) linalg::view(dx.ptr() + b * ic * n, ic, n).noalias() = wm * cm;
  }
  if (grads) {
    if (layer.binarized) dw = ste_backward_sign(dw, layer.weight);
    for (std::size_t i = 0; i < dw.size(); ++i) grads->weight[i] += dw[i];
  }
  return dx;
}

}  // namespace bdcgan

#endif  // BDCGAN_LAYERS_CONV_HPP_
