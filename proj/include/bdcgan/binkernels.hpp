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

#ifndef BDCGAN_BINKERNELS_HPP_
#define BDCGAN_BINKERNELS_HPP_

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdcgan/errors.hpp"
#include "bdcgan/tensor.hpp"

namespace bdcgan {

namespace detail {
// Bumped once per call of a public kernel below. Lets tests check that a
// real-valued configuration never reaches the binary path.
inline thread_local std::uint64_t kernel_calls = 0;
}  // namespace detail

inline std::uint64_t kernel_invocations() { return detail::kernel_calls; }

constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits, std::size_t word_bits = kWordBits) {
  return (bits + word_bits - 1) / word_bits;
}

// +1 for x >= 0 (zero included), -1 otherwise.
template <typename R>
constexpr R sign_of(R x) {
  return x >= R(0) ? R(1) : R(-1);
}

template <typename R>
Tensor<R> sign_binarize(const Tensor<R>& x) {
  ++detail::kernel_calls;
  Tensor<R> out(x.shape());
  auto in = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = sign_of(in[i]);
  return out;
}

// Largest magnitude of a signed h-bit integer input: 2^(h-1) - 1.
inline std::int32_t a_value(int h) {
  ++detail::kernel_calls;
  if (h < 2) throw ValueError("a_value needs h >= 2, got " + std::to_string(h));
  if (h > 31) throw ValueError("a_value needs h <= 31 for a 32-bit datapath, got " + std::to_string(h));
  return static_cast<std::int32_t>((std::int64_t{1} << (h - 1)) - 1);
}

// round(A * z), ties away from zero.
template <typename R>
IntTensor quantize_input(const Tensor<R>& z, std::int32_t a) {
  ++detail::kernel_calls;
  if (a < 1) throw ValueError("quantize_input needs A >= 1");
  IntTensor out(z.shape());
  auto in = z.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i)
    o[i] = static_cast<std::int32_t>(std::lround(static_cast<double>(a) * static_cast<double>(in[i])));
  return out;
}

// A * y for one-hot rows. A rank-1 input is a single row.
template <typename R>
IntTensor quantize_label(const Tensor<R>& y, std::int32_t a) {
  ++detail::kernel_calls;
  if (a < 1) throw ValueError("quantize_label needs A >= 1");
  const std::size_t rows = y.rank() == 1 ? 1 : y.dim(0);
  const std::size_t width = y.size() / rows;
  IntTensor out(y.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t ones = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const R v = y[r * width + c];
      if (v == R(1)) {
        ++ones;
        out[r * width + c] = a;
      } else if (v != R(0)) {
        throw ValueError("label row " + std::to_string(r) + " is not one-hot");
      }
    }
    if (ones != 1) throw ValueError("label row " + std::to_string(r) + " is not one-hot");
  }
  return out;
}

// Read-only view of one packed +-1 vector of `length` entries.
struct BitSpan {
  std::span<const std::uint64_t> words;
  std::size_t length = 0;
};

// Bit-packed +-1 matrix. Bit (r, c) lives in word r * words_per_row + c / 64
// at bit position c % 64; 1 encodes +1 and 0 encodes -1. Pad bits are zero.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(words_for(cols)), words_(rows * stride_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return stride_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool bit(std::size_t r, std::size_t c) const {
    return (words_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1u;
  }
  int value(std::size_t r, std::size_t c) const { return bit(r, c) ? 1 : -1; }

  void set(std::size_t r, std::size_t c, bool positive) {
    std::uint64_t& w = words_[r * stride_ + c / kWordBits];
    const std::uint64_t mask = std::uint64_t{1} << (c % kWordBits);
    w = positive ? (w | mask) : (w & ~mask);
  }
  void flip(std::size_t r, std::size_t c) { set(r, c, !bit(r, c)); }

  BitSpan row(std::size_t r) const {
    return {std::span<const std::uint64_t>(words_).subspan(r * stride_, stride_), cols_};
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

// Pack a +-1 tensor viewed as [dim(0), size / dim(0)]; rank 1 packs one row.
template <typename T>
BitMatrix pack(const Tensor<T>& signs) {
  ++detail::kernel_calls;
  const std::size_t rows = signs.rank() == 1 ? 1 : signs.dim(0);
  const std::size_t cols = signs.size() / rows;
  BitMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const T v = signs[r * cols + c];
      if (v == T(1)) {
        m.set(r, c, true);
      } else if (v != T(-1)) {
        throw ValueError("pack: element (" + std::to_string(r) + "," + std::to_string(c) +
                         ") is not +1 or -1");
      }
    }
  }
  return m;
}

template <typename R = float>
Tensor<R> unpack(const BitMatrix& m) {
  Tensor<R> out({m.rows(), m.cols()});
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = static_cast<R>(m.value(r, c));
  return out;
}

// Sum of a_k * w_k over two packed +-1 vectors: n - 2 * popcount(a ^ w).
inline std::int32_t bin_dot(BitSpan a, BitSpan w) {
  ++detail::kernel_calls;
  if (a.length != w.length || a.words.size() != w.words.size())
    throw ShapeError("bin_dot length mismatch: " + std::to_string(a.length) + " vs " +
                     std::to_string(w.length));
  int differing = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) differing += std::popcount(a.words[i] ^ w.words[i]);
  return static_cast<std::int32_t>(a.length) - 2 * differing;
}

// Sum over k of (bit_k ? a[k] : -a[k]); adds and subtracts only.
inline std::int32_t int_dot(std::span<const std::int32_t> a, BitSpan w) {
  ++detail::kernel_calls;
  if (a.size() != w.length) {
    throw ShapeError("int_dot length mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(w.length));
  }
  std::int32_t acc = 0;
  std::size_t k = 0;
  for (std::uint64_t word : w.words) {
    const std::size_t end = std::min(a.size(), k + kWordBits);
    for (; k < end; ++k, word >>= 1) acc += (word & 1u) ? a[k] : -a[k];
  }
  return acc;
}

// Re-pack to 32-bit words, ceil(cols / 32) per row, same LSB-first order.
inline std::vector<std::uint32_t> repack32(const BitMatrix& m) {
  const std::size_t stride32 = words_for(m.cols(), 32);
  std::vector<std::uint32_t> out(m.rows() * stride32);
  const auto words = m.words();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < stride32; ++j) {
      const std::uint64_t w = words[r * m.words_per_row() + j / 2];
      out[r * stride32 + j] = static_cast<std::uint32_t>(w >> (32 * (j % 2)));
    }
  }
  return out;
}

}  // namespace bdcgan

#endif  // BDCGAN_BINKERNELS_HPP_
