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

#ifndef BDCGAN_TENSOR_HPP_
#define BDCGAN_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bdcgan/errors.hpp"

namespace bdcgan {

using Shape = std::vector<std::size_t>;

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

// Product of the extents. Every extent must be at least 1.
inline std::size_t element_count(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("zero extent in shape " + to_string(shape));
    n *= e;
  }
  return n;
}

// Dense row-major N-dimensional array.
template <typename T>
class Tensor {
 public:
  static_assert(std::is_arithmetic_v<T>);
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{})
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_))
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Row i of the tensor viewed as [dim(0), size() / dim(0)].
  std::span<T> row(std::size_t i) {
    const std::size_t w = data_.size() / shape_[0];
    return std::span<T>(data_).subspan(i * w, w);
  }
  std::span<const T> row(std::size_t i) const {
    const std::size_t w = data_.size() / shape_[0];
    return std::span<const T>(data_).subspan(i * w, w);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  void set_shape(Shape shape) {
    if (element_count(shape) != data_.size())
      throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    shape_ = std::move(shape);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(),
                   [](T v) { return static_cast<U>(v); });
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using FloatTensor = Tensor<float>;
using IntTensor = Tensor<std::int32_t>;

template <typename T>
Tensor<T> reshape(const Tensor<T>& t, Shape shape) {
  Tensor<T> out = t;
  out.set_shape(std::move(shape));
  return out;
}

template <typename T>
Tensor<T> reshape(Tensor<T>&& t, Shape shape) {
  t.set_shape(std::move(shape));
  return std::move(t);
}

template <typename T>
Tensor<T> zeros_like(const Tensor<T>& t) {
  return Tensor<T>(t.shape());
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  if constexpr (std::is_floating_point_v<T>) {
    return std::all_of(t.data().begin(), t.data().end(),
                       [](T v) { return std::isfinite(v); });
  } else {
    return true;
  }
}

// Concatenate two [batch, *] tensors along the feature axis.
template <typename T>
Tensor<T> concat_features(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
    throw ShapeError("concat_features needs two [batch, n] tensors with equal batch, got " +
                     to_string(a.shape()) + " and " + to_string(b.shape()));
  const std::size_t batch = a.dim(0), na = a.dim(1), nb = b.dim(1);
  Tensor<T> out({batch, na + nb});
  for (std::size_t i = 0; i < batch; ++i) {
    std::copy_n(a.row(i).begin(), na, out.row(i).begin());
    std::copy_n(b.row(i).begin(), nb, out.row(i).begin() + na);
  }
  return out;
}

}  // namespace bdcgan

#endif  // BDCGAN_TENSOR_HPP_
