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

#ifndef BDCGAN_LINALG_HPP_
#define BDCGAN_LINALG_HPP_

#include <cstddef>

#include <Eigen/Core>

namespace bdcgan::linalg {

template <typename R>
using Matrix = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename R>
using MatrixMap = Eigen::Map<Matrix<R>>;
template <typename R>
using ConstMatrixMap = Eigen::Map<const Matrix<R>>;

template <typename R>
MatrixMap<R> view(R* data, std::size_t rows, std::size_t cols) {
  return MatrixMap<R>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename R>
ConstMatrixMap<R> view(const R* data, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap<R>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace bdcgan::linalg

#endif  // BDCGAN_LINALG_HPP_
