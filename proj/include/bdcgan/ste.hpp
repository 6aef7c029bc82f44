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

#ifndef BDCGAN_STE_HPP_
#define BDCGAN_STE_HPP_

#include <cmath>
#include <cstddef>

#include "bdcgan/tensor.hpp"

namespace bdcgan {

// Straight-through estimator for sign(): the gradient passes unchanged where
// |x| <= 1 and is cancelled outside the clip region.
template <typename R>
Tensor<R> ste_backward_sign(const Tensor<R>& grad_out, const Tensor<R>& x_master) {
  if (grad_out.shape() != x_master.shape())
    throw ShapeError("ste_backward_sign: gradient " + to_string(grad_out.shape()) +
                     " vs input " + to_string(x_master.shape()));
  Tensor<R> out(grad_out.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::abs(x_master[i]) <= R(1) ? grad_out[i] : R(0);
  return out;
}

}  // namespace bdcgan

#endif  // BDCGAN_STE_HPP_
