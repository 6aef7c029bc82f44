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

#ifndef BDCGAN_ARCHITECTURE_HPP_
#define BDCGAN_ARCHITECTURE_HPP_

#include <cstddef>

namespace bdcgan {

// Layer sizes of the generator/discriminator pair. Topology is fixed; the
// defaults are the MNIST configuration (28x28 images, 10 classes).
struct Architecture {
  std::size_t z_dim = 100;
  std::size_t num_classes = 10;
  std::size_t fc_units = 600;
  std::size_t proj_channels = 128;
  std::size_t base_size = 7;  // spatial size fed to the decoder
  std::size_t deconv_filters = 64;
  std::size_t d_conv1_filters = 64;
  std::size_t d_conv2_filters = 128;

  std::size_t input_features() const { return z_dim + num_classes; }
  std::size_t proj_features() const { return proj_channels * base_size * base_size; }
  std::size_t image_size() const { return base_size * 4; }
  std::size_t d_features() const { return d_conv2_filters * base_size * base_size; }

  // Small instance used by gradient checks and fuzz tests: 8x8 images.
  static Architecture tiny() {
    Architecture a;
    a.z_dim = 4;
    a.num_classes = 3;
    a.fc_units = 16;
    a.proj_channels = 4;
    a.base_size = 2;
    a.deconv_filters = 3;
    a.d_conv1_filters = 4;
    a.d_conv2_filters = 5;
    return a;
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class TensorRole {
  kBinarizedWeight,  // master weight of a binarized layer; clipped to [-1, 1]
  kParameter,
  kStatistic,        // batchnorm running statistics, not trained by SGD
};

}  // namespace bdcgan

#endif  // BDCGAN_ARCHITECTURE_HPP_
