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

#ifndef BDCGAN_RNG_HPP_
#define BDCGAN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bdcgan/tensor.hpp"

namespace bdcgan {

// Seeded generator with a platform-independent sample stream. Only the raw
// engine output is taken from the standard library; the distributions are
// written out here because std:: distributions differ between vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ValueError("Rng::below needs n >= 1");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Tensor of i.i.d. samples from U[lo, hi).
template <typename R = float>
Tensor<R> uniform(Rng& rng, const Shape& shape, double lo, double hi) {
  if (!(lo < hi)) throw ValueError("uniform needs lo < hi");
  Tensor<R> out(shape);
  for (R& v : out.data()) {
    R x = static_cast<R>(lo + (hi - lo) * rng.uniform01());
    // Narrowing to R can round up onto the open end.
    if (!(x < static_cast<R>(hi))) x = std::nextafter(static_cast<R>(hi), static_cast<R>(lo));
    v = x;
  }
  return out;
}

template <typename R = float>
Tensor<R> normal(Rng& rng, const Shape& shape, double mean, double stddev) {
  Tensor<R> out(shape);
  for (R& v : out.data()) v = static_cast<R>(rng.normal(mean, stddev));
  return out;
}

}  // namespace bdcgan

#endif  // BDCGAN_RNG_HPP_
