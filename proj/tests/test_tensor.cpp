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

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace bdcgan {
namespace {

TEST(Tensor, ShapeAndFill) {
  FloatTensor t({2, 3}, 1.5f);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.dim(1), 3u);
  for (float v : t.data()) EXPECT_EQ(v, 1.5f);
}

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(FloatTensor({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  EXPECT_THROW(FloatTensor({2, 0}), ShapeError);
}

TEST(Tensor, ReshapePreservesRowMajorOrder) {
  FloatTensor t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  const FloatTensor r = reshape(t, {6});
  EXPECT_EQ(r.shape(), (Shape{6}));
  EXPECT_EQ(r.storage(), t.storage());
  EXPECT_EQ(reshape(FloatTensor({3136}), {64, 49}).shape(), (Shape{64, 49}));
  EXPECT_THROW(reshape(t, {4}), ShapeError);
}

TEST(Tensor, ConcatFeatures) {
  IntTensor a({2, 2}, std::vector<std::int32_t>{1, 2, 3, 4});
  IntTensor b({2, 1}, std::vector<std::int32_t>{9, 8});
  EXPECT_EQ(concat_features(a, b).storage(), (std::vector<std::int32_t>{1, 2, 9, 3, 4, 8}));
  EXPECT_THROW(concat_features(a, IntTensor({3, 1})), ShapeError);
}

TEST(Rng, UniformRangeAndDeterminism) {
  Rng r1(1), r2(1);
  const FloatTensor a = uniform<float>(r1, {4}, -1.0, 1.0);
  const FloatTensor b = uniform<float>(r2, {4}, -1.0, 1.0);
  EXPECT_EQ(a, b);
  for (float v : a.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LT(v, 1.0f);
  }
  Rng r3(1);
  EXPECT_THROW(uniform<float>(r3, {4}, 1.0, 1.0), ValueError);
}

TEST(Rng, UniformStaysBelowHiInFloat) {
  Rng r(3);
  const FloatTensor t = uniform<float>(r, {200000}, -1.0, 1.0);
  for (float v : t.data()) ASSERT_LT(v, 1.0f);
}

TEST(Rng, BelowIsInRange) {
  Rng r(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) ++hist[r.below(7)];
  for (int h : hist) EXPECT_GT(h, 800);
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  const auto t = normal<double>(r, {100000}, 0.0, 0.02);
  double m = 0, v = 0;
  for (double x : t.data()) m += x;
  m /= t.size();
  for (double x : t.data()) v += (x - m) * (x - m);
  v /= t.size();
  EXPECT_NEAR(m, 0.0, 5e-4);
  EXPECT_NEAR(std::sqrt(v), 0.02, 5e-4);
}

}  // namespace
}  // namespace bdcgan
