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

#include <filesystem>

#include "gradcheck.hpp"
#include "test_util.hpp"

namespace bdcgan {
namespace {

TEST(SgdUpdate, Examples) {
  FloatTensor p({1}, 0.0f);
  sgd_update(p, FloatTensor({1}, 1.0f), 0.1, false);
  EXPECT_FLOAT_EQ(p[0], -0.1f);
  FloatTensor q({1}, 0.99f);
  sgd_update(q, FloatTensor({1}, -1.0f), 0.1, true);
  EXPECT_EQ(q[0], 1.0f);
  FloatTensor r({2}, 0.5f);
  sgd_update(r, FloatTensor({2}, 3.0f), 0.0, false);
  EXPECT_EQ(r[0], 0.5f);
  EXPECT_THROW(sgd_update(r, r, -1.0, false), ValueError);
}

TEST(SgdStep, ClipsOnlyBinarizedMasters) {
  Rng rng(1);
  auto g = build_generator(scenario_by_name("S3-1"), rng, Architecture::tiny());
  auto grads = zeros_like(g);
  visit_tensors(grads, [](const std::string&, FloatTensor& t, TensorRole) { t.fill(-100.0f); });
  const auto before = g;
  sgd_step(g, grads, 0.1);
  for (float v : g.fc1.weight.data()) EXPECT_EQ(v, 1.0f);
  for (float v : g.deconv1.weight.data()) EXPECT_EQ(v, 1.0f);
  for (float v : g.deconv2.weight.data()) EXPECT_GT(v, 9.0f);  // real-valued layer: unclipped
  for (float v : g.bna1.gamma.data()) EXPECT_FLOAT_EQ(v, 11.0f);
  EXPECT_EQ(g.bna1.running_mean, before.bna1.running_mean);
  EXPECT_EQ(g.bna1.running_var, before.bna1.running_var);
}

TEST(LearningRate, LinearDecayToExactlyZero) {
  const TrainConfig c;
  EXPECT_EQ(c.learning_rate(0), 1e-4);
  EXPECT_EQ(c.learning_rate(3000), 0.0);
  EXPECT_EQ(c.learning_rate(5000), 0.0);
  EXPECT_NEAR(c.learning_rate(1500), 5e-5, 1e-18);
  for (std::size_t t = 1; t < 3100; ++t) ASSERT_LE(c.learning_rate(t), c.learning_rate(t - 1));
}

Dataset synthetic_dataset(std::size_t n, std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.images = uniform<float>(rng, {n, 1, size, size}, -1, 1);
  for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i % 3));
  return ds;
}

TrainConfig tiny_config(std::uint64_t seed) {
  TrainConfig c;
  c.batch_size = 4;
  c.lr0 = 0.05;
  c.lr_decay_per_step = 0.05 / 20;
  c.max_iterations = 6;
  c.seed = seed;
  return c;
}

TEST(TrainStep, UpdatesGeneratorAndStaysFinite) {
  auto s = make_train_state<float>(scenario_by_name("S3-2"), tiny_config(3), Architecture::tiny());
  const auto before = s.generator;
  const Dataset ds = synthetic_dataset(8, 8, 4);
  Rng rng(5);
  const Batch b = EpochBatches(ds, 4, rng, false, 3)[0];
  const StepLosses l = train_step(s, b.images, b.labels);
  EXPECT_TRUE(std::isfinite(l.d_loss));
  EXPECT_TRUE(std::isfinite(l.g_loss));
  EXPECT_FALSE(models_identical(before, s.generator));
  EXPECT_EQ(s.iteration, 1u);
  ASSERT_EQ(s.history.size(), 1u);
  EXPECT_EQ(s.history[0].lr, 0.05);
}

TEST(TrainStep, MasterWeightsStayClipped) {
  auto cfg = tiny_config(6);
  cfg.lr0 = 5.0;
  cfg.lr_decay_per_step = 0;
  auto s = make_train_state<float>(scenario_by_name("S3-2"), cfg, Architecture::tiny());
  const Dataset ds = synthetic_dataset(8, 8, 7);
  train(s, ds, "");
  visit_tensors(s.generator, [](const std::string& name, const FloatTensor& t, TensorRole role) {
    if (role != TensorRole::kBinarizedWeight) return;
    for (float v : t.data()) ASSERT_LE(std::abs(v), 1.0f) << name;
  });
}

TEST(TrainStep, FrozenOnceLearningRateReachesZero) {
  auto cfg = tiny_config(8);
  cfg.lr0 = 0.25;
  cfg.lr_decay_per_step = 0.015625;  // exactly zero at step 16
  cfg.max_iterations = 16;
  auto s = make_train_state<float>(scenario_by_name("S1-2"), cfg, Architecture::tiny());
  const Dataset ds = synthetic_dataset(8, 8, 9);
  train(s, ds, "");
  const auto g = s.generator;
  const auto d = s.discriminator;
  s.config.max_iterations = 22;
  train(s, ds, "");
  EXPECT_EQ(s.history.back().lr, 0.0);
  // Trainable parameters are unchanged; running statistics still track batches.
  auto trainable = [](const auto& m) {
    std::vector<FloatTensor> out;
    visit_tensors(m, [&](const std::string&, const FloatTensor& t, TensorRole r) {
      if (r != TensorRole::kStatistic) out.push_back(t);
    });
    return out;
  };
  EXPECT_EQ(trainable(g), trainable(s.generator));
  EXPECT_EQ(trainable(d), trainable(s.discriminator));
}

TEST(TrainStep, FrozenPastDefaultScheduleEnd) {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seed = 13;
  auto s = make_train_state<float>(scenario_by_name("S3-1"), cfg, Architecture::tiny());
  s.iteration = 3000;
  const auto before = s.generator;
  const Dataset ds = synthetic_dataset(8, 8, 14);
  Rng rng(15);
  const Batch b = EpochBatches(ds, 4, rng, false, 3)[0];
  train_step(s, b.images, b.labels);
  EXPECT_EQ(s.history.back().lr, 0.0);
  std::vector<FloatTensor> want, got;
  visit_tensors(before, [&](const std::string&, const FloatTensor& t, TensorRole r) {
    if (r != TensorRole::kStatistic) want.push_back(t);
  });
  visit_tensors(s.generator, [&](const std::string&, const FloatTensor& t, TensorRole r) {
    if (r != TensorRole::kStatistic) got.push_back(t);
  });
  EXPECT_EQ(want, got);
}

TEST(Train, DeterministicGivenSeed) {
  const Dataset ds = synthetic_dataset(12, 8, 10);
  auto run = [&] {
    auto s = make_train_state<float>(scenario_by_name("S3-1"), tiny_config(11), Architecture::tiny());
    train(s, ds, "");
    return loss_csv(s.history);
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, DivergenceIsReported) {
  auto s = make_train_state<float>(scenario_by_name("S0"), tiny_config(12), Architecture::tiny());
  FloatTensor img({4, 1, 8, 8}, std::numeric_limits<float>::quiet_NaN());
  EXPECT_THROW(train_step(s, img, one_hot<float>({0, 1, 2, 0}, 3)), TrainingDiverged);
}

TEST(Train, SnapshotsAtMultiplesOfInterval) {
  const std::string dir = testing::scratch_dir("snapshots");
  auto cfg = tiny_config(13);
  cfg.max_iterations = 250;
  cfg.snapshot_every = 100;
  cfg.batch_size = 2;
  auto s = make_train_state<float>(scenario_by_name("S0"), cfg, Architecture::tiny());
  const Dataset ds = synthetic_dataset(4, 8, 14);
  const TrainReport r = train(s, ds, dir);
  ASSERT_EQ(r.snapshots.size(), 3u);
  for (const char* tag : {"000000", "000100", "000200"}) {
    EXPECT_TRUE(std::filesystem::exists(dir + "/model_" + std::string(tag) + ".bdcg")) << tag;
    EXPECT_TRUE(std::filesystem::exists(dir + "/sample_" + std::string(tag) + ".png")) << tag;
  }
  EXPECT_TRUE(std::filesystem::exists(dir + "/loss.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/model_final.bdcg"));
  const std::string csv = read_file_text(dir + "/loss.csv");
  EXPECT_EQ(csv.rfind("iteration,d_loss,g_loss,lr\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 251);
}

TEST(Train, SnapshotAtIterationZeroReloadsBitIdentical) {
  const std::string dir = testing::scratch_dir("snapshot0");
  auto s = make_train_state<float>(scenario_by_name("S3-1"), tiny_config(15), Architecture::tiny());
  const auto [image, model] = snapshot(s, dir);
  EXPECT_TRUE(std::filesystem::exists(image));
  EXPECT_TRUE(models_identical(load_model(model), s.generator));
}

TEST(Train, ProbesFixedAcrossSnapshots) {
  auto s = make_train_state<float>(scenario_by_name("S0"), tiny_config(16), Architecture::tiny());
  const auto z = s.probe_z, y = s.probe_y;
  train(s, synthetic_dataset(8, 8, 17), "");
  EXPECT_EQ(s.probe_z, z);
  EXPECT_EQ(s.probe_y, y);
  EXPECT_EQ(z.shape(), (Shape{16, 4}));
}

TEST(GradientCheck, S0ReducedInstance) {
  const auto r = testing::gradient_check_s0(1, Architecture::tiny());
  EXPECT_GT(r.checked, 2000u);
  EXPECT_EQ(r.failures, 0u) << "worst " << r.worst << " rel " << r.worst_rel;
}

}  // namespace
}  // namespace bdcgan
