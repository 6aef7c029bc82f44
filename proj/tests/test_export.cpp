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

#include <regex>

#include "test_util.hpp"

namespace bdcgan {
namespace {

Generator trained_like(const char* scenario, std::uint64_t seed, const Architecture& a = Architecture::tiny()) {
  Rng rng(seed);
  Generator g = build_generator(scenario_by_name(scenario), rng, a);
  testing::randomize(g, rng, 0.05);
  return g;
}

TEST(FoldAndBinarize, SingleNeuronThreshold) {
  Generator g = trained_like("S1-2", 1);
  g.bna1.gamma.fill(1.0f);
  g.bna1.running_mean.fill(0.4f);
  g.bna1.running_var.fill(static_cast<float>(1.0 - g.bna1.eps));
  g.bna1.beta.fill(-0.2f);
  const ExportBundle b = fold_and_binarize(g);
  ASSERT_TRUE(b.bna1.thresholded);
  for (auto t : b.bna1.thresholds) EXPECT_EQ(t, 1);
  EXPECT_EQ(b.bna1.dir_bits[0] & 1u, 1u);
}

TEST(FoldAndBinarize, PacksSignBits) {
  Generator g = trained_like("S1-1", 2, Architecture{1, 1, 1, 1, 1, 1, 1, 1});
  g.fc1.weight = FloatTensor({1, 2}, std::vector<float>{0.3f, -0.7f});
  const ExportBundle b = fold_and_binarize(g);
  ASSERT_TRUE(b.fc1.binarized);
  EXPECT_TRUE(b.fc1.bits.bit(0, 0));
  EXPECT_FALSE(b.fc1.bits.bit(0, 1));
  EXPECT_EQ(b.fc1.bits.words, (std::vector<std::uint32_t>{1u}));
  EXPECT_NE(emit_header(b).find("static const uint32_t fc1_w_bits[1] = {\n    0x00000001\n};"), std::string::npos);
}

TEST(FoldAndBinarize, DegenerateNeuronReportsIndex) {
  Generator g = trained_like("S3-1", 3);
  g.bna2.gamma[2] = 0.0f;
  try {
    fold_and_binarize(g);
    FAIL();
  } catch (const DegenerateNeuronError& e) {
    EXPECT_EQ(e.layer(), "bna2");
    EXPECT_EQ(e.neuron(), 2u);
  }
}

TEST(FoldAndBinarize, S0PassesEverythingThroughAsFloat) {
  const ExportBundle b = fold_and_binarize(trained_like("S0", 4));
  EXPECT_FALSE(b.has_binary_content());
  for (const auto& t : bundle_tensors(b)) EXPECT_EQ(t.dtype, ExportDType::kFloat32) << t.name;
}

TEST(VerifyExport, FreshBundleMatchesExactly) {
  for (const char* s : {"S0", "S1-1", "S1-2", "S2-1", "S2-2", "S3-1", "S3-2"}) {
    const Generator g = trained_like(s, 5);
    const VerifyReport r = verify_export(fold_and_binarize(g), g, 40);
    EXPECT_TRUE(r.integer_match()) << s;
    EXPECT_EQ(r.max_image_diff, 0.0) << s;
    EXPECT_TRUE(r.ok()) << s;
  }
}

TEST(VerifyExport, FullSizeS3_1) {
  Rng rng(6);
  Generator g = build_generator(scenario_by_name("S3-1"), rng);
  testing::randomize(g, rng, 0.05);
  const VerifyReport r = verify_export(fold_and_binarize(g), g, 16);
  EXPECT_EQ(r.integer_stages, 7u);
  EXPECT_TRUE(r.ok()) << r.to_string();
  EXPECT_NE(r.to_string().find("integer stages: exact match"), std::string::npos);
}

TEST(VerifyExport, FlippedBitIsFlagged) {
  const Generator g = trained_like("S3-1", 7);
  for (int layer = 0; layer < 3; ++layer) {
    ExportBundle b = fold_and_binarize(g);
    PackedWeights& w = layer == 0 ? b.fc1.bits : layer == 1 ? b.fc2.bits : b.deconv1.bits;
    w.flip(0, 0);
    const VerifyReport r = verify_export(b, g, 16);
    EXPECT_FALSE(r.integer_match()) << layer;
    EXPECT_FALSE(r.ok());
  }
}

TEST(VerifyExport, ZeroProbesGiveEmptyReport) {
  const Generator g = trained_like("S3-1", 8);
  const VerifyReport r = verify_export(fold_and_binarize(g), g, 0);
  EXPECT_EQ(r.probes, 0u);
  EXPECT_TRUE(r.mismatched.empty());
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.to_string(), "probes: 0\n");
}

TEST(BundleRuntime, FcPopcountHandlesPartialWords) {
  Rng rng(9);
  for (std::size_t in : {1u, 31u, 32u, 33u, 95u}) {
    FcLayer<float> l{uniform<float>(rng, {5, in}, -1, 1), {}, true};
    const PackedWeights w = PackedWeights::from(l.weight_bits());
    IntTensor pm({3, in}), ints({3, in});
    for (std::size_t i = 0; i < pm.size(); ++i) {
      pm[i] = rng.below(2) ? 1 : -1;
      ints[i] = static_cast<std::int32_t>(rng.below(255)) - 127;
    }
    EXPECT_EQ(runtime::fc_int(pm, w), fc_forward_int(l, pm)) << in;
    EXPECT_EQ(runtime::fc_int(ints, w), fc_forward_int(l, ints)) << in;
  }
}

TEST(EmitHeader, DeterministicAndWellFormed) {
  const ExportBundle b = fold_and_binarize(trained_like("S3-1", 10));
  const std::string h = emit_header(b);
  EXPECT_EQ(h, emit_header(b));
  EXPECT_NE(h.find("#ifndef B_DCGAN_PARAMS_H"), std::string::npos);
  EXPECT_NE(h.find("#define B_DCGAN_PARAMS_H"), std::string::npos);
  for (const char* name : {"fc1_w_bits", "bna1_thresh", "bna1_dir", "fc2_w_bits", "bna1b_thresh",
                           "deconv1_w_bits", "bna2_thresh", "bna2_dir", "deconv2_w", "deconv2_b"})
    EXPECT_TRUE(std::regex_search(h, std::regex(std::string("static const \\w+ ") + name + "\\["))) << name;
  // S3-1: the only float arrays are the real-valued output stage.
  std::smatch m;
  std::string rest = h;
  std::vector<std::string> floats;
  while (std::regex_search(rest, m, std::regex("static const float (\\w+)\\["))) {
    floats.push_back(m[1]);
    rest = m.suffix();
  }
  EXPECT_EQ(floats, (std::vector<std::string>{"deconv2_w", "deconv2_b"}));
  EXPECT_NE(h.find("S3-1"), std::string::npos);
  EXPECT_NE(h.find("build id: 0x"), std::string::npos);
}

TEST(EmitHeader, FloatsRoundTripThroughText) {
  const ExportBundle b = fold_and_binarize(trained_like("S0", 11));
  const std::string h = emit_header(b);
  const auto pos = h.find("static const float deconv2_w[");
  ASSERT_NE(pos, std::string::npos);
  const auto open = h.find('{', pos);
  float v = std::strtof(h.c_str() + open + 1, nullptr);
  EXPECT_EQ(v, b.deconv2.weight[0]);
}

TEST(Bundle, BinaryRoundTripAndManifest) {
  const ExportBundle b = fold_and_binarize(trained_like("S3-2", 12));
  const auto bytes = serialize_bundle(b);
  EXPECT_EQ(bytes, serialize_bundle(b));
  const BundleFile f = deserialize_bundle(bytes);
  EXPECT_TRUE(f.scenario == b.scenario);
  const auto tensors = bundle_tensors(b);
  ASSERT_EQ(f.tensors.size(), tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    EXPECT_EQ(f.tensors[i].name, tensors[i].name);
    EXPECT_EQ(f.tensors[i].words, tensors[i].words);
  }
  auto bad = bytes;
  bad.back() ^= 1;
  EXPECT_THROW(deserialize_bundle(bad), FormatError);

  const auto j = bundle_manifest(b);
  EXPECT_EQ(j["scenario"]["name"], "S3-2");
  EXPECT_EQ(j["tensors"].size(), tensors.size());
  EXPECT_EQ(j["tensors"][0]["name"], "fc1_w_bits");
  EXPECT_EQ(j["tensors"][0]["crc32"].get<std::string>().size(), 8u);
}

}  // namespace
}  // namespace bdcgan
