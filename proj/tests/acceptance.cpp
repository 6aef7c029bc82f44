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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "gradcheck.hpp"
#include "test_util.hpp"

namespace bdcgan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1. Packed kernels against the naive sum.
Outcome kernel_oracle() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::size_t bin_bad = 0, int_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng.below(256);
    const auto a = testing::random_signs(rng, n);
    const auto w = testing::random_signs(rng, n);
    const BitMatrix pa = pack(testing::to_tensor(a));
    const BitMatrix pw = pack(testing::to_tensor(w));
    if (bin_dot(pa.row(0), pw.row(0)) != testing::naive_dot(a, w)) ++bin_bad;
    std::vector<std::int32_t> ai(n);
    std::vector<int> ai_wide(n);
    for (std::size_t k = 0; k < n; ++k) ai_wide[k] = ai[k] = static_cast<std::int32_t>(rng.below(8191)) - 4095;
    if (int_dot(ai, pw.row(0)) != testing::naive_dot(ai_wide, w)) ++int_bad;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "10000 pairs, bin_dot mismatches " << bin_bad << ", int_dot mismatches " << int_bad << ", " << secs << " s";
  return {bin_bad == 0 && int_bad == 0 && secs < 10.0, os.str()};
}

// 2. Folded thresholds against sign(BatchNorm(a)) evaluated directly.
Outcome threshold_folding() {
  Rng rng(202);
  std::size_t compared = 0, wrong = 0, negative_scale = 0, params = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t channels = 1 + rng.below(8);
    auto layer = BatchNormLayer<float>::make(channels, true);
    for (std::size_t c = 0; c < channels; ++c) {
      // |gamma| log-uniform in [2e-6, 3]; inv_std <= 10 keeps |gamma * i| >= 1e-6.
      const double mag = std::exp(std::log(2e-6) + rng.uniform01() * (std::log(3.0) - std::log(2e-6)));
      layer.gamma[c] = static_cast<float>(rng.below(2) ? mag : -mag);
      layer.beta[c] = static_cast<float>(6 * rng.uniform01() - 3);
      layer.running_mean[c] = static_cast<float>(60 * rng.uniform01() - 30);
      layer.running_var[c] = static_cast<float>(0.01 + 4 * rng.uniform01());
    }
    const BNParams p = bn_params(layer, "bna");
    ++params;
    IntTensor a({101, channels});
    for (std::size_t i = 0; i < 101; ++i)
      for (std::size_t c = 0; c < channels; ++c) a[i * channels + c] = static_cast<std::int32_t>(i) - 50;
    const IntTensor out = bna_forward_threshold(a, p.thresholds);
    for (std::size_t c = 0; c < channels; ++c) {
      const double gamma = layer.gamma[c], beta = layer.beta[c], mean = layer.running_mean[c];
      const double inv_std = 1.0 / std::sqrt(static_cast<double>(layer.running_var[c]) + layer.eps);
      const double tau = mean - beta / (gamma * inv_std);
      if (gamma * inv_std < 0) ++negative_scale;
      for (std::size_t i = 0; i < 101; ++i) {
        const double av = static_cast<double>(i) - 50;
        if (std::abs(av - tau) < 0.5) continue;
        const double bn = gamma * (av - mean) * inv_std + beta;
        ++compared;
        if (out[i * channels + c] != (bn >= 0 ? 1 : -1)) ++wrong;
      }
    }
  }
  const FoldedThreshold hand = bna_fold({1.0, 0.4, 1.0, -0.2});
  const bool hand_ok = std::abs(hand.tau - 0.6) < 1e-12 && hand.tau_b == 1;
  std::ostringstream os;
  os << params << " parameter sets, " << compared << " activations compared, " << wrong << " wrong, "
     << negative_scale << " neurons with negative scale, tau=0.6 -> " << hand.tau_b;
  return {wrong == 0 && negative_scale > 0 && compared > 0 && hand_ok, os.str()};
}

// 3. Scenario flags against an independent copy of the scenario table.
Outcome table_fidelity() {
  struct Row {
    const char* name;
    bool integer_input;
    int a;
    bool bfc, bbna1, bdeconv1, bbna2, bdeconv2;
  };
  constexpr Row kTable[] = {
      {"S0", false, 1, false, false, false, false, false},  {"S1-1", true, 1, true, false, false, false, false},
      {"S1-2", true, 1, true, true, false, false, false},   {"S2-1", true, 127, true, true, false, false, false},
      {"S2-2", true, 4095, true, true, false, false, false}, {"S3-1", true, 1, true, true, true, true, false},
      {"S3-2", true, 1, true, true, true, true, true},
  };
  std::size_t bad = 0;
  for (const Row& r : kTable) {
    Rng rng(1);
    const Generator g = build_generator(scenario_by_name(r.name), rng, Architecture::tiny());
    const ScenarioConfig& s = g.scenario;
    const bool ok = s.name == r.name && s.input_as_integer == r.integer_input &&
                    (!r.integer_input || s.a == r.a) && g.fc1.binarized == r.bfc && g.fc2.binarized == r.bfc &&
                    g.bna1.binarized == r.bbna1 && g.bna1b.binarized == r.bbna1 &&
                    g.deconv1.binarized == r.bdeconv1 && g.bna2.binarized == r.bbna2 &&
                    g.deconv2.binarized == r.bdeconv2;
    if (!ok) ++bad;
  }
  const bool a_ok = scenario_by_name("S2-1").a == 127 && scenario_by_name("S2-2").a == 4095;
  std::ostringstream os;
  os << std::size(kTable) << " scenarios, " << bad << " mismatched";
  return {bad == 0 && a_ok && scenario_presets().size() == std::size(kTable), os.str()};
}

// 4. Analytic gradients of the float model against central differences.
Outcome gradient_check() {
  const auto t0 = Clock::now();
  const Architecture arch = Architecture::tiny();  // fc 16 units, 8x8 images
  const auto r = testing::gradient_check_s0(404, arch);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << r.checked << " coordinates, " << r.failures << " above 1e-3, worst " << r.worst_rel << " at " << r.worst
     << ", " << r.refined << " re-stepped near kinks, " << secs << " s";
  return {r.failures == 0 && r.checked > 0 && secs < 60.0, os.str()};
}

// 5. Linear decay to exactly zero, and no movement once there.
Outcome lr_schedule() {
  const TrainConfig cfg;
  std::size_t off = 0;
  for (std::size_t t = 0; t <= 3000; ++t) {
    const double want = std::max(0.0, 1e-4 - static_cast<double>(t) * (1e-4 / 3000));
    if (cfg.learning_rate(t) != want || (t < 3000 && !(cfg.learning_rate(t) > 0))) ++off;
  }
  for (std::size_t t = 3000; t <= 1000000; t += 997)
    if (cfg.learning_rate(t) != 0.0) ++off;
  const bool zero_at_end = cfg.learning_rate(3000) == 0.0;

  TrainConfig run = cfg;
  run.batch_size = 4;
  run.seed = 505;
  run.max_iterations = 3006;
  auto s = make_train_state<float>(scenario_by_name("S3-1"), run, Architecture::tiny());
  s.iteration = 3000;
  Rng rng(5);
  Dataset ds;
  ds.images = uniform<float>(rng, {8, 1, 8, 8}, -1, 1);
  ds.labels = {0, 1, 2, 0, 1, 2, 0, 1};
  auto trainable = [](const auto& m) {
    std::vector<FloatTensor> out;
    visit_tensors(m, [&](const std::string&, const FloatTensor& t, TensorRole role) {
      if (role != TensorRole::kStatistic) out.push_back(t);
    });
    return out;
  };
  const auto g0 = trainable(s.generator);
  const auto d0 = trainable(s.discriminator);
  EpochBatches ep(ds, 4, rng, true, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    const Batch b = ep[i % ep.size()];
    train_step(s, b.images, b.labels);
  }
  const bool frozen = trainable(s.generator) == g0 && trainable(s.discriminator) == d0;
  std::ostringstream os;
  os << "lr(3000) = " << cfg.learning_rate(3000) << ", schedule deviations " << off
     << ", parameters after 6 steps past 3000 " << (frozen ? "unchanged" : "CHANGED");
  return {off == 0 && zero_at_end && frozen, os.str()};
}

// 6. Short S3-1 run on the MNIST subset. Also returns the trained model.
Outcome smoke_training(Generator& trained) {
  const auto t0 = Clock::now();
  const Dataset ds = load_mnist_dir(testing::mnist_fixture_dir());
  TrainConfig cfg;
  cfg.max_iterations = 200;
  cfg.seed = 606;
  auto s = make_train_state<float>(scenario_by_name("S3-1"), cfg);
  std::size_t non_finite = 0;
  train(s, ds, "", [&](const LossRecord& r) {
    if (!std::isfinite(r.d_loss) || !std::isfinite(r.g_loss)) ++non_finite;
  });
  const double secs = seconds_since(t0);
  trained = s.generator;

  Rng rng(607);
  const FloatTensor z = uniform<float>(rng, {128, s.generator.arch.z_dim}, -1, 1);
  std::vector<int> labels(128);
  for (int& l : labels) l = static_cast<int>(rng.below(10));
  const FloatTensor imgs = generator_forward(s.generator, z, one_hot<float>(labels, 10), Mode::kEval);
  double mean = 0, sq = 0;
  for (float v : imgs.data()) mean += v;
  mean /= static_cast<double>(imgs.size());
  for (float v : imgs.data()) sq += (v - mean) * (v - mean);
  const double stddev = std::sqrt(sq / static_cast<double>(imgs.size()));

  std::ostringstream os;
  os << s.history.size() << " iterations on " << ds.size() << " images, " << non_finite
     << " non-finite losses, final d_loss " << s.history.back().d_loss << " g_loss " << s.history.back().g_loss
     << ", eval batch std " << stddev << ", " << secs << " s";
  return {non_finite == 0 && s.history.size() == 200 && stddev > 0.01 && secs < 600.0, os.str()};
}

// 7. Model file and export round trips.
Outcome export_round_trip(const Generator& trained) {
  Rng rng(707);
  std::size_t bad_round_trips = 0;
  for (int i = 0; i < 1000; ++i) {
    const Generator g = testing::fuzz_model(rng);
    if (!testing::bitwise_equal(g, deserialize_model(serialize_model(g)))) ++bad_round_trips;
  }
  const std::string dir = testing::scratch_dir("acceptance_export");
  save_model(trained, dir + "/m.bdcg");
  const Generator reloaded = load_model(dir + "/m.bdcg");
  const ExportBundle bundle = fold_and_binarize(reloaded);
  const VerifyReport rep = verify_export(bundle, reloaded, 64, 708);
  const std::string h1 = emit_header(bundle);
  const std::string h2 = emit_header(fold_and_binarize(load_model(dir + "/m.bdcg")));
  std::ostringstream os;
  os << "1000 fuzzed round trips, " << bad_round_trips << " differ; 64 probes: " << rep.integer_stages
     << " integer stages " << (rep.integer_match() ? "exact" : "MISMATCH") << ", max image diff "
     << rep.max_image_diff << "; header " << (h1 == h2 ? "deterministic" : "NOT deterministic");
  return {bad_round_trips == 0 && rep.probes == 64 && rep.integer_stages > 0 && rep.ok(1e-5) && h1 == h2, os.str()};
}

// 8. S3-1 eval path: integer up to deconv2, and repeatable.
Outcome integer_purity(const Generator& trained) {
  Rng rng(808);
  const FloatTensor z = uniform<float>(rng, {32, trained.arch.z_dim}, -1, 1);
  std::vector<int> labels(32);
  for (int& l : labels) l = static_cast<int>(rng.below(10));
  const FloatTensor y = one_hot<float>(labels, 10);
  const auto t1 = generator_trace(trained, z, y);
  const auto t2 = generator_trace(trained, z, y);
  std::size_t int_stages = 0;
  bool structural = true, identical = true;
  for (std::size_t i = 0; i < t1.stages.size(); ++i) {
    const bool want_int = t1.stages[i].name != "deconv2";
    structural = structural && t1.stages[i].is_integer() == want_int;
    if (t1.stages[i].is_integer()) {
      ++int_stages;
      identical = identical && std::get<IntTensor>(t1.stages[i].value) == std::get<IntTensor>(t2.stages[i].value);
    }
  }
  const bool images_same = t1.images.size() == t2.images.size() &&
                           std::memcmp(t1.images.ptr(), t2.images.ptr(), t1.images.size() * sizeof(float)) == 0;
  std::ostringstream os;
  os << int_stages << " of " << t1.stages.size() << " stages integer, repeated run "
     << (identical && images_same ? "bit-identical" : "DIFFERS");
  return {trained.scenario.name == "S3-1" && structural && int_stages == 7 && identical && images_same, os.str()};
}

// 9. <conv(x), y> == <x, deconv(y)> on random instances. Judged in double;
// float32 inner products of this size can cancel to a few parts in 1e3 of
// their term magnitudes, so the float32 figure is reported alongside.
Outcome adjointness() {
  Rng rng(909);
  const ConvGeometry g;
  double worst = 0, worst_f32 = 0;
  std::size_t bad = 0;
  auto rel_gap = [&](const auto& x, const auto& k, const auto& y) {
    using T = std::decay_t<decltype(x)>;
    const T cx = conv2d(x, k, static_cast<const T*>(nullptr), g);
    const T dy = deconv2d(y, k, static_cast<const T*>(nullptr), g);
    double lhs = 0, rhs = 0;
    for (std::size_t j = 0; j < cx.size(); ++j) lhs += static_cast<double>(cx[j]) * y[j];
    for (std::size_t j = 0; j < x.size(); ++j) rhs += static_cast<double>(x[j]) * dy[j];
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  };
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(2), ci = 1 + rng.below(4), co = 1 + rng.below(4);
    const std::size_t h = 1 + rng.below(7), w = 1 + rng.below(7);
    const FloatTensor x = uniform<float>(rng, {n, ci, 2 * h, 2 * w}, -1, 1);
    const FloatTensor k = uniform<float>(rng, {co, ci, 5, 5}, -1, 1);
    const FloatTensor y = uniform<float>(rng, {n, co, h, w}, -1, 1);
    const double rel = rel_gap(x.cast<double>(), k.cast<double>(), y.cast<double>());
    worst = std::max(worst, rel);
    worst_f32 = std::max(worst_f32, rel_gap(x, k, y));
    if (!(rel <= 1e-5)) ++bad;
  }
  std::ostringstream os;
  os << "100 instances, " << bad << " above 1e-5, worst relative " << worst << " (float32 worst " << worst_f32
     << ")";
  return {bad == 0, os.str()};
}

}  // namespace
}  // namespace bdcgan

int main() {
  using namespace bdcgan;
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  Generator trained;
  bool trained_ok = false;
  report(1, "kernel oracle equivalence", kernel_oracle);
  report(2, "threshold folding", threshold_folding);
  report(3, "scenario table", table_fidelity);
  report(4, "gradient check", gradient_check);
  report(5, "learning-rate schedule", lr_schedule);
  report(6, "smoke training", [&] {
    Outcome o = smoke_training(trained);
    trained_ok = !trained.scenario.name.empty() && trained.fc1.weight.size() > 0;
    return o;
  });
  report(7, "export round trip", [&] {
    if (!trained_ok) return Outcome{false, "no trained model"};
    return export_round_trip(trained);
  });
  report(8, "integer purity", [&] {
    if (!trained_ok) return Outcome{false, "no trained model"};
    return integer_purity(trained);
  });
  report(9, "deconvolution adjointness", adjointness);
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
