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

#ifndef BDCGAN_TRAINING_HPP_
#define BDCGAN_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bdcgan/dataio.hpp"
#include "bdcgan/discriminator.hpp"
#include "bdcgan/generator.hpp"
#include "bdcgan/modelio.hpp"
#include "bdcgan/rng.hpp"
#include "bdcgan/ste.hpp"

namespace bdcgan {

struct TrainConfig {
  std::size_t batch_size = 128;
  double lr0 = 1e-4;
  double lr_decay_per_step = 1e-4 / 3000;
  std::size_t max_iterations = 3000;
  std::size_t snapshot_every = 0;  // 0: no snapshots
  std::uint64_t seed = 0;
  double bn_momentum = 0.9;

  // max(0, lr0 - t * decay): linear decay that stays at zero once reached.
  double learning_rate(std::size_t t) const {
    return std::max(0.0, lr0 - static_cast<double>(t) * lr_decay_per_step);
  }
};

struct LossRecord {
  std::size_t iteration;
  double d_loss;
  double g_loss;
  double lr;
};

struct StepLosses {
  double d_loss;
  double g_loss;
};

constexpr std::size_t kProbeCount = 16;

template <typename R>
struct TrainState {
  TrainConfig config;
  GeneratorModel<R> generator;
  DiscriminatorModel<R> discriminator;
  std::size_t iteration = 0;
  Rng rng;
  std::vector<LossRecord> history;
  Tensor<R> probe_z;  // fixed inputs rendered at every snapshot
  Tensor<R> probe_y;
};

// Seeds: models and per-step sampling draw from Rng(seed); the snapshot
// probes from an independent stream so they do not shift the training draws.
template <typename R = float>
TrainState<R> make_train_state(const ScenarioConfig& scenario, const TrainConfig& config,
                               const Architecture& arch = {}) {
  TrainState<R> s{config, {}, {}, 0, Rng(config.seed), {}, {}, {}};
  s.generator = build_generator<R>(scenario, s.rng, arch);
  s.discriminator = build_discriminator<R>(s.rng, arch);
  Rng probes(config.seed ^ 0x9E3779B97F4A7C15ull);
  s.probe_z = uniform<R>(probes, {kProbeCount, arch.z_dim}, -1.0, 1.0);
  std::vector<int> labels(kProbeCount);
  for (std::size_t i = 0; i < kProbeCount; ++i) labels[i] = static_cast<int>(i % arch.num_classes);
  s.probe_y = one_hot<R>(labels, arch.num_classes);
  return s;
}

// p <- p - lr * g, clipped to [-1, 1] for binarized master weights.
template <typename R>
void sgd_update(Tensor<R>& p, const Tensor<R>& g, double lr, bool clip) {
  if (lr < 0) throw ValueError("learning rate must be >= 0");
  if (lr == 0) return;
  const R step = static_cast<R>(lr);
  for (std::size_t i = 0; i < p.size(); ++i) {
    R v = p[i] - step * g[i];
    if (clip) v = std::clamp(v, R(-1), R(1));
    p[i] = v;
  }
}

// Applies one SGD step to every trainable tensor of a generator or
// discriminator. Running statistics are left alone.
template <typename Model>
  requires requires(Model& m) { m.fc1; }
void sgd_step(Model& params, const Model& grads, double lr) {
  using R = typename decltype(params.fc1.weight)::value_type;
  std::vector<const Tensor<R>*> g;
  visit_tensors(grads, [&](const std::string&, const Tensor<R>& t, TensorRole) { g.push_back(&t); });
  std::size_t i = 0;
  visit_tensors(params, [&](const std::string&, Tensor<R>& t, TensorRole role) {
    const Tensor<R>& grad = *g[i++];
    if (role != TensorRole::kStatistic) sgd_update(t, grad, lr, role == TensorRole::kBinarizedWeight);
  });
}

template <typename Model>
  requires requires(Model& m) { m.conv1; }
void sgd_step(Model& params, const Model& grads, double lr) {
  using R = typename decltype(params.fc.weight)::value_type;
  std::vector<const Tensor<R>*> g;
  visit_tensors(grads, [&](const std::string&, const Tensor<R>& t, TensorRole) { g.push_back(&t); });
  std::size_t i = 0;
  visit_tensors(params, [&](const std::string&, Tensor<R>& t, TensorRole) { sgd_update(t, *g[i++], lr, false); });
}

namespace detail {

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mean over the batch of softplus(sign * logit), and its gradient.
template <typename R>
double bce_from_logits(const Tensor<R>& logits, double sign, Tensor<R>* grad) {
  const double n = static_cast<double>(logits.size());
  double loss = 0.0;
  if (grad) *grad = Tensor<R>(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    loss += softplus(sign * l);
    if (grad) (*grad)[i] = static_cast<R>(sign * sigmoid(sign * l) / n);
  }
  return loss / n;
}

}  // namespace detail

// Discriminator loss: real pairs labelled 1, generated pairs labelled 0.
// Generator loss: non-saturating, -log D(G(z, y), y).
template <typename R>
double discriminator_loss(const DiscriminatorModel<R>& d, const Tensor<R>& real, const Tensor<R>& real_y,
                          const Tensor<R>& fake, const Tensor<R>& fake_y,
                          std::type_identity_t<DiscriminatorModel<R>>* grads = nullptr) {
  DiscriminatorTape<R> tr, tf;
  const Tensor<R> lr = discriminator_logits(d, real, real_y, &tr);
  const Tensor<R> lf = discriminator_logits(d, fake, fake_y, &tf);
  Tensor<R> gr, gf;
  const double loss = detail::bce_from_logits(lr, -1.0, grads ? &gr : nullptr) +
                      detail::bce_from_logits(lf, 1.0, grads ? &gf : nullptr);
  if (grads) {
    discriminator_backward(d, tr, gr, grads, false);
    discriminator_backward(d, tf, gf, grads, false);
  }
  return loss;
}

// Returns the loss and, when `grad_images` is given, dL/dimages.
template <typename R>
double generator_loss(const DiscriminatorModel<R>& d, const Tensor<R>& fake, const Tensor<R>& fake_y,
                      std::type_identity_t<Tensor<R>>* grad_images = nullptr) {
  DiscriminatorTape<R> t;
  const Tensor<R> l = discriminator_logits(d, fake, fake_y, &t);
  Tensor<R> g;
  const double loss = detail::bce_from_logits(l, -1.0, grad_images ? &g : nullptr);
  if (grad_images) *grad_images = discriminator_backward(d, t, g, nullptr, true);
  return loss;
}

// One discriminator update followed by one generator update on a fresh
// (z, y) draw. Throws TrainingDiverged on a non-finite loss.
template <typename R>
StepLosses train_step(TrainState<R>& s, const Tensor<R>& real_images, const Tensor<R>& real_labels) {
  const std::size_t batch = real_images.dim(0);
  const Architecture& arch = s.generator.arch;
  const double lr = s.config.learning_rate(s.iteration);

  const Tensor<R> z = uniform<R>(s.rng, {batch, arch.z_dim}, -1.0, 1.0);
  std::vector<int> classes(batch);
  for (int& c : classes) c = static_cast<int>(s.rng.below(arch.num_classes));
  const Tensor<R> y = one_hot<R>(classes, arch.num_classes);

  GeneratorTape<R> tape;
  const Tensor<R> fake = generator_forward_train(s.generator, z, y, tape);
  update_running_stats(s.generator, tape, s.config.bn_momentum);

  DiscriminatorModel<R> d_grads = zeros_like(s.discriminator);
  const double d_loss = discriminator_loss(s.discriminator, real_images, real_labels, fake, y, &d_grads);
  if (!std::isfinite(d_loss))
    throw TrainingDiverged("non-finite discriminator loss at iteration " + std::to_string(s.iteration));
  sgd_step(s.discriminator, d_grads, lr);

  Tensor<R> grad_images;
  const double g_loss = generator_loss(s.discriminator, fake, y, &grad_images);
  if (!std::isfinite(g_loss))
    throw TrainingDiverged("non-finite generator loss at iteration " + std::to_string(s.iteration));
  GeneratorModel<R> g_grads = zeros_like(s.generator);
  generator_backward(s.generator, tape, grad_images, g_grads);
  sgd_step(s.generator, g_grads, lr);

  s.history.push_back({s.iteration, d_loss, g_loss, lr});
  ++s.iteration;
  return {d_loss, g_loss};
}

inline std::string iteration_tag(std::size_t it) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", it);
  return buf;
}

// Writes sample_<iter>.png (4x4 grid of the probe inputs, eval mode) and
// model_<iter>.bdcg into `dir`. Returns the two paths.
inline std::pair<std::string, std::string> snapshot(const TrainState<float>& s, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::string tag = iteration_tag(s.iteration);
  const std::string image = (fs::path(dir) / ("sample_" + tag + ".png")).string();
  const std::string model = (fs::path(dir) / ("model_" + tag + ".bdcg")).string();
  write_grid(generator_forward(s.generator, s.probe_z, s.probe_y, Mode::kEval), 4, image);
  save_model(s.generator, model);
  return {image, model};
}

inline std::string loss_csv(const std::vector<LossRecord>& history) {
  std::string out = "iteration,d_loss,g_loss,lr\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", r.iteration, r.d_loss, r.g_loss, r.lr);
    out += buf;
  }
  return out;
}

struct TrainReport {
  std::vector<std::string> snapshots;  // model files, in order
  std::string loss_csv_path;
  std::string final_model_path;
};

// Runs s.iteration .. max_iterations - 1 over epoch-shuffled batches. With an
// empty `out_dir` nothing is written. `on_step` (optional) sees each step.
inline TrainReport train(TrainState<float>& s, const Dataset& ds, const std::string& out_dir,
                         const std::function<void(const LossRecord&)>& on_step = {}) {
  namespace fs = std::filesystem;
  TrainReport report;
  const std::size_t bs = s.config.batch_size;
  if (ds.size() < bs)
    throw ValueError("dataset has " + std::to_string(ds.size()) + " images, fewer than one batch of " +
                     std::to_string(bs));
  Rng data_rng(s.config.seed + 0x5851F42D4C957F2Dull);
  EpochBatches epoch(ds, bs, data_rng, true, s.generator.arch.num_classes);
  std::size_t cursor = 0;
  while (s.iteration < s.config.max_iterations) {
    if (!out_dir.empty() && s.config.snapshot_every > 0 && s.iteration % s.config.snapshot_every == 0)
      report.snapshots.push_back(snapshot(s, out_dir).second);
    if (cursor == epoch.size()) {
      epoch = EpochBatches(ds, bs, data_rng, true, s.generator.arch.num_classes);
      cursor = 0;
    }
    const Batch b = epoch[cursor++];
    train_step(s, b.images, b.labels);
    if (on_step) on_step(s.history.back());
  }
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    report.loss_csv_path = (fs::path(out_dir) / "loss.csv").string();
    write_file(report.loss_csv_path, loss_csv(s.history));
    report.final_model_path = (fs::path(out_dir) / "model_final.bdcg").string();
    save_model(s.generator, report.final_model_path);
  }
  return report;
}

}  // namespace bdcgan

#endif  // BDCGAN_TRAINING_HPP_
