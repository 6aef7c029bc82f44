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

// Command-line front end: train, generate, export, verify.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification
// failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bdcgan/bdcgan.hpp"

namespace fs = std::filesystem;
using namespace bdcgan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainArgs {
  std::string scenario = "S3-1";
  std::string mnist_dir;
  std::string out;
  std::string config;
  std::size_t iters = 3000;
  std::uint64_t seed = 0;
  std::size_t batch = 128;
  std::size_t snapshot_every = 500;
};

struct GenerateArgs {
  std::string model;
  int label = 0;
  std::size_t count = 16;
  std::string out;
  std::uint64_t seed = 0;
};

struct ExportArgs {
  std::string model;
  std::string format = "cheader";
  std::string out;
};

struct VerifyArgs {
  std::string model;
  std::size_t probes = 64;
};

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

// The JSON file may carry a "scenario" object (flags layered over the named
// preset, or over S0 for --scenario custom) and a "train" object.
void apply_config(const std::string& path, ScenarioConfig& sc, TrainConfig& tc) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cannot parse --config " + path + ": " + e.what());
  }
  try {
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      read_opt(s, "name", sc.name);
      read_opt(s, "input_as_integer", sc.input_as_integer);
      read_opt(s, "A", sc.a);
      read_opt(s, "bfc", sc.bfc);
      read_opt(s, "bbna1", sc.bbna1);
      read_opt(s, "bdeconv1", sc.bdeconv1);
      read_opt(s, "bbna2", sc.bbna2);
      read_opt(s, "bdeconv2", sc.bdeconv2);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      read_opt(t, "lr0", tc.lr0);
      read_opt(t, "lr_decay_per_step", tc.lr_decay_per_step);
      read_opt(t, "bn_momentum", tc.bn_momentum);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad value in --config " + path + ": " + e.what());
  }
  if (sc.input_as_integer && sc.a < 1) throw UsageError("scenario A must be >= 1");
}

int cmd_train(const TrainArgs& a, bool config_given) {
  ScenarioConfig sc;
  if (a.scenario == "custom") {
    if (!config_given) throw UsageError("--scenario custom needs --config");
    sc.name = "custom";
  } else {
    try {
      sc = scenario_by_name(a.scenario);
    } catch (const ValueError& e) {
      throw UsageError(e.what());
    }
  }
  TrainConfig tc;
  if (config_given) apply_config(a.config, sc, tc);
  tc.max_iterations = a.iters;
  tc.seed = a.seed;
  tc.batch_size = a.batch;
  tc.snapshot_every = a.snapshot_every;

  const Dataset ds = load_mnist_dir(a.mnist_dir);
  TrainState<float> state = make_train_state<float>(sc, tc);
  std::cerr << "training " << sc.name << " on " << ds.size() << " images, " << tc.max_iterations
            << " iterations, batch " << tc.batch_size << "\n";
  const auto report = train(state, ds, a.out, [&](const LossRecord& r) {
    if (r.iteration % 100 == 0 || r.iteration + 1 == tc.max_iterations) {
      std::fprintf(stderr, "iter %6zu  d_loss %.4f  g_loss %.4f  lr %.3g\n", r.iteration, r.d_loss, r.g_loss,
                   r.lr);
    }
  });
  std::cout << "snapshots: " << report.snapshots.size() << "\n"
            << "loss log: " << report.loss_csv_path << "\n"
            << "model: " << report.final_model_path << "\n";
  return kExitOk;
}

int cmd_generate(const GenerateArgs& a) {
  const Generator m = load_model(a.model);
  if (a.label < 0 || static_cast<std::size_t>(a.label) >= m.arch.num_classes)
    throw UsageError("--label must be in 0.." + std::to_string(m.arch.num_classes - 1));
  Rng rng(a.seed);
  const FloatTensor z = uniform<float>(rng, {a.count, m.arch.z_dim}, -1.0, 1.0);
  const FloatTensor y = one_hot<float>(std::vector<int>(a.count, a.label), m.arch.num_classes);
  const FloatTensor images = generator_forward(m, z, y, Mode::kEval);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(a.count))));
  write_grid(images, cols, a.out);
  std::cout << "wrote " << a.count << " images to " << a.out << "\n";
  return kExitOk;
}

int cmd_export(const ExportArgs& a) {
  const Generator m = load_model(a.model);
  const ExportBundle bundle = fold_and_binarize(m);
  const VerifyReport rep = verify_export(bundle, m, 16);
  if (!rep.ok()) {
    std::cerr << rep.to_string() << "export refused: verification failed\n";
    return kExitVerify;
  }
  if (!bundle.has_binary_content())
    std::cerr << "warning: scenario " << m.scenario.name << " binarizes nothing; exporting float32 arrays only\n";
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
  const fs::path dir(a.out);
  std::string written;
  if (a.format == "cheader") {
    written = (dir / "b_dcgan_params.h").string();
    write_file(written, emit_header(bundle));
  } else {
    written = (dir / "b_dcgan_params.bdcx").string();
    write_file(written, serialize_bundle(bundle));
  }
  write_file((dir / "manifest.json").string(), bundle_manifest(bundle).dump(2) + "\n");
  std::cout << "wrote " << written << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a) {
  const Generator m = load_model(a.model);
  const VerifyReport rep = verify_export(fold_and_binarize(m), m, a.probes);
  std::cout << rep.to_string();
  return rep.ok() ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binarized conditional DCGAN toolkit"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a generator/discriminator pair");
  train_cmd->add_option("--scenario", ta.scenario, "S0, S1-1, S1-2, S2-1, S2-2, S3-1, S3-2 or custom")
      ->capture_default_str();
  train_cmd->add_option("--mnist-dir", ta.mnist_dir, "Directory with train-images-idx3-ubyte[.gz]")->required();
  train_cmd->add_option("--out", ta.out, "Output directory")->required();
  train_cmd->add_option("--iters", ta.iters, "Training iterations")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--batch", ta.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--snapshot-every", ta.snapshot_every, "Snapshot interval (0: none)")->capture_default_str();
  auto* config_opt = train_cmd->add_option("--config", ta.config, "JSON scenario/training override")
                         ->check(CLI::ExistingFile);

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Render a grid of images for one label");
  gen_cmd->add_option("--model", ga.model, "Model file")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--label", ga.label, "Class label")->required()->check(CLI::Range(0, 9));
  gen_cmd->add_option("--count", ga.count, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", ga.out, "Image path (.png or .pgm)")->required();
  gen_cmd->add_option("--seed", ga.seed, "Random seed")->capture_default_str();

  ExportArgs ea;
  auto* export_cmd = app.add_subcommand("export", "Fold, pack and emit generator parameters");
  export_cmd->add_option("--model", ea.model, "Model file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--format", ea.format, "cheader or binary")
      ->capture_default_str()
      ->check(CLI::IsMember({"cheader", "binary"}));
  export_cmd->add_option("--out", ea.out, "Output directory")->required();

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Compare the exported run-time against the model");
  verify_cmd->add_option("--model", va.model, "Model file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--probes", va.probes, "Number of random probes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta, config_opt->count() > 0);
    if (*gen_cmd) return cmd_generate(ga);
    if (*export_cmd) return cmd_export(ea);
    if (*verify_cmd) return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
