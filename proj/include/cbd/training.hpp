// Copyright 2026 The CBDNet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbd/adam.hpp"
#include "cbd/image.hpp"
#include "cbd/losses.hpp"
#include "cbd/network.hpp"

namespace cbd {

struct TrainConfig {
  int batch_size = 32;
  int patch_size = 128;
  int epochs = 40;
  /// Learning rate for the first ceil(epochs/2) epochs, then lr_late.
  double lr = 1e-3;
  double lr_late = 5e-4;
  /// Linear ramp of the learning rate over the first steps; 0 disables it.
  int warmup_steps = 0;
  AdamHyper adam;
  LossWeights loss;
  std::uint64_t seed = 0;
  bool mix_real = false;
  NetworkConfig network = NetworkConfig::full();
  /// 0 derives ceil(#synthetic / batch_size) batches per epoch.
  int batches_per_epoch = 0;
  /// Synthetic pairs held out for the per-epoch validation PSNR.
  int val_count = 0;
  /// Train CNN_E alone on lambda_asymm * L_asymm + lambda_tv * L_TV.
  bool estimator_only = false;
  bool augment = true;
  Precision precision = Precision::fast;

  /// Batch 32, 128 px patches, 40 epochs, full widths.
  static TrainConfig full();
  /// Batch 8, 48 px patches, 10 epochs, compact widths.
  static TrainConfig desk();

  /// key = value lines, '#' comments; unknown keys are rejected.
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::filesystem::path& path);
  std::string to_text() const;
  void validate() const;
};

double learning_rate_for_epoch(const TrainConfig& config, int epoch);
/// Epoch rate scaled by (step + 1) / warmup_steps while step < warmup_steps.
double learning_rate_for_step(const TrainConfig& config, int epoch, std::int64_t step);

/// Strict S,R,S,R,... alternation when mixing, otherwise all synthetic.
std::vector<BatchKind> make_schedule(int n_batches, bool mix_real);

struct TrainingPair {
  Image clean;
  Image noisy;
  std::optional<NoiseLevelMap> sigma;  ///< present for synthetic pairs
};

struct TrainingData {
  std::vector<TrainingPair> synthetic;
  std::vector<TrainingPair> real;
  std::vector<TrainingPair> validation;
};

struct EpochMetrics {
  int epoch = 0;
  double total = 0.0;
  double rec = 0.0;
  double asymm = 0.0;
  double tv = 0.0;
  double val_psnr = 0.0;  ///< NaN when there is nothing to validate
};

/// Tab-separated: epoch, mean_total_loss, mean_rec, mean_asymm, mean_tv, val_psnr.
std::string format_metrics_line(const EpochMetrics& m);

struct TrainResult {
  ModelWeights weights;
  std::vector<EpochMetrics> epochs;
  std::vector<BatchKind> batch_kinds;
  std::vector<double> step_losses;
};

using EpochCallback = std::function<void(const EpochMetrics&, const ModelWeights&)>;

/// Mini-batch Adam over random (optionally flipped) patches. Synthetic batches
/// minimize the full objective, real batches rec + lambda_tv * TV. Throws
/// TrainingError on a non-finite loss.
TrainResult train(const TrainingData& data, const TrainConfig& config,
                  std::optional<ModelWeights> initial = std::nullopt,
                  const EpochCallback& on_epoch = {});

/// Splits the last `val_count` synthetic pairs off as validation data.
TrainingData split_validation(TrainingData data, int val_count);

}  // namespace cbd
