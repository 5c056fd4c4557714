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
#include <string>
#include <vector>

#include "cbd/metrics.hpp"
#include "cbd/synthesis.hpp"
#include "cbd/training.hpp"

namespace cbd {

/// Shared training and evaluation budget; every variant gets exactly this.
struct AblationBudget {
  int train_images = 200;
  int test_images = 20;
  int image_size = 64;  ///< side of the procedural clean scenes
  std::uint64_t seed = 2019;
  SynthesisOptions synthesis;
  TrainConfig train = TrainConfig::desk();
  /// Clean images to draw from; procedural scenes when empty. The first
  /// train_images are used for training, the next test_images for testing.
  std::vector<Image> clean_pool;

  /// Stable text form; its hash is stamped on every report.
  std::string to_text() const;
  std::string hash() const;

  static AblationBudget desk();
  /// key = value lines; train_* keys go to the training config.
  static AblationBudget parse(const std::string& text);
};

/// Trains one model per variant with identical seeds and budget, then scores
/// each model on every test noise model. One report per (variant, test set),
/// ordered variant-major.
std::vector<EvalReport> run_ablation(const std::vector<NoiseModel>& variants,
                                     const std::vector<NoiseModel>& test_models,
                                     const AblationBudget& budget);

/// Synthesized pairs for `model` over the given clean images; stream i of
/// `seed` drives image i.
std::vector<SyntheticPair> synthesize_set(const std::vector<Image>& clean, NoiseModel model,
                                          std::uint64_t seed, const SynthesisOptions& options);

/// FNV-1a 64-bit as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace cbd
