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
#include <map>
#include <string>
#include <vector>

#include "cbd/noise_model.hpp"
#include "cbd/synthesis.hpp"
#include "cbd/training.hpp"

namespace cbd {

/// sigma/NNNN.bin: "CBDS", u32 height, u32 width, u32 channels (= 3), then
/// float32 little-endian SDs, row-major, channel-last.
void write_sigma_map(const std::filesystem::path& path, const NoiseLevelMap& map);
NoiseLevelMap read_sigma_map(const std::filesystem::path& path);

/// params/NNNN.txt: key = value lines for sigma_s, sigma_c, crf_kind,
/// gamma_exponent, jpeg_quality, seed.
std::string format_params(const NoiseParams& params);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Writes clean/, noisy/, sigma/ and params/ entries for pair `index`.
void write_pair(const std::filesystem::path& root, int index, const SyntheticPair& pair);

struct SynthOptions {
  int count = 0;
  bool jpeg = false;
  std::uint64_t seed = 0;
  SynthesisOptions synthesis;
  NoiseSampler sampler = NoiseSampler::training_pool();
};

/// PNG files of a folder in name order.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

/// Synthesizes `count` pairs, cycling through the clean images (cropped to
/// even dims). Pair i is driven by stream i of the seed.
void build_synthetic_dataset(const std::vector<Image>& clean_images,
                             const std::filesystem::path& out, const SynthOptions& options);

/// Loads clean/ + noisy/ pairs; sigma/ entries are required when `with_sigma`.
std::vector<TrainingPair> load_pairs(const std::filesystem::path& root, bool with_sigma);

/// Writes clean/ + noisy/ only (real-pair layout).
void write_real_pair(const std::filesystem::path& root, int index, const Image& clean,
                     const Image& noisy);

std::string pair_stem(int index);

}  // namespace cbd
