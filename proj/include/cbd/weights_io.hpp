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
#include <vector>

#include "cbd/network.hpp"

namespace cbd {

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

/// "CBDW", u32 version, u32 count, per tensor (u16 name length, UTF-8 name,
/// u8 rank, u32 dims, float32 payload), then the CRC-32 of everything before
/// it. All integers and floats little-endian.
std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights);

/// Verifies the checksum (CorruptionError), infers the network widths from
/// the tensors and checks every name and shape against the canonical layout
/// (IncompatibilityError naming the offenders).
ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace cbd
