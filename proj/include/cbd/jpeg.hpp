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
#include <vector>

#include "cbd/image.hpp"

namespace cbd {

/// Baseline JPEG encode (4:2:0 chroma, standard IJG quality scaling) followed
/// by decode, all in memory. Quality must lie in [60, 100].
Image jpeg_roundtrip(const Image& rgb, int quality);

std::vector<std::uint8_t> encode_jpeg(const Image& rgb, int quality);
Image decode_jpeg(const std::vector<std::uint8_t>& bytes);

}  // namespace cbd
