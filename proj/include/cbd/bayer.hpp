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

#include <array>

#include "cbd/image.hpp"

namespace cbd {

/// Color filter at raw site (y, x) for the fixed RGGB phase: 0 = R, 1 = G, 2 = B.
inline int bayer_color(int y, int x) { return (y & 1) + (x & 1); }

/// Samples an RGB image through an RGGB color filter array. Even dims only.
Image mosaic_bayer(const Image& rgb);

/// Malvar-He-Cutler gradient-corrected linear demosaicing with 2-pixel
/// mirror padding at the borders. Output clamped to [0,1].
Image demosaic_malvar(const Image& bayer);

/// Same filters without the final clamp; raw-domain values pass through.
Image demosaic_malvar_linear(const Image& bayer);

/// 5x5 filter (already divided by 8) that produces `channel` at a raw site of
/// the given position parity. Centre tap at [2][2].
using DemosaicKernel = std::array<std::array<double, 5>, 5>;
DemosaicKernel malvar_kernel(int y_parity, int x_parity, int channel);

/// Per-channel variance after demosaicing independent raw samples with the
/// given per-site variance: sum_i w_i^2 var_i.
Image demosaic_variance(const Image& raw_variance);

}  // namespace cbd
