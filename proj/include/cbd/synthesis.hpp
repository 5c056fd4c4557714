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

#include <string>
#include <string_view>

#include "cbd/image.hpp"
#include "cbd/noise_model.hpp"

namespace cbd {

/// How the ground-truth noise level of a synthetic image is obtained.
enum class GtMode {
  montecarlo,     ///< per-pixel SD over K independent pipeline runs
  raw_propagate,  ///< raw SD pushed through demosaic weights and the CRF slope
};

GtMode parse_gt_mode(std::string_view name);
std::string_view to_string(GtMode mode);

struct SyntheticPair {
  Image clean;
  Image noisy;
  NoiseLevelMap sigma_map;
  NoiseParams params;
};

struct SynthesisOptions {
  GtMode gt_mode = GtMode::montecarlo;
  int mc_draws = 16;
};

/// Irradiance mosaic L = M(f^-1(x)).
Image irradiance_mosaic(const Image& x, const Crf& crf);

/// One pass of the camera pipeline on raw samples: f(DM(raw)), then JPEG if
/// the params carry a quality factor.
Image render_raw(const Image& raw, const NoiseParams& params);

/// Builds (clean, noisy, sigma) for a clean sRGB image. The clean reference is
/// the zero-noise pipeline output so the pair differs only by noise.
SyntheticPair synthesize_pair(const Image& x, const NoiseParams& params, Rng& rng,
                              const SynthesisOptions& options = {});

/// Noise SD of the pipeline output. Monte-Carlo mode needs draws >= 8 and
/// includes JPEG; raw-propagate ignores JPEG.
NoiseLevelMap ground_truth_sigma_map(const Image& x, const NoiseParams& params, GtMode mode,
                                     int draws, Rng& rng);

/// Noise model families compared in the ablation harness.
enum class NoiseModel {
  gaussian,           ///< "G": AWGN in sRGB, sigma ~ U[0, 0.06]
  hetero,             ///< "HG": L*sigma_s^2 + sigma_c^2 noise directly on sRGB
  gaussian_isp,       ///< "G+ISP": stationary raw noise through the camera pipeline
  hetero_isp,         ///< "HG+ISP": full pipeline
  hetero_isp_jpeg,    ///< "HG+ISP+JPEG"
};

NoiseModel parse_noise_model(std::string_view label);
std::string_view to_string(NoiseModel model);

/// Draws parameters for `model` and synthesizes one pair.
SyntheticPair synthesize_with_model(const Image& x, NoiseModel model, Rng& rng,
                                    const SynthesisOptions& options = {},
                                    const NoiseSampler& sampler = NoiseSampler::training_pool());

}  // namespace cbd
