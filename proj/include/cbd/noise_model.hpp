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
#include <optional>
#include <vector>

#include "cbd/crf.hpp"
#include "cbd/image.hpp"

namespace cbd {

enum class BayerPhase { rggb };

/// One draw of the synthesis configuration.
struct NoiseParams {
  double sigma_s = 0.0;  ///< signal-dependent coefficient, variance L * sigma_s^2
  double sigma_c = 0.0;  ///< stationary SD
  Crf crf = Crf::gamma_power(1.0);
  std::optional<int> jpeg_quality;
  BayerPhase bayer_phase = BayerPhase::rggb;
  std::uint64_t seed = 0;  ///< seeds the per-image noise stream
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Ranges parameters are drawn from. The defaults are the training pool;
/// a disjoint configuration serves as the held-out "real" generator.
struct NoiseSampler {
  Interval sigma_s{0.0, 0.16};
  Interval sigma_c{0.0, 0.06};
  /// Gamma-power family exponents; one pool entry.
  Interval gamma{1.8, 2.6};
  bool include_gamma_family = true;
  /// Measured curves; each is one more pool entry.
  std::vector<Crf> tabulated;
  int jpeg_min = 60;
  int jpeg_max = 100;

  static NoiseSampler training_pool() { return {}; }
  /// Disjoint ranges and CRF exponents standing in for real-camera pairs.
  static NoiseSampler held_out_pool();
};

NoiseParams sample_noise_params(Rng& rng, bool with_jpeg,
                                const NoiseSampler& sampler = NoiseSampler::training_pool());

/// L * sigma_s^2 + sigma_c^2 per sample.
Image noise_variance_map(const Image& irradiance, double sigma_s, double sigma_c);

/// L + n with n ~ N(0, L * sigma_s^2 + sigma_c^2), left unclamped.
Image add_raw_noise(const Image& irradiance, double sigma_s, double sigma_c, Rng& rng);

}  // namespace cbd
