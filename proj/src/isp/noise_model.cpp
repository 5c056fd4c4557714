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

#include "cbd/noise_model.hpp"

#include <cmath>

#include "cbd/error.hpp"

namespace cbd {

namespace {

double uniform(Rng& rng, Interval r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void require_coefficients(double sigma_s, double sigma_c) {
  if (!(sigma_s >= 0.0) || !(sigma_c >= 0.0))
    throw ArgumentError("noise coefficients must be non-negative");
}

}  // namespace

NoiseSampler NoiseSampler::held_out_pool() {
  NoiseSampler s;
  s.sigma_s = {0.04, 0.12};
  s.sigma_c = {0.01, 0.04};
  s.gamma = {2.7, 3.0};
  return s;
}

NoiseParams sample_noise_params(Rng& rng, bool with_jpeg, const NoiseSampler& sampler) {
  NoiseParams p;
  p.sigma_s = uniform(rng, sampler.sigma_s);
  p.sigma_c = uniform(rng, sampler.sigma_c);

  const int pool = static_cast<int>(sampler.tabulated.size()) + (sampler.include_gamma_family ? 1 : 0);
  if (pool == 0) throw ArgumentError("CRF pool is empty");
  const int pick = std::uniform_int_distribution<int>(0, pool - 1)(rng);
  if (sampler.include_gamma_family && pick == pool - 1)
    p.crf = Crf::gamma_power(uniform(rng, sampler.gamma));
  else
    p.crf = sampler.tabulated[static_cast<std::size_t>(pick)];

  if (with_jpeg)
    p.jpeg_quality = std::uniform_int_distribution<int>(sampler.jpeg_min, sampler.jpeg_max)(rng);
  p.seed = rng();
  return p;
}

Image noise_variance_map(const Image& irradiance, double sigma_s, double sigma_c) {
  require_coefficients(sigma_s, sigma_c);
  Image var(irradiance.height(), irradiance.width(), irradiance.channels());
  const double ss = sigma_s * sigma_s, cc = sigma_c * sigma_c;
  auto src = irradiance.values();
  auto dst = var.values();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = static_cast<float>(static_cast<double>(src[i]) * ss + cc);
  return var;
}

Image add_raw_noise(const Image& irradiance, double sigma_s, double sigma_c, Rng& rng) {
  require_coefficients(sigma_s, sigma_c);
  Image out = irradiance;
  if (sigma_s == 0.0 && sigma_c == 0.0) return out;
  const double ss = sigma_s * sigma_s, cc = sigma_c * sigma_c;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (float& v : out.values()) {
    // Irradiance below zero cannot carry shot noise.
    const double var = std::max(0.0, static_cast<double>(v)) * ss + cc;
    v = static_cast<float>(v + std::sqrt(var) * normal(rng));
  }
  return out;
}

}  // namespace cbd
