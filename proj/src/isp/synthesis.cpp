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

#include "cbd/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "cbd/bayer.hpp"
#include "cbd/error.hpp"
#include "cbd/jpeg.hpp"

namespace cbd {

namespace {

// A [0,1]-bounded variable cannot have SD above 0.5.
constexpr double kMaxSd = 0.5;

void require_pipeline_input(const Image& x) {
  if (x.channels() != 3) throw ShapeError("synthesis expects an RGB image");
  if (x.height() % 2 || x.width() % 2) throw ArgumentError("synthesis needs even image dims");
}

NoiseLevelMap montecarlo_sigma(const Image& L, const NoiseParams& params, int draws, Rng& rng) {
  const int h = L.height(), w = L.width();
  std::vector<double> mean(static_cast<std::size_t>(h) * w * 3, 0.0);
  std::vector<double> m2(mean.size(), 0.0);
  for (int k = 0; k < draws; ++k) {
    const Image out = render_raw(add_raw_noise(L, params.sigma_s, params.sigma_c, rng), params);
    auto v = out.values();
    // Welford update keeps the spread accurate for tiny SDs.
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double delta = v[i] - mean[i];
      mean[i] += delta / (k + 1);
      m2[i] += delta * (v[i] - mean[i]);
    }
  }
  NoiseLevelMap map(h, w);
  auto dst = map.values();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = static_cast<float>(std::sqrt(std::max(0.0, m2[i] / (draws - 1))));
  return map;
}

NoiseLevelMap propagated_sigma(const Image& L, const NoiseParams& params) {
  const Image raw_var = noise_variance_map(L, params.sigma_s, params.sigma_c);
  const Image rgb_var = demosaic_variance(raw_var);
  const Image rgb_lin = demosaic_malvar(L);
  NoiseLevelMap map(L.height(), L.width());
  auto var = rgb_var.values();
  auto lin = rgb_lin.values();
  auto dst = map.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double sd = std::sqrt(std::max(0.0f, var[i])) * params.crf.slope(lin[i]);
    dst[i] = static_cast<float>(std::min(sd, kMaxSd));
  }
  return map;
}

}  // namespace

GtMode parse_gt_mode(std::string_view name) {
  if (name == "montecarlo") return GtMode::montecarlo;
  if (name == "raw_propagate") return GtMode::raw_propagate;
  throw ArgumentError("unknown ground-truth mode '" + std::string(name) + "'");
}

std::string_view to_string(GtMode mode) {
  return mode == GtMode::montecarlo ? "montecarlo" : "raw_propagate";
}

Image irradiance_mosaic(const Image& x, const Crf& crf) {
  require_pipeline_input(x);
  return mosaic_bayer(apply_crf(x, crf, CrfDirection::inverse));
}

Image render_raw(const Image& raw, const NoiseParams& params) {
  Image y = apply_crf(demosaic_malvar(raw), params.crf, CrfDirection::forward);
  if (params.jpeg_quality) y = jpeg_roundtrip(y, *params.jpeg_quality);
  return y;
}

SyntheticPair synthesize_pair(const Image& x, const NoiseParams& params, Rng& rng,
                              const SynthesisOptions& options) {
  const Image L = irradiance_mosaic(x, params.crf);
  SyntheticPair pair;
  pair.params = params;
  pair.noisy = render_raw(add_raw_noise(L, params.sigma_s, params.sigma_c, rng), params);
  pair.clean = apply_crf(demosaic_malvar(L), params.crf, CrfDirection::forward);
  if (options.gt_mode == GtMode::montecarlo) {
    if (options.mc_draws < 8) throw ArgumentError("Monte-Carlo ground truth needs >= 8 draws");
    pair.sigma_map = montecarlo_sigma(L, params, options.mc_draws, rng);
  } else {
    pair.sigma_map = propagated_sigma(L, params);
  }
  return pair;
}

NoiseLevelMap ground_truth_sigma_map(const Image& x, const NoiseParams& params, GtMode mode,
                                     int draws, Rng& rng) {
  const Image L = irradiance_mosaic(x, params.crf);
  if (mode == GtMode::raw_propagate) return propagated_sigma(L, params);
  if (draws < 8) throw ArgumentError("Monte-Carlo ground truth needs >= 8 draws");
  return montecarlo_sigma(L, params, draws, rng);
}

NoiseModel parse_noise_model(std::string_view label) {
  if (label == "G") return NoiseModel::gaussian;
  if (label == "HG") return NoiseModel::hetero;
  if (label == "G+ISP") return NoiseModel::gaussian_isp;
  if (label == "HG+ISP") return NoiseModel::hetero_isp;
  if (label == "HG+ISP+JPEG" || label == "JPEG") return NoiseModel::hetero_isp_jpeg;
  throw ArgumentError("unknown noise model variant '" + std::string(label) + "'");
}

std::string_view to_string(NoiseModel model) {
  switch (model) {
    case NoiseModel::gaussian: return "G";
    case NoiseModel::hetero: return "HG";
    case NoiseModel::gaussian_isp: return "G+ISP";
    case NoiseModel::hetero_isp: return "HG+ISP";
    case NoiseModel::hetero_isp_jpeg: return "HG+ISP+JPEG";
  }
  return "?";
}

SyntheticPair synthesize_with_model(const Image& x, NoiseModel model, Rng& rng,
                                    const SynthesisOptions& options, const NoiseSampler& sampler) {
  require_pipeline_input(x);
  if (model == NoiseModel::gaussian || model == NoiseModel::hetero) {
    // sRGB-domain noise: no CRF, no mosaic.
    NoiseParams p;
    if (model == NoiseModel::gaussian) {
      p.sigma_c = std::uniform_real_distribution<double>(sampler.sigma_c.lo, sampler.sigma_c.hi)(rng);
    } else {
      p.sigma_s = std::uniform_real_distribution<double>(sampler.sigma_s.lo, sampler.sigma_s.hi)(rng);
      p.sigma_c = std::uniform_real_distribution<double>(sampler.sigma_c.lo, sampler.sigma_c.hi)(rng);
    }
    p.seed = rng();
    SyntheticPair pair;
    pair.params = p;
    pair.clean = x;
    pair.noisy = clamp01(add_raw_noise(x, p.sigma_s, p.sigma_c, rng));
    const Image var = noise_variance_map(x, p.sigma_s, p.sigma_c);
    Image sd(x.height(), x.width(), 3);
    std::transform(var.values().begin(), var.values().end(), sd.values().begin(),
                   [](float v) { return std::sqrt(v); });
    pair.sigma_map = NoiseLevelMap(std::move(sd));
    return pair;
  }
  NoiseParams p = sample_noise_params(rng, model == NoiseModel::hetero_isp_jpeg, sampler);
  if (model == NoiseModel::gaussian_isp) p.sigma_s = 0.0;
  return synthesize_pair(x, p, rng, options);
}

}  // namespace cbd
