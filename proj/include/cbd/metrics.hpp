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

#include <filesystem>
#include <string>
#include <vector>

#include "cbd/image.hpp"
#include "cbd/network.hpp"

namespace cbd {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = 100.0;

/// 10 log10(1 / MSE), peak 1.0.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over valid windows and channels.
double ssim(const Image& a, const Image& b);

/// Anisotropic total variation sum |dx| + |dy| over all channels, divided by
/// the pixel count.
double total_variation(const Image& img);

struct ImageScore {
  std::string name;
  double psnr_noisy = 0.0;
  double ssim_noisy = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::string label;       ///< training configuration, e.g. "HG+ISP"
  std::string test_label;  ///< test set the scores were taken on
  std::string config_hash;
  std::vector<ImageScore> images;
  double mean_psnr_noisy = 0.0;
  double mean_ssim_noisy = 0.0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;

  void finalize();  ///< recomputes the means from `images`
};

struct EvalPair {
  std::string name;
  Image clean;
  Image noisy;
};

/// Blind-denoises each noisy image (gamma = 1) and scores the clamped output
/// against its clean reference.
EvalReport evaluate_model(const ModelWeights& weights, const std::vector<EvalPair>& pairs,
                          std::string label = {}, std::string test_label = {});

/// Tab-separated with a header row; one row per image.
void write_report(const EvalReport& report, const std::filesystem::path& path);
/// One row per report: label, test set, means, config hash.
void write_summary(const std::vector<EvalReport>& reports, const std::filesystem::path& path);

}  // namespace cbd
