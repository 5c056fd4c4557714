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

#include <optional>

#include "cbd/tensor.hpp"

namespace cbd {

struct LossWeights {
  double alpha = 0.3;
  double lambda_asymm = 0.5;
  double lambda_tv = 0.05;

  void validate() const;
};

/// mean(|alpha - 1[sigma_hat < sigma]| * (sigma_hat - sigma)^2). The branch
/// weight is held constant in backward; `sigma` receives no gradient.
Tensor asymmetric_loss(const Tensor& sigma_hat, const Tensor& sigma, double alpha);

/// mean of squared forward horizontal differences plus mean of squared forward
/// vertical differences over N x C x H x W, no wrap-around. A direction with
/// no valid pair contributes 0; a 1x1 map yields 0 and a warning on stderr.
Tensor tv_loss(const Tensor& sigma_hat);

/// Mean squared error.
Tensor rec_loss(const Tensor& x_hat, const Tensor& x);

enum class BatchKind { synthetic, real };

struct LossTerms {
  Tensor total;
  double rec = 0.0;
  double asymm = 0.0;  ///< 0 for real batches
  double tv = 0.0;
};

/// synthetic: rec + lambda_asymm * asymm + lambda_tv * tv
/// real:      rec + lambda_tv * tv (sigma ignored)
LossTerms total_loss(const Tensor& x_hat, const Tensor& x, const Tensor& sigma_hat,
                     const std::optional<Tensor>& sigma, const LossWeights& w, BatchKind mode);

}  // namespace cbd
