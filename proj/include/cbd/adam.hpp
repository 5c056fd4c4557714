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
#include <map>
#include <string>
#include <vector>

#include "cbd/network.hpp"

namespace cbd {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter first/second moment estimates and the shared step count.
struct AdamState {
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of every parameter flagged requires_grad,
/// using the gradients accumulated on those tensors. Throws StateError if any
/// of them has no gradient. In fast precision the updated values are rounded
/// to float32.
void adam_step(ModelWeights& weights, AdamState& state, double lr, const AdamHyper& hyper = {});

}  // namespace cbd
