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

#include <functional>

#include "cbd/tensor.hpp"

namespace cbd {

/// Largest elementwise relative disagreement between the reverse-mode gradient
/// of `forward` at `x` and a central finite difference with step `eps`:
///   max_i |analytic_i - numeric_i| / max(|analytic_i|, |numeric_i|, 1e-8).
///
/// Runs in wide precision regardless of the global mode. `x` is not modified.
double grad_check(const std::function<Tensor(const Tensor&)>& forward, const Tensor& x,
                  double eps = 1e-5);

}  // namespace cbd
