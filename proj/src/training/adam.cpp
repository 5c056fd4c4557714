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

#include "cbd/adam.hpp"

#include <cmath>

#include "cbd/error.hpp"

namespace cbd {

void adam_step(ModelWeights& weights, AdamState& state, double lr, const AdamHyper& hyper) {
  for (auto& [name, param] : weights.tensors())
    if (param.requires_grad() && !param.has_grad())
      throw StateError("parameter " + name + " has no gradient");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  const bool round_to_float = precision() == Precision::fast;

  for (auto& [name, param] : weights.tensors()) {
    if (!param.requires_grad()) continue;
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.empty()) {
      m.assign(param.size(), 0.0);
      v.assign(param.size(), 0.0);
    }
    auto g = param.grad();
    auto p = param.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      double updated = p[i] - lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
      if (round_to_float) updated = static_cast<float>(updated);
      p[i] = updated;
    }
  }
}

}  // namespace cbd
