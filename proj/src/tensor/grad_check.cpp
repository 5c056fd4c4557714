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

#include "cbd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbd/error.hpp"

namespace cbd {

double grad_check(const std::function<Tensor(const Tensor&)>& forward, const Tensor& x,
                  double eps) {
  if (!(eps > 0.0)) throw ArgumentError("grad_check eps must be positive");
  PrecisionScope wide(Precision::wide);

  std::vector<double> analytic;
  {
    Graph graph;
    Tensor probe = x.detach();
    probe.set_requires_grad();
    const Tensor loss = forward(probe);
    if (loss.size() != 1) throw ArgumentError("grad_check forward must return a scalar");
    graph.backward(loss);
    auto g = probe.grad();
    analytic.assign(g.begin(), g.end());
  }

  const auto evaluate = [&](const Tensor& at) {
    const Tensor out = forward(at);
    if (out.size() != 1) throw ArgumentError("grad_check forward must return a scalar");
    return out.item();
  };

  double worst = 0.0;
  Tensor shifted = x.detach();
  auto values = shifted.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = evaluate(shifted);
    values[i] = saved - eps;
    const double down = evaluate(shifted);
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace cbd
