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

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "cbd/image.hpp"
#include "cbd/tensor.hpp"

namespace cbd::test {

inline Tensor random_tensor(Shape dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.values()) v = u(rng);
  return t;
}

inline Image random_image(int h, int w, int c, Rng& rng) {
  Image img(h, w, c);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : img.values()) v = u(rng);
  return img;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, static_cast<double>(std::abs(a[i] - b[i])));
  return worst;
}

}  // namespace cbd::test
