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

#include "cbd/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace cbd {

namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Bias toward a spread of brightness levels, dark tones included.
  const double level = std::pow(u(rng), 1.3);
  Color c;
  for (double& v : c) v = std::clamp(level * (0.6 + 0.8 * u(rng)), 0.0, 1.0);
  return c;
}

}  // namespace

Image generate_scene(Rng& rng, int height, int width) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(height, width, 3);

  const Color a = random_color(rng), b = random_color(rng);
  const double angle = u(rng) * 2.0 * std::numbers::pi;
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double norm = std::abs(dx) * width + std::abs(dy) * height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double t = (dx * x + dy * y) / norm;
      t = t - std::floor(t);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(a[c] + (b[c] - a[c]) * t);
    }

  const int shapes = 3 + static_cast<int>(u(rng) * 6);
  for (int s = 0; s < shapes; ++s) {
    const Color col = random_color(rng);
    const double cy = u(rng) * height, cx = u(rng) * width;
    const double ry = (0.08 + 0.3 * u(rng)) * height, rx = (0.08 + 0.3 * u(rng)) * width;
    const int kind = static_cast<int>(u(rng) * 3);
    const double freq = 0.15 + 0.6 * u(rng), phase = u(rng) * 6.28, theta = u(rng) * 3.14;
    const double contrast = 0.15 + 0.35 * u(rng);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double ny = (y - cy) / ry, nx = (x - cx) / rx;
        const bool inside = kind == 0 ? (std::abs(ny) < 1.0 && std::abs(nx) < 1.0)
                                      : (ny * ny + nx * nx < 1.0);
        if (!inside) continue;
        double mod = 1.0;
        if (kind == 2)
          mod = 1.0 + contrast * std::sin(freq * (x * std::cos(theta) + y * std::sin(theta)) + phase);
        for (int c = 0; c < 3; ++c)
          img.at(y, x, c) = static_cast<float>(std::clamp(col[c] * mod, 0.0, 1.0));
      }
  }

  // Soft vignette-like shading across the frame.
  const double sy = u(rng) * height, sx = u(rng) * width, strength = 0.3 * u(rng);
  const double diag2 = static_cast<double>(height) * height + static_cast<double>(width) * width;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double d2 = ((y - sy) * (y - sy) + (x - sx) * (x - sx)) / diag2;
      const double gain = 1.0 - strength * d2;
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<float>(std::clamp(img.at(y, x, c) * gain, 0.0, 1.0));
    }
  return img;
}

}  // namespace cbd
