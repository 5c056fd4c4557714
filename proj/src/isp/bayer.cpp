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

#include "cbd/bayer.hpp"

#include <algorithm>

#include "cbd/error.hpp"

namespace cbd {

namespace {

int mirror(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

void require_demosaic_input(const Image& bayer) {
  if (bayer.channels() != 1) throw ShapeError("demosaic expects a single-channel Bayer plane");
  if (bayer.height() < 6 || bayer.width() < 6 || bayer.height() % 2 || bayer.width() % 2)
    throw ArgumentError("demosaic needs even dims of at least 6x6");
}

// Malvar filters written as bilinear average + scaled Laplacian correction,
// each term a difference against the centre sample. The grouping keeps flat
// inputs exact: every difference is zero and the averages are power-of-two
// sums of equal values.
struct Neighborhood {
  const Image& img;
  int y, x;
  double at(int dy, int dx) const {
    return img.at(mirror(y + dy, img.height()), mirror(x + dx, img.width()));
  }
};

double cross_avg(const Neighborhood& p) {
  return ((p.at(-1, 0) + p.at(1, 0)) + (p.at(0, -1) + p.at(0, 1))) * 0.25;
}

double diag_avg(const Neighborhood& p) {
  return ((p.at(-1, -1) + p.at(1, 1)) + (p.at(-1, 1) + p.at(1, -1))) * 0.25;
}

double ring2_delta(const Neighborhood& p) {
  const double c = p.at(0, 0);
  return ((c - p.at(-2, 0)) + (c - p.at(2, 0))) + ((c - p.at(0, -2)) + (c - p.at(0, 2)));
}

// Channel at a green site whose same-color neighbours lie horizontally.
double green_site_horizontal(const Neighborhood& p) {
  const double c = p.at(0, 0);
  const double diag = ((c - p.at(-1, -1)) + (c - p.at(1, 1))) + ((c - p.at(-1, 1)) + (c - p.at(1, -1)));
  const double along = (c - p.at(0, -2)) + (c - p.at(0, 2));
  const double across = (c - p.at(-2, 0)) + (c - p.at(2, 0));
  return (p.at(0, -1) + p.at(0, 1)) * 0.5 + (diag + along - 0.5 * across) * 0.125;
}

double green_site_vertical(const Neighborhood& p) {
  const double c = p.at(0, 0);
  const double diag = ((c - p.at(-1, -1)) + (c - p.at(1, 1))) + ((c - p.at(-1, 1)) + (c - p.at(1, -1)));
  const double along = (c - p.at(-2, 0)) + (c - p.at(2, 0));
  const double across = (c - p.at(0, -2)) + (c - p.at(0, 2));
  return (p.at(-1, 0) + p.at(1, 0)) * 0.5 + (diag + along - 0.5 * across) * 0.125;
}

}  // namespace

Image mosaic_bayer(const Image& rgb) {
  if (rgb.channels() != 3) throw ShapeError("mosaic_bayer expects an RGB image");
  if (rgb.height() % 2 || rgb.width() % 2) throw ArgumentError("mosaic_bayer needs even dims");
  Image out(rgb.height(), rgb.width(), 1);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) out.at(y, x) = rgb.at(y, x, bayer_color(y, x));
  return out;
}

Image demosaic_malvar_linear(const Image& bayer) {
  require_demosaic_input(bayer);
  Image out(bayer.height(), bayer.width(), 3);
  for (int y = 0; y < bayer.height(); ++y) {
    for (int x = 0; x < bayer.width(); ++x) {
      const Neighborhood p{bayer, y, x};
      const double c = p.at(0, 0);
      double r, g, b;
      if (y % 2 == 0 && x % 2 == 0) {  // R site
        r = c;
        g = cross_avg(p) + ring2_delta(p) * 0.125;
        b = diag_avg(p) + ring2_delta(p) * 0.1875;
      } else if (y % 2 == 1 && x % 2 == 1) {  // B site
        b = c;
        g = cross_avg(p) + ring2_delta(p) * 0.125;
        r = diag_avg(p) + ring2_delta(p) * 0.1875;
      } else if (y % 2 == 0) {  // G site in an R row
        g = c;
        r = green_site_horizontal(p);
        b = green_site_vertical(p);
      } else {  // G site in a B row
        g = c;
        r = green_site_vertical(p);
        b = green_site_horizontal(p);
      }
      out.at(y, x, 0) = static_cast<float>(r);
      out.at(y, x, 1) = static_cast<float>(g);
      out.at(y, x, 2) = static_cast<float>(b);
    }
  }
  return out;
}

Image demosaic_malvar(const Image& bayer) { return clamp01(demosaic_malvar_linear(bayer)); }

DemosaicKernel malvar_kernel(int y_parity, int x_parity, int channel) {
  DemosaicKernel k{};
  const int site = bayer_color(y_parity & 1, x_parity & 1);
  if (channel == site) {
    k[2][2] = 1.0;
    return k;
  }
  auto set = [&k](int dy, int dx, double v) { k[dy + 2][dx + 2] = v / 8.0; };
  if (site != 1 && channel == 1) {  // G at R or B
    set(0, 0, 4);
    for (auto [dy, dx] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) set(dy, dx, 2);
    for (auto [dy, dx] : {std::pair{-2, 0}, {2, 0}, {0, -2}, {0, 2}}) set(dy, dx, -1);
    return k;
  }
  if (site != 1) {  // R at B or B at R
    set(0, 0, 6);
    for (auto [dy, dx] : {std::pair{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}) set(dy, dx, 2);
    for (auto [dy, dx] : {std::pair{-2, 0}, {2, 0}, {0, -2}, {0, 2}}) set(dy, dx, -1.5);
    return k;
  }
  // Green site: is the wanted color on the horizontal neighbours?
  const bool r_row = (y_parity & 1) == 0;
  const bool horizontal = (channel == 0) == r_row;
  set(0, 0, 5);
  for (auto [dy, dx] : {std::pair{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}) set(dy, dx, -1);
  if (horizontal) {
    set(0, -1, 4), set(0, 1, 4);
    set(0, -2, -1), set(0, 2, -1);
    set(-2, 0, 0.5), set(2, 0, 0.5);
  } else {
    set(-1, 0, 4), set(1, 0, 4);
    set(-2, 0, -1), set(2, 0, -1);
    set(0, -2, 0.5), set(0, 2, 0.5);
  }
  return k;
}

Image demosaic_variance(const Image& raw_variance) {
  require_demosaic_input(raw_variance);
  const int h = raw_variance.height(), w = raw_variance.width();
  Image out(h, w, 3);
  for (int py = 0; py < 2; ++py)
    for (int px = 0; px < 2; ++px)
      for (int c = 0; c < 3; ++c) {
        const DemosaicKernel k = malvar_kernel(py, px, c);
        for (int y = py; y < h; y += 2)
          for (int x = px; x < w; x += 2) {
            // Mirrored taps can land on the same raw sample; sum weights first.
            double acc = 0.0;
            std::array<std::array<double, 5>, 5> merged{};
            for (int dy = -2; dy <= 2; ++dy)
              for (int dx = -2; dx <= 2; ++dx) {
                if (k[dy + 2][dx + 2] == 0.0) continue;
                const int sy = mirror(y + dy, h) - y + 2, sx = mirror(x + dx, w) - x + 2;
                merged[sy][sx] += k[dy + 2][dx + 2];
              }
            for (int dy = 0; dy < 5; ++dy)
              for (int dx = 0; dx < 5; ++dx)
                if (merged[dy][dx] != 0.0)
                  acc += merged[dy][dx] * merged[dy][dx] *
                         raw_variance.at(y + dy - 2, x + dx - 2);
            out.at(y, x, c) = static_cast<float>(acc);
          }
      }
  return out;
}

}  // namespace cbd
