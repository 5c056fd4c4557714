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

#include "cbd/image.hpp"

#include <algorithm>

#include "cbd/error.hpp"

namespace cbd {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || (channels != 1 && channels != 3))
    throw ShapeError("image must have non-negative extents and 1 or 3 channels");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

NoiseLevelMap::NoiseLevelMap(Image sd) : sd_(std::move(sd)) {
  if (sd_.channels() != 3) throw ShapeError("noise level map must have 3 channels");
}

Image clamp01(Image img) {
  for (float& v : img.values()) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

Image crop(const Image& img, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > img.height() || x0 + w > img.width())
    throw ArgumentError("crop window outside the image");
  Image out(h, w, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

Image flip_horizontal(const Image& img) {
  Image out(img.height(), img.width(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(y, x, c) = img.at(y, img.width() - 1 - x, c);
  return out;
}

Tensor to_tensor(const Image& img) { return to_tensor(std::span<const Image>(&img, 1)); }

Tensor to_tensor(std::span<const Image> batch) {
  if (batch.empty()) throw ShapeError("empty image batch");
  const Image& first = batch.front();
  const int n = static_cast<int>(batch.size());
  const int c = first.channels(), h = first.height(), w = first.width();
  Tensor t({n, c, h, w});
  auto dst = t.values();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < n; ++i) {
    const Image& img = batch[i];
    if (!img.same_dims(first)) throw ShapeError("images in a batch must share dims");
    auto src = img.values();
    for (std::size_t p = 0; p < plane; ++p)
      for (int ch = 0; ch < c; ++ch)
        dst[(static_cast<std::size_t>(i) * c + ch) * plane + p] = src[p * c + ch];
  }
  return t;
}

Image image_from_tensor(const Tensor& t, int index) {
  if (t.rank() != 4 || index < 0 || index >= t.dim(0))
    throw ShapeError("image_from_tensor needs an N x C x H x W tensor and a valid index");
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  Image img(h, w, c);
  auto src = t.values();
  auto dst = img.values();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < plane; ++p)
    for (int ch = 0; ch < c; ++ch)
      dst[p * c + ch] =
          static_cast<float>(src[(static_cast<std::size_t>(index) * c + ch) * plane + p]);
  return img;
}

}  // namespace cbd
