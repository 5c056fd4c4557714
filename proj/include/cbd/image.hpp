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
#include <random>
#include <span>
#include <vector>

#include "cbd/tensor.hpp"

namespace cbd {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for (seed, index) pairs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Row-major, channel-interleaved intensity image. Values are nominally in
/// [0,1]; raw-domain intermediates may leave that range.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_dims(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  float& at(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool operator==(const Image& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel, per-color noise standard deviation (always 3 channels).
class NoiseLevelMap {
 public:
  NoiseLevelMap() = default;
  NoiseLevelMap(int height, int width, float fill = 0.0f) : sd_(height, width, 3, fill) {}
  explicit NoiseLevelMap(Image sd);

  int height() const { return sd_.height(); }
  int width() const { return sd_.width(); }
  float& at(int y, int x, int c) { return sd_.at(y, x, c); }
  float at(int y, int x, int c) const { return sd_.at(y, x, c); }
  std::span<float> values() { return sd_.values(); }
  std::span<const float> values() const { return sd_.values(); }
  const Image& image() const { return sd_; }

  bool operator==(const NoiseLevelMap& other) const = default;

 private:
  Image sd_;
};

Image clamp01(Image img);

/// Row crop [y0, y0+h) x [x0, x0+w).
Image crop(const Image& img, int y0, int x0, int h, int w);
Image flip_horizontal(const Image& img);

/// 1 x C x H x W tensor of the image.
Tensor to_tensor(const Image& img);
/// N x C x H x W tensor stacking same-sized images.
Tensor to_tensor(std::span<const Image> batch);
/// Item `index` of an N x C x H x W tensor as an image.
Image image_from_tensor(const Tensor& t, int index = 0);

}  // namespace cbd
