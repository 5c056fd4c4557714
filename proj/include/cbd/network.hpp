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

#include <map>
#include <string>
#include <vector>

#include "cbd/image.hpp"
#include "cbd/tensor.hpp"

namespace cbd {

struct NetworkConfig {
  int est_layers = 5;
  int est_channels = 32;
  int unet_c0 = 64;
  int unet_c1 = 128;
  int unet_c2 = 256;
  int kernel = 3;
  int input_channels = 3;

  static NetworkConfig full() { return {}; }
  /// Reduced U-Net widths for CPU-scale experiments.
  static NetworkConfig compact() {
    NetworkConfig c;
    c.unet_c0 = 16;
    c.unet_c1 = 32;
    c.unet_c2 = 64;
    return c;
  }

  /// "full", "compact" or "custom".
  std::string preset_name() const;
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

/// Kind of a layer in the canonical layout.
enum class LayerKind { conv, down, up, output };

struct LayerSpec {
  std::string name;  ///< e.g. "dn.enc0a"
  LayerKind kind;
  int in_channels;
  int out_channels;
};

/// Canonical, ordered layer list: est.conv1..5 then the 16 U-Net layers.
std::vector<LayerSpec> layer_layout(const NetworkConfig& config);

/// Expected tensor dims for "<layer>.weight" / "<layer>.bias".
std::map<std::string, Shape> parameter_shapes(const NetworkConfig& config);

/// Named parameter tensors of both subnetworks.
class ModelWeights {
 public:
  ModelWeights() = default;
  explicit ModelWeights(NetworkConfig config) : config_(config) {}

  const NetworkConfig& config() const { return config_; }

  void set(const std::string& name, Tensor t);
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::map<std::string, Tensor>& tensors() { return tensors_; }

  void set_requires_grad(bool on);
  void zero_grad();
  /// Deep copy detached from any graph.
  ModelWeights clone() const;
  bool bitwise_equal(const ModelWeights& other) const;

 private:
  NetworkConfig config_;
  std::map<std::string, Tensor> tensors_;
};

/// He-normal weights (SD sqrt(2 / (k^2 Cin))), zero biases. Values are rounded
/// to float32 so they survive serialization unchanged.
ModelWeights init_model(const NetworkConfig& config, Rng& rng);

// Graph-level forwards on N x C x H x W tensors -------------------------------

/// CNN_E: five 3x3 convs, ReLU after each (so the map is non-negative).
Tensor estimate_noise(const ModelWeights& weights, const Tensor& noisy);

/// CNN_D: residual U-Net on concat(noisy, map). Inputs whose extents are not
/// multiples of 4 are mirror-padded and cropped back.
Tensor denoise_nonblind(const ModelWeights& weights, const Tensor& noisy, const Tensor& map);

// Image-level inference -------------------------------------------------------

NoiseLevelMap estimate_noise(const ModelWeights& weights, const Image& noisy);
/// Unclamped residual output y + R.
Image denoise_nonblind(const ModelWeights& weights, const Image& noisy, const NoiseLevelMap& map);

struct BlindResult {
  NoiseLevelMap sigma_hat;
  NoiseLevelMap rho_hat;  ///< gamma * sigma_hat
  Image x_hat;            ///< unclamped
};

/// Estimates sigma, scales it by gamma (> 0) and denoises with the scaled map.
BlindResult blind_denoise(const ModelWeights& weights, const Image& noisy, double gamma);

/// gamma * map elementwise, computed in double and rounded to float.
NoiseLevelMap scale_map(const NoiseLevelMap& map, double gamma);

}  // namespace cbd
