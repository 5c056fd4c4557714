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

#include "cbd/network.hpp"

#include <cmath>
#include <cstring>

#include "cbd/error.hpp"
#include "cbd/ops.hpp"

namespace cbd {

std::string NetworkConfig::preset_name() const {
  if (*this == full()) return "full";
  if (*this == compact()) return "compact";
  return "custom";
}

void NetworkConfig::validate() const {
  if (est_layers < 2 || est_channels <= 0 || input_channels != 3 || kernel != 3)
    throw ArgumentError("unsupported network configuration");
  if (!(0 < unet_c0 && unet_c0 < unet_c1 && unet_c1 < unet_c2))
    throw ArgumentError("U-Net widths must satisfy 0 < c0 < c1 < c2");
}

std::vector<LayerSpec> layer_layout(const NetworkConfig& cfg) {
  std::vector<LayerSpec> layers;
  for (int i = 1; i <= cfg.est_layers; ++i) {
    const int in = i == 1 ? cfg.input_channels : cfg.est_channels;
    const int out = i == cfg.est_layers ? cfg.input_channels : cfg.est_channels;
    layers.push_back({"est.conv" + std::to_string(i), LayerKind::conv, in, out});
  }
  const int c0 = cfg.unet_c0, c1 = cfg.unet_c1, c2 = cfg.unet_c2;
  const int in = 2 * cfg.input_channels;
  layers.push_back({"dn.enc0a", LayerKind::conv, in, c0});
  layers.push_back({"dn.enc0b", LayerKind::conv, c0, c0});
  layers.push_back({"dn.down1", LayerKind::down, c0, c1});
  layers.push_back({"dn.enc1a", LayerKind::conv, c1, c1});
  layers.push_back({"dn.enc1b", LayerKind::conv, c1, c1});
  layers.push_back({"dn.down2", LayerKind::down, c1, c2});
  layers.push_back({"dn.enc2a", LayerKind::conv, c2, c2});
  layers.push_back({"dn.enc2b", LayerKind::conv, c2, c2});
  layers.push_back({"dn.enc2c", LayerKind::conv, c2, c2});
  layers.push_back({"dn.up1", LayerKind::up, c2, c1});
  layers.push_back({"dn.dec1a", LayerKind::conv, c1, c1});
  layers.push_back({"dn.dec1b", LayerKind::conv, c1, c1});
  layers.push_back({"dn.up2", LayerKind::up, c1, c0});
  layers.push_back({"dn.dec0a", LayerKind::conv, c0, c0});
  layers.push_back({"dn.dec0b", LayerKind::conv, c0, c0});
  layers.push_back({"dn.out", LayerKind::output, c0, cfg.input_channels});
  return layers;
}

std::map<std::string, Shape> parameter_shapes(const NetworkConfig& cfg) {
  std::map<std::string, Shape> shapes;
  const int k = cfg.kernel;
  for (const LayerSpec& l : layer_layout(cfg)) {
    // Transpose convs store Cin x Cout x k x k.
    shapes[l.name + ".weight"] = l.kind == LayerKind::up
                                     ? Shape{l.in_channels, l.out_channels, k, k}
                                     : Shape{l.out_channels, l.in_channels, k, k};
    shapes[l.name + ".bias"] = Shape{l.out_channels};
  }
  return shapes;
}

void ModelWeights::set(const std::string& name, Tensor t) { tensors_[name] = std::move(t); }

const Tensor& ModelWeights::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IncompatibilityError("missing parameter " + name);
  return it->second;
}

Tensor& ModelWeights::get(const std::string& name) {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IncompatibilityError("missing parameter " + name);
  return it->second;
}

void ModelWeights::set_requires_grad(bool on) {
  for (auto& [name, t] : tensors_) t.set_requires_grad(on);
}

void ModelWeights::zero_grad() {
  for (auto& [name, t] : tensors_) t.zero_grad();
}

ModelWeights ModelWeights::clone() const {
  ModelWeights copy(config_);
  for (const auto& [name, t] : tensors_) copy.set(name, t.detach());
  return copy;
}

bool ModelWeights::bitwise_equal(const ModelWeights& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (const auto& [name, t] : tensors_) {
    if (!other.contains(name)) return false;
    const Tensor& o = other.get(name);
    if (o.dims() != t.dims()) return false;
    auto a = t.values();
    auto b = o.values();
    if (std::memcmp(a.data(), b.data(), a.size_bytes()) != 0) return false;
  }
  return true;
}

ModelWeights init_model(const NetworkConfig& config, Rng& rng) {
  config.validate();
  ModelWeights weights(config);
  const int k = config.kernel;
  for (const LayerSpec& l : layer_layout(config)) {
    const Shape wshape = l.kind == LayerKind::up ? Shape{l.in_channels, l.out_channels, k, k}
                                                 : Shape{l.out_channels, l.in_channels, k, k};
    const double sd = std::sqrt(2.0 / (k * k * l.in_channels));
    std::normal_distribution<double> normal(0.0, sd);
    Tensor w(wshape);
    for (double& v : w.values()) v = static_cast<float>(normal(rng));
    weights.set(l.name + ".weight", std::move(w));
    weights.set(l.name + ".bias", Tensor({l.out_channels}));
  }
  return weights;
}

namespace {

Tensor conv(const ModelWeights& w, const std::string& layer, const Tensor& x, int stride = 1) {
  return conv2d(x, w.get(layer + ".weight"), w.get(layer + ".bias"),
                {.stride = stride, .padding = 1, .pad_mode = PadMode::reflect});
}

Tensor conv_relu(const ModelWeights& w, const std::string& layer, const Tensor& x, int stride = 1) {
  return relu(conv(w, layer, x, stride));
}

Tensor up_relu(const ModelWeights& w, const std::string& layer, const Tensor& x) {
  return relu(conv_transpose2d(x, w.get(layer + ".weight"), w.get(layer + ".bias"),
                               {.stride = 2, .padding = 1, .output_padding = 1}));
}

void require_image_batch(const Tensor& t, int channels, const char* what) {
  if (t.rank() != 4 || t.dim(1) != channels)
    throw ShapeError(std::string(what) + " must be N x " + std::to_string(channels) +
                     " x H x W, got " + shape_string(t.dims()));
}

Tensor unet_body(const ModelWeights& w, const Tensor& input) {
  Tensor e0 = conv_relu(w, "dn.enc0b", conv_relu(w, "dn.enc0a", input));
  Tensor e1 = conv_relu(w, "dn.down1", e0, 2);
  e1 = conv_relu(w, "dn.enc1b", conv_relu(w, "dn.enc1a", e1));
  Tensor e2 = conv_relu(w, "dn.down2", e1, 2);
  e2 = conv_relu(w, "dn.enc2c", conv_relu(w, "dn.enc2b", conv_relu(w, "dn.enc2a", e2)));
  Tensor d1 = add(up_relu(w, "dn.up1", e2), e1);
  d1 = conv_relu(w, "dn.dec1b", conv_relu(w, "dn.dec1a", d1));
  Tensor d0 = add(up_relu(w, "dn.up2", d1), e0);
  d0 = conv_relu(w, "dn.dec0b", conv_relu(w, "dn.dec0a", d0));
  return conv(w, "dn.out", d0);
}

}  // namespace

Tensor estimate_noise(const ModelWeights& weights, const Tensor& noisy) {
  require_image_batch(noisy, weights.config().input_channels, "noise estimator input");
  Tensor h = noisy;
  for (int i = 1; i <= weights.config().est_layers; ++i)
    h = conv_relu(weights, "est.conv" + std::to_string(i), h);
  return h;
}

Tensor denoise_nonblind(const ModelWeights& weights, const Tensor& noisy, const Tensor& map) {
  require_image_batch(noisy, weights.config().input_channels, "denoiser input");
  if (map.dims() != noisy.dims())
    throw ShapeError("noise map dims " + shape_string(map.dims()) + " differ from image dims " +
                     shape_string(noisy.dims()));
  const int h = noisy.dim(2), w = noisy.dim(3);
  const int pad_h = (4 - h % 4) % 4, pad_w = (4 - w % 4) % 4;
  Tensor input = concat_channels(noisy, map);
  if (pad_h || pad_w) input = reflect_pad2d(input, 0, pad_h, 0, pad_w);
  Tensor residual = unet_body(weights, input);
  if (pad_h || pad_w) residual = crop2d(residual, 0, 0, h, w);
  return add(noisy, residual);
}

NoiseLevelMap estimate_noise(const ModelWeights& weights, const Image& noisy) {
  if (noisy.channels() != 3) throw ShapeError("noise estimation expects an RGB image");
  return NoiseLevelMap(image_from_tensor(estimate_noise(weights, to_tensor(noisy))));
}

Image denoise_nonblind(const ModelWeights& weights, const Image& noisy, const NoiseLevelMap& map) {
  if (noisy.channels() != 3) throw ShapeError("denoising expects an RGB image");
  if (map.height() != noisy.height() || map.width() != noisy.width())
    throw ShapeError("noise map dims differ from image dims");
  return image_from_tensor(denoise_nonblind(weights, to_tensor(noisy), to_tensor(map.image())));
}

NoiseLevelMap scale_map(const NoiseLevelMap& map, double gamma) {
  NoiseLevelMap out = map;
  for (float& v : out.values()) v = static_cast<float>(gamma * static_cast<double>(v));
  return out;
}

BlindResult blind_denoise(const ModelWeights& weights, const Image& noisy, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be positive");
  BlindResult r;
  r.sigma_hat = estimate_noise(weights, noisy);
  r.rho_hat = scale_map(r.sigma_hat, gamma);
  r.x_hat = denoise_nonblind(weights, noisy, r.rho_hat);
  return r;
}

}  // namespace cbd
