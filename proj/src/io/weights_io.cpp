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

#include "cbd/weights_io.hpp"

#include <zlib.h>


#include "byte_order.hpp"
#include "cbd/error.hpp"
#include "cbd/png_io.hpp"

namespace cbd {

namespace {

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

int leading_dim(const std::map<std::string, Tensor>& tensors, const std::string& name) {
  const auto it = tensors.find(name);
  if (it == tensors.end() || it->second.rank() != 4)
    throw IncompatibilityError("cannot infer network widths: missing or malformed " + name);
  return it->second.dim(0);
}

NetworkConfig infer_config(const std::map<std::string, Tensor>& tensors) {
  NetworkConfig cfg;
  cfg.est_channels = leading_dim(tensors, "est.conv1.weight");
  cfg.unet_c0 = leading_dim(tensors, "dn.enc0a.weight");
  cfg.unet_c1 = leading_dim(tensors, "dn.enc1a.weight");
  cfg.unet_c2 = leading_dim(tensors, "dn.enc2a.weight");
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw IncompatibilityError(std::string("inferred network widths are invalid: ") + e.what());
  }
  return cfg;
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights) {
  std::vector<std::uint8_t> out{'C', 'B', 'D', 'W'};
  detail::put_u32(out, kWeightsFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(weights.tensors().size()));
  for (const auto& [name, t] : weights.tensors()) {
    if (name.size() > 0xFFFF) throw ArgumentError("tensor name too long: " + name);
    detail::put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    detail::put_u8(out, static_cast<std::uint8_t>(t.rank()));
    for (int d : t.dims()) detail::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) detail::put_f32(out, static_cast<float>(v));
  }
  detail::put_u32(out, crc32_of(out.data(), out.size()));
  return out;
}

ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw CorruptionError("weights file truncated");
  const std::size_t body = bytes.size() - 4;
  detail::ByteReader tail(bytes.data() + body, 4);
  if (tail.u32() != crc32_of(bytes.data(), body))
    throw CorruptionError("weights checksum mismatch");

  detail::ByteReader in(bytes.data(), body);
  if (in.str(4) != "CBDW") throw CorruptionError("not a weights file (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != kWeightsFormatVersion)
    throw IncompatibilityError("unsupported weights format version " + std::to_string(version));
  const std::uint32_t count = in.u32();

  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = in.str(in.u16());
    const int rank = in.u8();
    if (rank < 1 || rank > 4) throw CorruptionError("bad rank for tensor " + name);
    Shape dims(static_cast<std::size_t>(rank));
    for (int& d : dims) {
      const std::uint32_t v = in.u32();
      if (v > (1u << 24)) throw CorruptionError("implausible extent for tensor " + name);
      d = static_cast<int>(v);
    }
    std::vector<double> values(shape_volume(dims));
    if (values.size() * 4 > in.remaining()) throw CorruptionError("payload truncated for " + name);
    for (double& v : values) v = in.f32();
    if (!tensors.emplace(name, Tensor(dims, std::move(values))).second)
      throw CorruptionError("duplicate tensor " + name);
  }
  if (in.remaining() != 0) throw CorruptionError("trailing bytes before checksum");

  const NetworkConfig cfg = infer_config(tensors);
  const auto expected = parameter_shapes(cfg);
  std::string offenders;
  auto note = [&](const std::string& what) { offenders += (offenders.empty() ? "" : ", ") + what; };
  for (const auto& [name, t] : tensors) {
    const auto it = expected.find(name);
    if (it == expected.end())
      note(name + " (unknown)");
    else if (it->second != t.dims())
      note(name + " (shape " + shape_string(t.dims()) + ", expected " + shape_string(it->second) + ")");
  }
  for (const auto& [name, dims] : expected)
    if (!tensors.count(name)) note(name + " (missing)");
  if (!offenders.empty()) throw IncompatibilityError("weights do not match the layout: " + offenders);

  ModelWeights weights(cfg);
  for (auto& [name, t] : tensors) weights.set(name, std::move(t));
  return weights;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  write_file(path, serialize_weights(weights));
}

ModelWeights load_weights(const std::filesystem::path& path) {
  return deserialize_weights(read_file(path));
}

}  // namespace cbd
