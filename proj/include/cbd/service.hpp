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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cbd/network.hpp"

namespace cbd {

inline constexpr const char* kVersion = "0.1.0";

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  /// Wall-clock breakdown for the Server-Timing header; kept out of the body
  /// unless the request asks for it.
  std::string server_timing;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
/// Throws ArgumentError on malformed input. Whitespace and a data-URL prefix
/// are tolerated.
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Heatmap of a noise map: channel mean divided by the map maximum, as an
/// 8-bit gray image. `scale` receives that maximum (0 for an all-zero map).
Image noise_heatmap(const NoiseLevelMap& map, double& scale);

/// Request handling for the interactive denoiser, independent of transport.
///
/// POST /api/denoise body: {"image": base64 PNG, "gamma": 1.0, "return_map": true}
/// Response: {"denoised", "noise_map_png" (when return_map), "map_scale",
/// "width", "height"}; "timings_ms" only when "include_timings" is true.
/// Errors: {"error": {"code", "message"}} with status 400 or 413.
class DenoiseService {
 public:
  DenoiseService(ModelWeights weights, std::string model_name,
                 std::size_t pixel_budget = 4'000'000);

  ServiceResponse handle_denoise(const std::string& body) const;
  ServiceResponse health() const;

  /// Swaps the served weights; requests already running keep the old ones.
  void reload(ModelWeights weights, std::string model_name);

  std::size_t pixel_budget() const { return pixel_budget_; }

 private:
  struct Model {
    ModelWeights weights;
    std::string name;
  };
  std::shared_ptr<const Model> current() const;

  std::shared_ptr<const Model> model_;
  std::size_t pixel_budget_;
};

/// Blocks serving /api/denoise and /api/health until the process is stopped.
/// Returns false if the socket could not be bound.
bool run_server(DenoiseService& service, const std::string& host, int port);

}  // namespace cbd
