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

#include "cbd/service.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "cbd/error.hpp"
#include "cbd/png_io.hpp"

namespace cbd {

using json = nlohmann::json;

namespace {

constexpr int kMinSide = 8;

ServiceResponse error_response(int status, const std::string& code, const std::string& message) {
  json body = {{"error", {{"code", code}, {"message", message}}}};
  return {status, body.dump(), "application/json", {}};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::string s = text;
  if (s.rfind("data:", 0) == 0) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ArgumentError("malformed data URL");
    s.erase(0, comma + 1);
  }
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s.empty()) return {};
  if (s.size() % 4 != 0) throw ArgumentError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(s.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(s.data()),
                                static_cast<int>(s.size()));
  if (n < 0) throw ArgumentError("invalid base64 characters");
  std::size_t pad = 0;
  if (s.back() == '=') ++pad;
  if (s.size() >= 2 && s[s.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

Image noise_heatmap(const NoiseLevelMap& map, double& scale) {
  Image mean(map.height(), map.width(), 1);
  scale = 0.0;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const double m = (static_cast<double>(map.at(y, x, 0)) + map.at(y, x, 1) + map.at(y, x, 2)) / 3.0;
      mean.at(y, x) = static_cast<float>(m);
    }
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      for (int c = 0; c < 3; ++c) scale = std::max(scale, static_cast<double>(map.at(y, x, c)));
  if (scale > 0.0)
    for (float& v : mean.values()) v = static_cast<float>(v / scale);
  return mean;
}

DenoiseService::DenoiseService(ModelWeights weights, std::string model_name,
                               std::size_t pixel_budget)
    : model_(std::make_shared<const Model>(Model{std::move(weights), std::move(model_name)})),
      pixel_budget_(pixel_budget) {}

std::shared_ptr<const DenoiseService::Model> DenoiseService::current() const {
  return std::atomic_load(&model_);
}

void DenoiseService::reload(ModelWeights weights, std::string model_name) {
  std::atomic_store(&model_, std::shared_ptr<const Model>(
                                 std::make_shared<const Model>(Model{std::move(weights), std::move(model_name)})));
}

ServiceResponse DenoiseService::health() const {
  const auto model = current();
  json body = {{"status", "ok"},
               {"model", model->name},
               {"preset", model->weights.config().preset_name()},
               {"version", kVersion}};
  return {200, body.dump(), "application/json", {}};
}

ServiceResponse DenoiseService::handle_denoise(const std::string& body) const {
  const auto t0 = std::chrono::steady_clock::now();
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "invalid_json", e.what());
  }
  if (!request.is_object()) return error_response(400, "invalid_json", "request must be an object");
  if (!request.contains("image") || !request["image"].is_string())
    return error_response(400, "missing_image", "field 'image' (base64 PNG) is required");

  double gamma = 1.0;
  if (request.contains("gamma")) {
    if (!request["gamma"].is_number())
      return error_response(400, "invalid_gamma", "gamma must be a number");
    gamma = request["gamma"].get<double>();
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    return error_response(400, "invalid_gamma", "gamma must be a positive finite number");
  const bool return_map = request.value("return_map", true);
  const bool include_timings = request.value("include_timings", false);

  std::vector<std::uint8_t> png;
  try {
    png = base64_decode(request["image"].get<std::string>());
  } catch (const ArgumentError& e) {
    return error_response(400, "invalid_base64", e.what());
  }
  Image y;
  try {
    y = decode_png(png);
  } catch (const std::exception& e) {
    return error_response(400, "invalid_png", e.what());
  }
  if (static_cast<std::size_t>(y.height()) * y.width() > pixel_budget_)
    return error_response(413, "image_too_large",
                          "image exceeds the pixel budget of " + std::to_string(pixel_budget_));
  if (y.height() < kMinSide || y.width() < kMinSide)
    return error_response(400, "image_too_small", "image sides must be at least 8 pixels");
  const double decode_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const auto model = current();
  const BlindResult result = blind_denoise(model->weights, y, gamma);
  const double inference_ms = ms_since(t1);

  const auto t2 = std::chrono::steady_clock::now();
  json response;
  response["width"] = y.width();
  response["height"] = y.height();
  response["denoised"] = base64_encode(encode_png(clamp01(result.x_hat)));
  double scale = 0.0;
  const Image heat = noise_heatmap(result.rho_hat, scale);
  response["map_scale"] = scale;
  if (return_map) response["noise_map_png"] = base64_encode(encode_png(heat));
  const double encode_ms = ms_since(t2);

  if (include_timings)
    response["timings_ms"] = {{"decode", decode_ms}, {"inference", inference_ms}, {"encode", encode_ms}};
  char timing[160];
  std::snprintf(timing, sizeof timing, "decode;dur=%.2f, inference;dur=%.2f, encode;dur=%.2f",
                decode_ms, inference_ms, encode_ms);
  return {200, response.dump(), "application/json", timing};
}

bool run_server(DenoiseService& service, const std::string& host, int port) {
  httplib::Server server;
  server.set_payload_max_length(64u << 20);
  auto reply = [](httplib::Response& res, const ServiceResponse& out) {
    res.status = out.status;
    if (!out.server_timing.empty()) res.set_header("Server-Timing", out.server_timing);
    res.set_content(out.body, out.content_type.c_str());
  };
  server.Get("/api/health", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });
  server.Post("/api/denoise", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_denoise(req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    }
    res.status = 500;
    res.set_content(json{{"error", {{"code", "internal"}, {"message", what}}}}.dump(),
                    "application/json");
  });
  std::cerr << "serving on http://" << host << ":" << port << "\n";
  return server.listen(host, port);
}

}  // namespace cbd
