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

#include "cbd/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "byte_order.hpp"
#include "cbd/error.hpp"
#include "cbd/png_io.hpp"

namespace cbd {

namespace fs = std::filesystem;

namespace {

constexpr char kSigmaMagic[] = "CBDS";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string pair_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

void write_sigma_map(const fs::path& path, const NoiseLevelMap& map) {
  std::vector<std::uint8_t> bytes(kSigmaMagic, kSigmaMagic + 4);
  detail::put_u32(bytes, static_cast<std::uint32_t>(map.height()));
  detail::put_u32(bytes, static_cast<std::uint32_t>(map.width()));
  detail::put_u32(bytes, 3);
  for (float v : map.values()) detail::put_f32(bytes, v);
  write_file(path, bytes);
}

NoiseLevelMap read_sigma_map(const fs::path& path) {
  const auto bytes = read_file(path);
  detail::ByteReader in(bytes.data(), bytes.size());
  try {
    if (in.str(4) != "CBDS") throw CorruptionError("bad sigma map magic in " + path.string());
    const auto h = in.u32();
    const auto w = in.u32();
    const auto c = in.u32();
    if (c != 3) throw CorruptionError("sigma map must have 3 channels: " + path.string());
    if (in.remaining() != static_cast<std::size_t>(h) * w * c * 4)
      throw CorruptionError("sigma map payload size mismatch: " + path.string());
    NoiseLevelMap map(static_cast<int>(h), static_cast<int>(w));
    for (float& v : map.values()) v = in.f32();
    return map;
  } catch (const CorruptionError& e) {
    throw IngestionError(e.what());
  }
}

std::string format_params(const NoiseParams& params) {
  std::ostringstream os;
  os << "sigma_s = " << format_double(params.sigma_s) << "\n";
  os << "sigma_c = " << format_double(params.sigma_c) << "\n";
  const bool power = params.crf.kind() == CrfKind::gamma_power;
  os << "crf_kind = " << (power ? "gamma_power" : "tabulated") << "\n";
  os << "gamma_exponent = " << (power ? format_double(params.crf.gamma_exponent()) : "none")
     << "\n";
  os << "jpeg_quality = "
     << (params.jpeg_quality ? std::to_string(*params.jpeg_quality) : std::string("none")) << "\n";
  os << "seed = " << params.seed << "\n";
  return os.str();
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key = value: " + line);
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_pair(const fs::path& root, int index, const SyntheticPair& pair) {
  const std::string stem = pair_stem(index);
  write_png(root / "clean" / (stem + ".png"), pair.clean);
  write_png(root / "noisy" / (stem + ".png"), pair.noisy);
  write_sigma_map(root / "sigma" / (stem + ".bin"), pair.sigma_map);
  const std::string text = format_params(pair.params);
  write_file(root / "params" / (stem + ".txt"), std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_real_pair(const fs::path& root, int index, const Image& clean, const Image& noisy) {
  const std::string stem = pair_stem(index);
  write_png(root / "clean" / (stem + ".png"), clean);
  write_png(root / "noisy" / (stem + ".png"), noisy);
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestionError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void build_synthetic_dataset(const std::vector<Image>& clean_images, const fs::path& out,
                             const SynthOptions& options) {
  if (clean_images.empty()) throw IngestionError("no clean images to synthesize from");
  if (options.count < 1) throw ArgumentError("count must be >= 1");
  for (int i = 0; i < options.count; ++i) {
    const Image& src = clean_images[static_cast<std::size_t>(i) % clean_images.size()];
    const Image x = crop(src, 0, 0, src.height() & ~1, src.width() & ~1);
    Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(i));
    const NoiseParams params = sample_noise_params(rng, options.jpeg, options.sampler);
    write_pair(out, i, synthesize_pair(x, params, rng, options.synthesis));
  }
}

std::vector<TrainingPair> load_pairs(const fs::path& root, bool with_sigma) {
  const auto noisy_files = list_pngs(root / "noisy");
  std::vector<TrainingPair> pairs;
  pairs.reserve(noisy_files.size());
  for (const auto& noisy_path : noisy_files) {
    const fs::path stem = noisy_path.stem();
    const fs::path clean_path = root / "clean" / noisy_path.filename();
    if (!fs::exists(clean_path)) throw IngestionError("missing clean image " + clean_path.string());
    TrainingPair pair;
    pair.clean = read_png(clean_path);
    pair.noisy = read_png(noisy_path);
    if (!pair.clean.same_dims(pair.noisy))
      throw IngestionError("clean/noisy size mismatch for " + stem.string());
    if (with_sigma) {
      const fs::path sigma_path = root / "sigma" / (stem.string() + ".bin");
      if (!fs::exists(sigma_path)) throw IngestionError("missing sigma map " + sigma_path.string());
      pair.sigma = read_sigma_map(sigma_path);
      if (pair.sigma->height() != pair.noisy.height() || pair.sigma->width() != pair.noisy.width())
        throw IngestionError("sigma map size mismatch for " + stem.string());
    }
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw IngestionError("no pairs found under " + root.string());
  return pairs;
}

}  // namespace cbd
