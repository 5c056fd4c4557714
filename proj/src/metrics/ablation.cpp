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

#include "cbd/ablation.hpp"

#include <cstdio>
#include <sstream>

#include "cbd/error.hpp"
#include "cbd/scenes.hpp"

namespace cbd {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string AblationBudget::to_text() const {
  std::ostringstream os;
  os << "train_images = " << train_images << '\n'
     << "test_images = " << test_images << '\n'
     << "image_size = " << image_size << '\n'
     << "seed = " << seed << '\n'
     << "gt_mode = " << to_string(synthesis.gt_mode) << '\n'
     << "mc_draws = " << synthesis.mc_draws << '\n';
  // An in-memory pool cannot be expressed as text; its size still changes the hash.
  if (!clean_pool.empty()) os << "clean_pool = " << clean_pool.size() << '\n';
  std::istringstream train_text(train.to_text());
  for (std::string line; std::getline(train_text, line);) os << "train_" << line << '\n';
  return os.str();
}

std::string AblationBudget::hash() const { return fnv1a_hex(to_text()); }

AblationBudget AblationBudget::desk() { return {}; }

AblationBudget AblationBudget::parse(const std::string& text) {
  AblationBudget b = desk();
  std::istringstream in(text);
  std::string line, train_text;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw ValidationError("budget line without '=': " + line);
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    try {
      if (key == "train_images") b.train_images = std::stoi(value);
      else if (key == "test_images") b.test_images = std::stoi(value);
      else if (key == "image_size") b.image_size = std::stoi(value);
      else if (key == "seed") b.seed = std::stoull(value);
      else if (key == "gt_mode") b.synthesis.gt_mode = parse_gt_mode(value);
      else if (key == "mc_draws") b.synthesis.mc_draws = std::stoi(value);
      else if (key.starts_with("train_")) train_text += key.substr(6) + " = " + value + "\n";
      else throw ValidationError("unknown budget key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ValidationError("budget key '" + key + "': cannot parse '" + value + "'");
    }
  }
  if (!train_text.empty()) b.train = TrainConfig::parse(train_text);
  if (b.train_images <= 0 || b.test_images <= 0 || b.image_size < b.train.patch_size ||
      b.image_size % 2)
    throw ValidationError("budget sizes are inconsistent");
  return b;
}

std::vector<SyntheticPair> synthesize_set(const std::vector<Image>& clean, NoiseModel model,
                                          std::uint64_t seed, const SynthesisOptions& options) {
  std::vector<SyntheticPair> pairs;
  pairs.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng rng = make_rng(seed, i);
    pairs.push_back(synthesize_with_model(clean[i], model, rng, options));
  }
  return pairs;
}

std::vector<EvalReport> run_ablation(const std::vector<NoiseModel>& variants,
                                     const std::vector<NoiseModel>& test_models,
                                     const AblationBudget& budget) {
  if (variants.empty() || test_models.empty())
    throw ArgumentError("ablation needs at least one variant and one test set");

  std::vector<Image> train_clean, test_clean;
  const int total = budget.train_images + budget.test_images;
  if (!budget.clean_pool.empty()) {
    if (static_cast<int>(budget.clean_pool.size()) < total)
      throw ArgumentError("clean pool smaller than train_images + test_images");
    train_clean.assign(budget.clean_pool.begin(), budget.clean_pool.begin() + budget.train_images);
    test_clean.assign(budget.clean_pool.begin() + budget.train_images,
                      budget.clean_pool.begin() + total);
  } else {
    for (int i = 0; i < total; ++i) {
      Rng rng = make_rng(budget.seed, 0x5ce9e000 + static_cast<std::uint64_t>(i));
      (i < budget.train_images ? train_clean : test_clean)
          .push_back(generate_scene(rng, budget.image_size, budget.image_size));
    }
  }

  // One fixed test set per test noise model, shared by every variant.
  std::vector<std::vector<EvalPair>> test_sets;
  for (NoiseModel tm : test_models) {
    const auto pairs =
        synthesize_set(test_clean, tm, budget.seed ^ 0x7e57'0000ull, budget.synthesis);
    std::vector<EvalPair> set;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      set.push_back({"test" + std::to_string(i), pairs[i].clean, pairs[i].noisy});
    test_sets.push_back(std::move(set));
  }

  const std::string hash = budget.hash();
  std::vector<EvalReport> reports;
  for (NoiseModel variant : variants) {
    TrainingData data;
    for (SyntheticPair& p : synthesize_set(train_clean, variant, budget.seed, budget.synthesis))
      data.synthetic.push_back({std::move(p.clean), std::move(p.noisy), std::move(p.sigma_map)});
    const TrainResult trained = train(data, budget.train);
    for (std::size_t t = 0; t < test_models.size(); ++t) {
      EvalReport r = evaluate_model(trained.weights, test_sets[t], std::string(to_string(variant)),
                                    std::string(to_string(test_models[t])));
      r.config_hash = hash;
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

}  // namespace cbd
