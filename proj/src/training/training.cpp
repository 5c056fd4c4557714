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

#include "cbd/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "cbd/error.hpp"
#include "cbd/metrics.hpp"
#include "cbd/ops.hpp"

namespace cbd {

TrainConfig TrainConfig::full() { return {}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.batch_size = 8;
  c.patch_size = 48;
  c.epochs = 10;
  c.network = NetworkConfig::compact();
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ValidationError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c = desk();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "preset") {
      if (value == "full")
        c = full();
      else if (value == "desk")
        c = desk();
      else
        throw ValidationError("unknown preset '" + value + "'");
    } else if (key == "batch_size") c.batch_size = parse_number<int>(key, value);
    else if (key == "patch_size") c.patch_size = parse_number<int>(key, value);
    else if (key == "epochs") c.epochs = parse_number<int>(key, value);
    else if (key == "lr") c.lr = parse_number<double>(key, value);
    else if (key == "lr_late") c.lr_late = parse_number<double>(key, value);
    else if (key == "warmup_steps") c.warmup_steps = parse_number<int>(key, value);
    else if (key == "beta1") c.adam.beta1 = parse_number<double>(key, value);
    else if (key == "beta2") c.adam.beta2 = parse_number<double>(key, value);
    else if (key == "epsilon") c.adam.epsilon = parse_number<double>(key, value);
    else if (key == "alpha") c.loss.alpha = parse_number<double>(key, value);
    else if (key == "lambda_asymm") c.loss.lambda_asymm = parse_number<double>(key, value);
    else if (key == "lambda_tv") c.loss.lambda_tv = parse_number<double>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "mix_real") c.mix_real = parse_bool(key, value);
    else if (key == "channels") {
      if (value == "full") c.network = NetworkConfig::full();
      else if (value == "compact") c.network = NetworkConfig::compact();
      else throw ValidationError("channels must be 'full' or 'compact'");
    }
    else if (key == "unet_c0") c.network.unet_c0 = parse_number<int>(key, value);
    else if (key == "unet_c1") c.network.unet_c1 = parse_number<int>(key, value);
    else if (key == "unet_c2") c.network.unet_c2 = parse_number<int>(key, value);
    else if (key == "batches_per_epoch") c.batches_per_epoch = parse_number<int>(key, value);
    else if (key == "val_count") c.val_count = parse_number<int>(key, value);
    else if (key == "estimator_only") c.estimator_only = parse_bool(key, value);
    else if (key == "augment") c.augment = parse_bool(key, value);
    else if (key == "precision") {
      if (value == "fast") c.precision = Precision::fast;
      else if (value == "wide") c.precision = Precision::wide;
      else throw ValidationError("precision must be 'fast' or 'wide'");
    }
    else throw ValidationError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "batch_size = " << batch_size << '\n'
     << "patch_size = " << patch_size << '\n'
     << "epochs = " << epochs << '\n'
     << "lr = " << format_double(lr) << '\n'
     << "lr_late = " << format_double(lr_late) << '\n'
     << "warmup_steps = " << warmup_steps << '\n'
     << "beta1 = " << format_double(adam.beta1) << '\n'
     << "beta2 = " << format_double(adam.beta2) << '\n'
     << "epsilon = " << format_double(adam.epsilon) << '\n'
     << "alpha = " << format_double(loss.alpha) << '\n'
     << "lambda_asymm = " << format_double(loss.lambda_asymm) << '\n'
     << "lambda_tv = " << format_double(loss.lambda_tv) << '\n'
     << "seed = " << seed << '\n'
     << "mix_real = " << (mix_real ? "true" : "false") << '\n'
     << "unet_c0 = " << network.unet_c0 << '\n'
     << "unet_c1 = " << network.unet_c1 << '\n'
     << "unet_c2 = " << network.unet_c2 << '\n'
     << "batches_per_epoch = " << batches_per_epoch << '\n'
     << "val_count = " << val_count << '\n'
     << "estimator_only = " << (estimator_only ? "true" : "false") << '\n'
     << "augment = " << (augment ? "true" : "false") << '\n'
     << "precision = " << (precision == Precision::fast ? "fast" : "wide") << '\n';
  return os.str();
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (patch_size <= 0 || patch_size % 4 != 0)
    throw ValidationError("patch_size must be a positive multiple of 4");
  if (epochs < 2) throw ValidationError("epochs must be >= 2 for the two-phase learning rate");
  if (!(lr > 0.0) || !(lr_late > 0.0)) throw ValidationError("learning rates must be positive");
  if (batches_per_epoch < 0 || val_count < 0 || warmup_steps < 0)
    throw ValidationError("batches_per_epoch, val_count and warmup_steps must be non-negative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ValidationError("Adam betas must lie in [0, 1)");
  if (estimator_only && mix_real)
    throw ValidationError("estimator_only training has no use for real pairs");
  loss.validate();
  network.validate();
}

double learning_rate_for_epoch(const TrainConfig& config, int epoch) {
  const int switch_epoch = (config.epochs + 1) / 2;
  return epoch < switch_epoch ? config.lr : config.lr_late;
}

double learning_rate_for_step(const TrainConfig& config, int epoch, std::int64_t step) {
  const double lr = learning_rate_for_epoch(config, epoch);
  if (step >= config.warmup_steps) return lr;
  return lr * static_cast<double>(step + 1) / static_cast<double>(config.warmup_steps);
}

std::vector<BatchKind> make_schedule(int n_batches, bool mix_real) {
  if (n_batches < 1) throw ArgumentError("schedule needs at least one batch");
  std::vector<BatchKind> kinds(static_cast<std::size_t>(n_batches), BatchKind::synthetic);
  if (mix_real)
    for (std::size_t i = 1; i < kinds.size(); i += 2) kinds[i] = BatchKind::real;
  return kinds;
}

std::string format_metrics_line(const EpochMetrics& m) {
  std::ostringstream os;
  os << m.epoch << '\t' << format_double(m.total) << '\t' << format_double(m.rec) << '\t'
     << format_double(m.asymm) << '\t' << format_double(m.tv) << '\t'
     << (std::isnan(m.val_psnr) ? std::string("nan") : format_double(m.val_psnr));
  return os.str();
}

TrainingData split_validation(TrainingData data, int val_count) {
  if (val_count <= 0) return data;
  if (static_cast<std::size_t>(val_count) >= data.synthetic.size())
    throw ArgumentError("val_count leaves no synthetic training pairs");
  data.validation.assign(std::make_move_iterator(data.synthetic.end() - val_count),
                         std::make_move_iterator(data.synthetic.end()));
  data.synthetic.resize(data.synthetic.size() - val_count);
  return data;
}

namespace {

struct Batch {
  Tensor clean;
  Tensor noisy;
  std::optional<Tensor> sigma;
};

class BatchSampler {
 public:
  BatchSampler(const TrainingData& data, const TrainConfig& config)
      : data_(data), config_(config), rng_(make_rng(config.seed, 0x5eed)) {
    order_.resize(data.synthetic.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    cursor_ = order_.size();
  }

  Batch next(BatchKind kind) {
    std::vector<Image> clean, noisy, sigma;
    const int p = config_.patch_size;
    for (int i = 0; i < config_.batch_size; ++i) {
      const TrainingPair& pair = kind == BatchKind::synthetic ? next_synthetic() : next_real();
      if (pair.clean.height() < p || pair.clean.width() < p)
        throw IngestionError("training image smaller than the patch size");
      const int y0 = std::uniform_int_distribution<int>(0, pair.clean.height() - p)(rng_);
      const int x0 = std::uniform_int_distribution<int>(0, pair.clean.width() - p)(rng_);
      const bool flip = config_.augment && std::uniform_int_distribution<int>(0, 1)(rng_) == 1;
      auto take = [&](const Image& img) {
        Image c = crop(img, y0, x0, p, p);
        return flip ? flip_horizontal(c) : c;
      };
      clean.push_back(take(pair.clean));
      noisy.push_back(take(pair.noisy));
      if (kind == BatchKind::synthetic) {
        if (!pair.sigma) throw IngestionError("synthetic pair without a noise level map");
        sigma.push_back(take(pair.sigma->image()));
      }
    }
    Batch b{to_tensor(clean), to_tensor(noisy), std::nullopt};
    if (kind == BatchKind::synthetic) b.sigma = to_tensor(sigma);
    return b;
  }

 private:
  const TrainingPair& next_synthetic() {
    if (cursor_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    return data_.synthetic[order_[cursor_++]];
  }

  const TrainingPair& next_real() {
    const auto i = std::uniform_int_distribution<std::size_t>(0, data_.real.size() - 1)(rng_);
    return data_.real[i];
  }

  const TrainingData& data_;
  const TrainConfig& config_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
};

double validation_psnr(const ModelWeights& weights, const TrainingData& data) {
  if (data.validation.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (const TrainingPair& pair : data.validation) {
    const BlindResult r = blind_denoise(weights, pair.noisy, 1.0);
    acc += psnr(clamp01(r.x_hat), pair.clean);
  }
  return acc / static_cast<double>(data.validation.size());
}

}  // namespace

TrainResult train(const TrainingData& data, const TrainConfig& config,
                  std::optional<ModelWeights> initial, const EpochCallback& on_epoch) {
  config.validate();
  if (data.synthetic.empty()) throw IngestionError("no synthetic training pairs");
  if (config.mix_real && data.real.empty())
    throw IngestionError("mix_real requested but no real pairs were provided");
  PrecisionScope precision_scope(config.precision);

  TrainResult result;
  if (initial) {
    if (!(initial->config() == config.network))
      throw IncompatibilityError("initial weights do not match the configured network");
    result.weights = initial->clone();
  } else {
    Rng init_rng = make_rng(config.seed, 0x1417);
    result.weights = init_model(config.network, init_rng);
  }
  ModelWeights& weights = result.weights;
  for (auto& [name, t] : weights.tensors())
    t.set_requires_grad(!config.estimator_only || name.starts_with("est."));

  const int n_batches =
      config.batches_per_epoch > 0
          ? config.batches_per_epoch
          : static_cast<int>((data.synthetic.size() + config.batch_size - 1) / config.batch_size);
  const std::vector<BatchKind> schedule = make_schedule(n_batches, config.mix_real);

  BatchSampler sampler(data, config);
  AdamState adam;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch + 1;
    int synthetic_batches = 0;
    for (const BatchKind kind : schedule) {
      const Batch batch = sampler.next(kind);
      weights.zero_grad();
      Graph graph;
      const Tensor sigma_hat = estimate_noise(weights, batch.noisy);
      LossTerms terms;
      if (config.estimator_only) {
        const Tensor asymm = asymmetric_loss(sigma_hat, *batch.sigma, config.loss.alpha);
        const Tensor tv = tv_loss(sigma_hat);
        terms.asymm = asymm.item();
        terms.tv = tv.item();
        terms.total = add(scale(asymm, config.loss.lambda_asymm), scale(tv, config.loss.lambda_tv));
      } else {
        const Tensor x_hat = denoise_nonblind(weights, batch.noisy, sigma_hat);
        terms = total_loss(x_hat, batch.clean, sigma_hat, batch.sigma, config.loss, kind);
      }
      const double loss = terms.total.item();
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch + 1 << ", step " << result.step_losses.size() + 1
           << " (rec " << terms.rec << ", asymm " << terms.asymm << ", tv " << terms.tv << ")";
        throw TrainingError(os.str());
      }
      graph.backward(terms.total);
      adam_step(weights, adam, learning_rate_for_step(config, epoch, adam.step), config.adam);

      result.batch_kinds.push_back(kind);
      result.step_losses.push_back(loss);
      m.total += loss;
      m.rec += terms.rec;
      m.tv += terms.tv;
      if (kind == BatchKind::synthetic) {
        m.asymm += terms.asymm;
        ++synthetic_batches;
      }
    }
    const double n = static_cast<double>(schedule.size());
    m.total /= n;
    m.rec /= n;
    m.tv /= n;
    m.asymm /= std::max(1, synthetic_batches);
    m.val_psnr = config.estimator_only ? std::numeric_limits<double>::quiet_NaN()
                                       : validation_psnr(weights, data);
    result.epochs.push_back(m);
    if (on_epoch) on_epoch(m, weights);
  }
  for (auto& [name, t] : weights.tensors()) {
    t.set_requires_grad(false);
    t.clear_grad();
  }
  return result;
}

}  // namespace cbd
