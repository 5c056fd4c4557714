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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "cbd/adam.hpp"
#include "cbd/error.hpp"
#include "cbd/training.hpp"
#include "helpers.hpp"

using namespace cbd;
using cbd::test::random_image;

namespace {

NetworkConfig tiny_network() {
  NetworkConfig c;
  c.est_channels = 4;
  c.unet_c0 = 4;
  c.unet_c1 = 6;
  c.unet_c2 = 8;
  return c;
}

TrainConfig tiny_config() {
  TrainConfig c = TrainConfig::desk();
  c.batch_size = 2;
  c.patch_size = 8;
  c.epochs = 2;
  c.batches_per_epoch = 3;
  c.network = tiny_network();
  c.seed = 11;
  return c;
}

TrainingPair make_pair(Rng& rng, int size, double sd) {
  TrainingPair p;
  p.clean = random_image(size, size, 3, rng);
  p.noisy = p.clean;
  std::normal_distribution<double> n(0.0, sd);
  for (float& v : p.noisy.values()) v = static_cast<float>(v + n(rng));
  p.sigma = NoiseLevelMap(size, size, static_cast<float>(sd));
  return p;
}

TrainingData tiny_data(int count = 6, int size = 12) {
  Rng rng = make_rng(77);
  TrainingData d;
  for (int i = 0; i < count; ++i) d.synthetic.push_back(make_pair(rng, size, 0.05));
  return d;
}

}  // namespace

TEST_CASE("adam with zero gradient leaves weights unchanged") {
  Rng rng = make_rng(1);
  ModelWeights w = init_model(tiny_network(), rng);
  const ModelWeights before = w.clone();
  w.set_requires_grad(true);
  for (auto& [name, t] : w.tensors()) t.grad_buffer();
  AdamState state;
  adam_step(w, state, 1e-3);
  CHECK(state.step == 1);
  CHECK(w.bitwise_equal(before));
}

TEST_CASE("adam first step against the reference formula") {
  PrecisionScope wide(Precision::wide);
  ModelWeights w(tiny_network());
  Tensor p({4}, std::vector<double>{0.5, -0.25, 1.0, 0.0});
  p.set_requires_grad();
  const std::vector<double> g{1.0, -2.0, 0.5, 1e-3};
  for (std::size_t i = 0; i < 4; ++i) p.grad_buffer()[i] = g[i];
  w.set("x", p);
  AdamState state;
  const AdamHyper h;
  adam_step(w, state, 1e-3, h);
  const std::vector<double> start{0.5, -0.25, 1.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    const double m = (1 - h.beta1) * g[i], v = (1 - h.beta2) * g[i] * g[i];
    const double mh = m / (1 - h.beta1), vh = v / (1 - h.beta2);
    const double expected = start[i] - 1e-3 * mh / (std::sqrt(vh) + h.epsilon);
    CHECK(w.get("x").values()[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(w.get("x").values()[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-7));
}

TEST_CASE("adam requires gradients on trainable tensors") {
  Rng rng = make_rng(2);
  ModelWeights w = init_model(tiny_network(), rng);
  w.set_requires_grad(true);
  AdamState state;
  CHECK_THROWS_AS(adam_step(w, state, 1e-3), StateError);
}

TEST_CASE("batch schedules") {
  CHECK(make_schedule(4, false) == std::vector<BatchKind>(4, BatchKind::synthetic));
  CHECK(make_schedule(5, true) ==
        std::vector<BatchKind>{BatchKind::synthetic, BatchKind::real, BatchKind::synthetic,
                               BatchKind::real, BatchKind::synthetic});
  CHECK(make_schedule(1, true) == std::vector<BatchKind>{BatchKind::synthetic});
  CHECK_THROWS_AS(make_schedule(0, false), ArgumentError);
  for (int n = 1; n < 40; ++n) {
    const auto s = make_schedule(n, true);
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(s[i] == (i % 2 == 0 ? BatchKind::synthetic : BatchKind::real));
  }
}

TEST_CASE("learning rate switches at the midpoint") {
  TrainConfig c = TrainConfig::full();
  for (int e = 0; e < 20; ++e) CHECK(learning_rate_for_epoch(c, e) == 1e-3);
  for (int e = 20; e < 40; ++e) CHECK(learning_rate_for_epoch(c, e) == 5e-4);
  c.epochs = 5;
  CHECK(learning_rate_for_epoch(c, 2) == 1e-3);
  CHECK(learning_rate_for_epoch(c, 3) == 5e-4);
}

TEST_CASE("warmup ramps the rate linearly") {
  TrainConfig c = TrainConfig::desk();
  CHECK(c.warmup_steps == 0);
  CHECK(learning_rate_for_step(c, 0, 0) == 1e-3);
  c.warmup_steps = 4;
  CHECK(learning_rate_for_step(c, 0, 0) == doctest::Approx(2.5e-4).epsilon(1e-12));
  CHECK(learning_rate_for_step(c, 0, 2) == doctest::Approx(7.5e-4).epsilon(1e-12));
  CHECK(learning_rate_for_step(c, 0, 3) == 1e-3);
  CHECK(learning_rate_for_step(c, 9, 100) == 5e-4);
  CHECK(learning_rate_for_step(c, 9, 1) == doctest::Approx(2.5e-4).epsilon(1e-12));
}

TEST_CASE("presets") {
  const TrainConfig p = TrainConfig::full();
  CHECK(p.batch_size == 32);
  CHECK(p.patch_size == 128);
  CHECK(p.epochs == 40);
  CHECK(p.network == NetworkConfig::full());
  const TrainConfig d = TrainConfig::desk();
  CHECK(d.batch_size == 8);
  CHECK(d.patch_size == 48);
  CHECK(d.epochs == 10);
  CHECK(d.network == NetworkConfig::compact());
  CHECK_NOTHROW(p.validate());
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("config parsing") {
  const TrainConfig c = TrainConfig::parse("# comment\npreset = full\nepochs = 6 # trailing\nlr = 2e-3\nmix_real = true\n");
  CHECK(c.batch_size == 32);
  CHECK(c.epochs == 6);
  CHECK(c.lr == 2e-3);
  CHECK(c.mix_real);
  CHECK(TrainConfig::parse("warmup_steps = 300\n").warmup_steps == 300);

  const TrainConfig round = TrainConfig::parse(tiny_config().to_text());
  CHECK(round.to_text() == tiny_config().to_text());

  CHECK_THROWS_AS(TrainConfig::parse("learning_rate = 1\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("epochs = ten\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("epochs\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("epochs = 1\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("patch_size = 30\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("alpha = 0.7\n"), ArgumentError);
  CHECK_THROWS_AS(TrainConfig::parse("preset = huge\n"), ValidationError);
  CHECK_THROWS_AS(TrainConfig::parse("warmup_steps = -1\n"), ValidationError);
}

TEST_CASE("training is deterministic") {
  const TrainingData d = tiny_data();
  const TrainResult a = train(d, tiny_config());
  const TrainResult b = train(d, tiny_config());
  CHECK(a.weights.bitwise_equal(b.weights));
  CHECK(a.step_losses == b.step_losses);
  CHECK(a.step_losses.size() == 6);
  CHECK(a.epochs.size() == 2);
  for (const auto& [name, t] : a.weights.tensors()) {
    CHECK_FALSE(t.requires_grad());
    CHECK_FALSE(t.has_grad());
  }
  TrainConfig other = tiny_config();
  other.seed = 12;
  CHECK_FALSE(train(d, other).weights.bitwise_equal(a.weights));
}

TEST_CASE("training lowers the loss on a fixed set") {
  TrainingData d = tiny_data(2, 8);
  TrainConfig c = tiny_config();
  c.epochs = 40;
  c.batches_per_epoch = 2;
  c.augment = false;
  const TrainResult r = train(d, c);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 8; ++i) {
    first += r.step_losses[i];
    last += r.step_losses[r.step_losses.size() - 1 - i];
  }
  CHECK(last < 0.5 * first);
}

TEST_CASE("mixed training follows the alternating schedule") {
  TrainingData d = tiny_data();
  Rng rng = make_rng(3);
  for (int i = 0; i < 3; ++i) {
    TrainingPair p = make_pair(rng, 12, 0.03);
    p.sigma.reset();
    d.real.push_back(p);
  }
  TrainConfig c = tiny_config();
  c.mix_real = true;
  c.batches_per_epoch = 5;
  const TrainResult r = train(d, c);
  std::vector<BatchKind> expected;
  for (int e = 0; e < 2; ++e)
    for (BatchKind k : make_schedule(5, true)) expected.push_back(k);
  CHECK(r.batch_kinds == expected);

  TrainingData no_real = tiny_data();
  CHECK_THROWS_AS(train(no_real, c), IngestionError);
}

TEST_CASE("estimator-only training touches only the estimator") {
  TrainConfig c = tiny_config();
  c.estimator_only = true;
  const TrainingData d = tiny_data();
  const TrainResult r = train(d, c);
  Rng init = make_rng(c.seed, 0x1417);
  const ModelWeights start = init_model(c.network, init);
  bool est_changed = false;
  for (const auto& [name, t] : r.weights.tensors()) {
    const auto a = t.values(), b = start.get(name).values();
    const bool same = std::equal(a.begin(), a.end(), b.begin());
    if (name.starts_with("est.")) est_changed = est_changed || !same;
    else CHECK(same);
  }
  CHECK(est_changed);
}

TEST_CASE("training failures") {
  TrainingData d = tiny_data();
  d.synthetic[0].noisy.values()[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig c = tiny_config();
  c.batch_size = 6;
  c.augment = false;
  CHECK_THROWS_AS(train(d, c), TrainingError);

  TrainingData missing = tiny_data();
  missing.synthetic[2].sigma.reset();
  CHECK_THROWS_AS(train(missing, c), IngestionError);

  CHECK_THROWS_AS(train(TrainingData{}, c), IngestionError);

  TrainingData small = tiny_data(3, 6);
  CHECK_THROWS_AS(train(small, tiny_config()), IngestionError);
}

TEST_CASE("validation split and metrics lines") {
  TrainingData d = split_validation(tiny_data(6), 2);
  CHECK(d.synthetic.size() == 4);
  CHECK(d.validation.size() == 2);
  CHECK_THROWS_AS(split_validation(tiny_data(2), 2), ArgumentError);

  const TrainResult r = train(d, tiny_config());
  for (const EpochMetrics& m : r.epochs) CHECK(std::isfinite(m.val_psnr));

  EpochMetrics m;
  m.epoch = 3;
  m.total = 0.5;
  m.val_psnr = std::numeric_limits<double>::quiet_NaN();
  CHECK(format_metrics_line(m) == "3\t0.5\t0\t0\t0\tnan");
}

TEST_CASE("resuming requires a matching network") {
  Rng rng = make_rng(4);
  const ModelWeights other = init_model(NetworkConfig::compact(), rng);
  CHECK_THROWS_AS(train(tiny_data(), tiny_config(), other), IncompatibilityError);
}
