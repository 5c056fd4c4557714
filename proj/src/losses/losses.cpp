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

#include "cbd/losses.hpp"

#include <iostream>

#include "cbd/error.hpp"
#include "cbd/ops.hpp"

namespace cbd {

void LossWeights::validate() const {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ArgumentError("alpha must lie in (0, 0.5]");
  if (!(lambda_asymm >= 0.0) || !(lambda_tv >= 0.0))
    throw ArgumentError("loss weights must be non-negative");
}

Tensor asymmetric_loss(const Tensor& sigma_hat, const Tensor& sigma, double alpha) {
  if (sigma_hat.dims() != sigma.dims())
    throw ShapeError("asymmetric_loss: " + shape_string(sigma_hat.dims()) + " vs " +
                     shape_string(sigma.dims()));
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const std::size_t n = sigma_hat.size();
  if (n == 0) throw ShapeError("asymmetric_loss on an empty map");
  auto est = sigma_hat.values();
  auto ref = sigma.values();
  std::vector<double> weight(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = est[i] - ref[i];
    weight[i] = d < 0.0 ? 1.0 - alpha : alpha;
    acc += weight[i] * d * d;
  }
  const double inv = 1.0 / static_cast<double>(n);
  Tensor out = Tensor::scalar(acc * inv);
  record_op({sigma_hat}, out, [sigma_hat, sigma, weight = std::move(weight), inv](
                                  std::span<const double> gout) {
    auto g = Tensor(sigma_hat).grad_buffer();
    auto est = sigma_hat.values();
    auto ref = sigma.values();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += gout[0] * 2.0 * weight[i] * (est[i] - ref[i]) * inv;
  });
  return out;
}

Tensor tv_loss(const Tensor& sigma_hat) {
  if (sigma_hat.rank() != 4) throw ShapeError("tv_loss expects an N x C x H x W map");
  const int planes = sigma_hat.dim(0) * sigma_hat.dim(1);
  const int h = sigma_hat.dim(2), w = sigma_hat.dim(3);
  const std::size_t count_h = static_cast<std::size_t>(planes) * h * (w - 1);
  const std::size_t count_v = static_cast<std::size_t>(planes) * (h - 1) * w;
  if (count_h == 0 && count_v == 0) {
    std::cerr << "warning: tv_loss on a map without neighbouring pixels; returning 0\n";
  }
  const double inv_h = count_h ? 1.0 / static_cast<double>(count_h) : 0.0;
  const double inv_v = count_v ? 1.0 / static_cast<double>(count_v) : 0.0;
  auto s = sigma_hat.values();
  double acc_h = 0.0, acc_v = 0.0;
  for (int p = 0; p < planes; ++p) {
    const double* m = s.data() + static_cast<std::size_t>(p) * h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) {
          const double d = m[y * w + x + 1] - m[y * w + x];
          acc_h += d * d;
        }
        if (y + 1 < h) {
          const double d = m[(y + 1) * w + x] - m[y * w + x];
          acc_v += d * d;
        }
      }
  }
  Tensor out = Tensor::scalar(acc_h * inv_h + acc_v * inv_v);
  record_op({sigma_hat}, out, [=](std::span<const double> gout) {
    auto g = Tensor(sigma_hat).grad_buffer();
    auto s = sigma_hat.values();
    const double ch = 2.0 * gout[0] * inv_h, cv = 2.0 * gout[0] * inv_v;
    for (int p = 0; p < planes; ++p) {
      const std::size_t base = static_cast<std::size_t>(p) * h * w;
      const double* m = s.data() + base;
      double* gm = g.data() + base;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (x + 1 < w) {
            const double d = m[y * w + x + 1] - m[y * w + x];
            gm[y * w + x + 1] += ch * d;
            gm[y * w + x] -= ch * d;
          }
          if (y + 1 < h) {
            const double d = m[(y + 1) * w + x] - m[y * w + x];
            gm[(y + 1) * w + x] += cv * d;
            gm[y * w + x] -= cv * d;
          }
        }
    }
  });
  return out;
}

Tensor rec_loss(const Tensor& x_hat, const Tensor& x) {
  if (x_hat.dims() != x.dims())
    throw ShapeError("rec_loss: " + shape_string(x_hat.dims()) + " vs " + shape_string(x.dims()));
  return mean(square(sub(x_hat, x)));
}

LossTerms total_loss(const Tensor& x_hat, const Tensor& x, const Tensor& sigma_hat,
                     const std::optional<Tensor>& sigma, const LossWeights& w, BatchKind mode) {
  LossTerms terms;
  const Tensor rec = rec_loss(x_hat, x);
  const Tensor tv = tv_loss(sigma_hat);
  terms.rec = rec.item();
  terms.tv = tv.item();
  Tensor total = rec;
  if (mode == BatchKind::synthetic) {
    if (!sigma || !sigma->defined())
      throw ArgumentError("synthetic batches need a ground-truth noise map");
    const Tensor asymm = asymmetric_loss(sigma_hat, *sigma, w.alpha);
    terms.asymm = asymm.item();
    total = add(total, scale(asymm, w.lambda_asymm));
  }
  total = add(total, scale(tv, w.lambda_tv));
  terms.total = total;
  return terms;
}

}  // namespace cbd
