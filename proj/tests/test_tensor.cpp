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

#include "cbd/error.hpp"
#include "cbd/grad_check.hpp"
#include "cbd/ops.hpp"
#include "helpers.hpp"

using namespace cbd;
using cbd::test::random_tensor;

namespace {

Tensor conv_loops(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int cout = w.dim(0), k = w.dim(2);
  const int oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  Tensor out({n, cout, oh, ow});
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < cout; ++o)
      for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx) {
          double acc = b.values()[o];
          for (int c = 0; c < cin; ++c)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int sy = yy * stride - pad + u, sx = xx * stride - pad + v;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                acc += x.values()[((i * cin + c) * h + sy) * wd + sx] *
                       w.values()[((o * cin + c) * k + u) * k + v];
              }
          out.values()[((i * cout + o) * oh + yy) * ow + xx] = acc;
        }
  return out;
}

}  // namespace

TEST_CASE("tensor construction and shape checks") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{1, 1, 1, 1, 1}), ShapeError);
  CHECK_THROWS_AS(Tensor({3}).item(), ShapeError);
  Tensor d = t.detach();
  CHECK_FALSE(d.same_storage(t));
  CHECK_THROWS_AS(t.grad(), StateError);
}

TEST_CASE("conv2d identity kernel and sum of ones") {
  PrecisionScope wide(Precision::wide);
  Rng rng = make_rng(1);
  const Tensor x = random_tensor({1, 1, 4, 4}, rng);
  const Tensor y = conv2d(x, Tensor({1, 1, 1, 1}, 1.0), Tensor({1}, 0.0));
  CHECK(test::to_vector(y.values()) == test::to_vector(x.values()));

  const Tensor s = conv2d(Tensor({1, 1, 3, 3}, 1.0), Tensor({1, 1, 3, 3}, 1.0), Tensor({1}, 0.0));
  CHECK(s.dims() == Shape{1, 1, 1, 1});
  CHECK(s.item() == 9.0);
}

TEST_CASE("conv2d matches the loop oracle") {
  PrecisionScope wide(Precision::wide);
  Rng rng = make_rng(2);
  const Tensor x = random_tensor({1, 2, 5, 5}, rng);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  const Tensor got = conv2d(x, w, b, {2, 1, PadMode::zero});
  const Tensor want = conv_loops(x, w, b, 2, 1);
  REQUIRE(got.dims() == want.dims());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-12));
}

TEST_CASE("conv2d shape law over random parameter tuples") {
  Rng rng = make_rng(3);
  std::uniform_int_distribution<int> hd(1, 12), kd(0, 2), sd(1, 3), pd(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = hd(rng), w = hd(rng), k = 2 * kd(rng) + 1, s = sd(rng), p = pd(rng);
    const Tensor x({1, 1, h, w}, 0.5);
    const Tensor weight({2, 1, k, k}, 1.0);
    if (h + 2 * p < k || w + 2 * p < k) {
      CHECK_THROWS_AS(conv2d(x, weight, Tensor({2}), {s, p}), ShapeError);
      continue;
    }
    const Tensor y = conv2d(x, weight, Tensor({2}), {s, p});
    CHECK(y.dim(2) == (h + 2 * p - k) / s + 1);
    CHECK(y.dim(3) == (w + 2 * p - k) / s + 1);
  }
}

TEST_CASE("conv2d argument validation") {
  const Tensor x({1, 2, 5, 5});
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 3, 3, 3}), Tensor({1})), ShapeError);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 2, 3, 3}), Tensor({1}), {0, 1}), ArgumentError);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 2, 2, 2}), Tensor({1})), ShapeError);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 2, 3, 3}), Tensor({1}), {1, 5, PadMode::reflect}), ArgumentError);
}

TEST_CASE("reflect padding mirrors without repeating the edge") {
  PrecisionScope wide(Precision::wide);
  Tensor x({1, 1, 3, 4});
  for (int i = 0; i < 12; ++i) x.values()[i] = 1 + i % 4;
  Tensor k({1, 1, 3, 3}, 0.0);
  k.values()[3] = 1.0;  // left tap of the middle row
  const Tensor y = conv2d(x, k, Tensor({1}), {1, 1, PadMode::reflect});
  // Left neighbour of column 0 is column 1 under reflection.
  for (int r = 0; r < 3; ++r)
    CHECK(std::vector<double>(y.values().begin() + 4 * r, y.values().begin() + 4 * r + 4) ==
          std::vector<double>{2, 1, 2, 3});
  const Tensor p = reflect_pad2d(Tensor({1, 1, 2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}), 1, 0, 2, 1);
  CHECK(p.dims() == Shape{1, 1, 3, 6});
  CHECK(test::to_vector(p.values()) ==
        std::vector<double>{6, 5, 4, 5, 6, 5, 3, 2, 1, 2, 3, 2, 6, 5, 4, 5, 6, 5});
}

TEST_CASE("conv_transpose2d examples and adjointness") {
  PrecisionScope wide(Precision::wide);
  const Tensor one = conv_transpose2d(Tensor({1, 1, 1, 1}, 1.0), Tensor({1, 1, 1, 1}, 1.0), Tensor({1}));
  CHECK(one.item() == 1.0);
  const Tensor up = conv_transpose2d(Tensor({1, 1, 2, 2}, 1.0), Tensor({1, 1, 3, 3}, 1.0), Tensor({1}),
                                     {2, 1, 0});
  CHECK(up.dims() == Shape{1, 1, 3, 3});
  const Tensor up2 = conv_transpose2d(Tensor({1, 1, 2, 2}, 1.0), Tensor({1, 1, 3, 3}, 1.0), Tensor({1}),
                                      {2, 1, 1});
  CHECK(up2.dims() == Shape{1, 1, 4, 4});

  Rng rng = make_rng(4);
  for (auto [stride, pad, extra] : {std::tuple{1, 1, 0}, std::tuple{2, 1, 1}, std::tuple{2, 0, 1}}) {
    const Tensor x = random_tensor({2, 3, 8, 8}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3}, rng);
    const Tensor y = conv2d(x, w, Tensor({4}), {stride, pad});
    const Tensor r = random_tensor(y.dims(), rng);
    const Tensor xt = conv_transpose2d(r, w, Tensor({3}), {stride, pad, extra});
    REQUIRE(xt.dims() == x.dims());
    const double lhs = test::dot(y.values(), r.values());
    const double rhs = test::dot(x.values(), xt.values());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
  }
}

TEST_CASE("relu values and subgradient") {
  const Tensor y = relu(Tensor({3}, std::vector<double>{-1, 0, 2}));
  CHECK(test::to_vector(y.values()) == std::vector<double>{0, 0, 2});
  const Tensor neg = relu(Tensor({4}, -3.0));
  for (double v : neg.values()) CHECK(v == 0.0);

  Tensor x({3}, std::vector<double>{-1, 2, 0});
  x.set_requires_grad();
  Graph g;
  g.backward(sum(relu(x)));
  CHECK(test::to_vector(x.grad()) == std::vector<double>{0, 1, 0});
}

TEST_CASE("concat_channels layout, identity and gradient") {
  Rng rng = make_rng(5);
  Tensor a = random_tensor({1, 3, 2, 2}, rng);
  Tensor b = random_tensor({1, 3, 2, 2}, rng);
  const Tensor c = concat_channels(a, b);
  CHECK(c.dims() == Shape{1, 6, 2, 2});
  for (int i = 0; i < 12; ++i) CHECK(c.values()[i] == a.values()[i]);
  for (int i = 0; i < 12; ++i) CHECK(c.values()[12 + i] == b.values()[i]);

  const Tensor e = concat_channels(a, Tensor({1, 0, 2, 2}));
  CHECK(test::to_vector(e.values()) == test::to_vector(a.values()));
  CHECK_THROWS_AS(concat_channels(a, Tensor({1, 1, 3, 2})), ShapeError);

  a.set_requires_grad();
  b.set_requires_grad();
  Graph g;
  g.backward(sum(concat_channels(a, b)));
  for (double v : a.grad()) CHECK(v == 1.0);
  for (double v : b.grad()) CHECK(v == 1.0);
}

TEST_CASE("elementwise ops") {
  const Tensor a({2}, std::vector<double>{1, 2}), b({2}, std::vector<double>{3, 4});
  CHECK(test::to_vector(add(a, b).values()) == std::vector<double>{4, 6});
  CHECK(test::to_vector(sub(a, b).values()) == std::vector<double>{-2, -2});
  CHECK(test::to_vector(square(Tensor({2}, std::vector<double>{-2, 3})).values()) ==
        std::vector<double>{4, 9});
  CHECK(test::to_vector(scale(a, 0.5).values()) == std::vector<double>{0.5, 1});
  CHECK_THROWS_AS(add(a, Tensor({3})), ShapeError);

  Tensor x({2}, std::vector<double>{1, 2});
  x.set_requires_grad();
  Graph g;
  g.backward(sum(mul(x, b)));
  CHECK(test::to_vector(x.grad()) == test::to_vector(b.values()));
}

TEST_CASE("backward examples, accumulation and lifecycle") {
  Tensor x({3}, std::vector<double>{1, 2, 3});
  x.set_requires_grad();
  {
    Graph g;
    g.backward(sum(x));
    CHECK(test::to_vector(x.grad()) == std::vector<double>{1, 1, 1});
    CHECK(g.consumed());
    CHECK_THROWS_AS(g.backward(sum(x)), StateError);
  }
  {
    Graph g;
    g.backward(sum(x));
    CHECK(test::to_vector(x.grad()) == std::vector<double>{2, 2, 2});
  }
  x.zero_grad();
  Tensor y({2}, std::vector<double>{1, -2});
  y.set_requires_grad();
  {
    Graph g;
    g.backward(sum(square(y)));
    CHECK(test::to_vector(y.grad()) == std::vector<double>{2, -4});
  }
  {
    Graph g;
    CHECK_THROWS_AS(g.backward(square(y)), ArgumentError);
  }
}

TEST_CASE("detached tensors are untouched by backward") {
  Tensor x({2}, 1.0);
  x.set_requires_grad();
  const Tensor frozen = x.detach();
  Graph g;
  g.backward(sum(mul(x, frozen)));
  CHECK_FALSE(frozen.has_grad());
  CHECK(x.has_grad());
}

TEST_CASE("grad_check examples") {
  Rng rng = make_rng(6);
  const Tensor x = random_tensor({2, 3, 4}, rng);
  CHECK(grad_check([](const Tensor& t) { return sum(t); }, x) <= 1e-10);
  CHECK(grad_check([](const Tensor& t) { return sum(square(t)); }, x) <= 1e-7);
  CHECK_THROWS_AS(grad_check([](const Tensor& t) { return square(t); }, x), ArgumentError);
}

TEST_CASE("gradient soundness of every op on random inputs") {
  Rng rng = make_rng(7);
  const Tensor x = random_tensor({2, 4, 8, 8}, rng);
  SUBCASE("conv2d, both pad modes") {
    const Tensor w = random_tensor({3, 4, 3, 3}, rng), b = random_tensor({3}, rng);
    for (PadMode m : {PadMode::zero, PadMode::reflect})
      for (int s : {1, 2}) {
        const Tensor r = random_tensor(conv2d(x, w, b, {s, 1, m}).dims(), rng);
        CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv2d(t, w, b, {s, 1, m}), r)); }, x) <= 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv2d(x, t, b, {s, 1, m}), r)); }, w) <= 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv2d(x, w, t, {s, 1, m}), r)); }, b) <= 1e-4);
      }
  }
  SUBCASE("conv_transpose2d") {
    const Tensor w = random_tensor({4, 2, 3, 3}, rng), b = random_tensor({2}, rng);
    const ConvTranspose2dOptions o{2, 1, 1};
    const Tensor r = random_tensor(conv_transpose2d(x, w, b, o).dims(), rng);
    CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv_transpose2d(t, w, b, o), r)); }, x) <= 1e-4);
    CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv_transpose2d(x, t, b, o), r)); }, w) <= 1e-4);
    CHECK(grad_check([&](const Tensor& t) { return sum(mul(conv_transpose2d(x, w, t, o), r)); }, b) <= 1e-4);
  }
  SUBCASE("pad, crop and arithmetic") {
    const Tensor r = random_tensor({2, 4, 11, 10}, rng);
    CHECK(grad_check([&](const Tensor& t) { return sum(mul(reflect_pad2d(t, 1, 2, 0, 2), r)); }, x) <= 1e-4);
    const Tensor rc = random_tensor({2, 4, 5, 3}, rng);
    CHECK(grad_check([&](const Tensor& t) { return sum(mul(crop2d(t, 2, 1, 5, 3), rc)); }, x) <= 1e-4);
    const Tensor y = random_tensor(x.dims(), rng);
    CHECK(grad_check([&](const Tensor& t) { return mean(square(sub(scale(t, 1.5), add(y, t)))); }, x) <= 1e-4);
  }
  SUBCASE("conv -> relu -> sum composite") {
    const Tensor w = random_tensor({3, 4, 3, 3}, rng), b = random_tensor({3}, rng);
    CHECK(grad_check([&](const Tensor& t) { return sum(relu(conv2d(t, w, b, {1, 1, PadMode::reflect}))); }, x) <= 1e-4);
  }
}

TEST_CASE("fast and wide precision agree closely and each is deterministic") {
  Rng rng = make_rng(8);
  const Tensor x = random_tensor({2, 4, 9, 9}, rng), w = random_tensor({5, 4, 3, 3}, rng);
  const Tensor b = random_tensor({5}, rng);
  Tensor fast1, fast2, wide;
  {
    PrecisionScope s(Precision::fast);
    fast1 = conv2d(x, w, b, {1, 1});
    fast2 = conv2d(x, w, b, {1, 1});
  }
  {
    PrecisionScope s(Precision::wide);
    wide = conv2d(x, w, b, {1, 1});
  }
  CHECK(test::to_vector(fast1.values()) == test::to_vector(fast2.values()));
  for (std::size_t i = 0; i < wide.size(); ++i) CHECK(std::abs(fast1.values()[i] - wide.values()[i]) < 1e-5);
}
