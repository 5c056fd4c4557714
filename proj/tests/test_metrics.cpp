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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbd/ablation.hpp"
#include "cbd/error.hpp"
#include "cbd/metrics.hpp"
#include "helpers.hpp"

using namespace cbd;
using cbd::test::random_image;
namespace fs = std::filesystem;

namespace {

// Direct per-window SSIM, no separable filtering.
double ssim_direct(const Image& a, const Image& b) {
  const int r = 5;
  double g[11][11], gsum = 0.0;
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j) gsum += g[i + r][j + r] = std::exp(-(i * i + j * j) / (2 * 1.5 * 1.5));
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double acc = 0.0;
  int n = 0;
  for (int c = 0; c < a.channels(); ++c)
    for (int y = r; y < a.height() - r; ++y)
      for (int x = r; x < a.width() - r; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = -r; i <= r; ++i)
          for (int j = -r; j <= r; ++j) {
            const double w = g[i + r][j + r] / gsum;
            const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        acc += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++n;
      }
  return acc / n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("psnr") {
  Rng rng = make_rng(1);
  const Image a = random_image(8, 8, 3, rng);
  CHECK(psnr(a, a) == kPsnrIdentical);
  Image b = a;
  for (float& v : b.values()) v += 0.1f;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));
  CHECK(psnr(Image(2, 2, 1, 0.0f), Image(2, 2, 1, 1.0f)) == 0.0);
  CHECK_THROWS_AS(psnr(a, Image(8, 7, 3)), ShapeError);
}

TEST_CASE("psnr of additive gaussian noise") {
  // MSE ~ 0.05^2, so about 20 log10(1 / 0.05) = 26.02 dB.
  Rng rng = make_rng(8);
  Image a(1000, 1000, 1, 0.5f);
  Image b = a;
  std::normal_distribution<double> n(0.0, 0.05);
  for (float& v : b.values()) v = static_cast<float>(v + n(rng));
  CHECK(std::abs(psnr(a, b) - 26.02) <= 0.1);
}

TEST_CASE("ssim matches the direct formula") {
  Rng rng = make_rng(2);
  const Image a = random_image(20, 23, 3, rng);
  Image b = a;
  std::normal_distribution<float> n(0.0f, 0.05f);
  for (float& v : b.values()) v += n(rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ssim(a, b) - ssim_direct(a, b)) <= 1e-9);
  CHECK(ssim(a, b) < 1.0);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));

  const Image c = random_image(16, 16, 3, rng), d = random_image(16, 16, 3, rng);
  CHECK(std::abs(ssim(c, d) - ssim_direct(c, d)) <= 1e-6);
}

TEST_CASE("total variation") {
  CHECK(total_variation(Image(4, 4, 3, 0.5f)) == 0.0);
  Image stripes(2, 2, 1);
  stripes.at(0, 1) = 1.0f;
  stripes.at(1, 1) = 1.0f;
  CHECK(total_variation(stripes) == doctest::Approx(0.5));
  Rng rng = make_rng(3);
  const Image r = random_image(6, 6, 3, rng);
  CHECK(total_variation(r) > 0.0);
}

TEST_CASE("evaluation reports") {
  Rng rng = make_rng(4);
  NetworkConfig net = NetworkConfig::compact();
  const ModelWeights w = init_model(net, rng);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 3; ++i) {
    const Image clean = random_image(16, 16, 3, rng);
    pairs.push_back({"img" + std::to_string(i), clean, clean});
  }
  EvalReport r = evaluate_model(w, pairs, "HG+ISP", "HG");
  REQUIRE(r.images.size() == 3);
  for (const ImageScore& s : r.images) {
    CHECK(s.psnr_noisy == kPsnrIdentical);
    CHECK(s.ssim_noisy == doctest::Approx(1.0));
  }
  CHECK(r.mean_psnr_noisy == kPsnrIdentical);

  const fs::path dir = fs::temp_directory_path() / "cbd_metrics_test";
  fs::create_directories(dir);
  write_report(r, dir / "report.tsv");
  const std::string text = slurp(dir / "report.tsv");
  CHECK(text.starts_with("image\tlabel\ttest_set\tpsnr_noisy\tssim_noisy\tpsnr\tssim\n"));
  CHECK(text.find("img1\tHG+ISP\tHG\t100.0000") != std::string::npos);

  r.config_hash = "abc";
  write_summary({r, r}, dir / "summary.tsv");
  const std::string summary = slurp(dir / "summary.tsv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
  CHECK(summary.find("\tabc\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("ablation budget text and hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  const AblationBudget d = AblationBudget::desk();
  CHECK(d.hash().size() == 16);
  CHECK(AblationBudget::parse(d.to_text()).hash() == d.hash());
  const AblationBudget b = AblationBudget::parse("train_images = 10\ntrain_epochs = 3\nseed = 9\n");
  CHECK(b.train_images == 10);
  CHECK(b.train.epochs == 3);
  CHECK(b.seed == 9);
  CHECK(b.hash() != d.hash());
  CHECK_THROWS_AS(AblationBudget::parse("budget = 3\n"), ValidationError);
  CHECK_THROWS_AS(AblationBudget::parse("train_images = x\n"), ValidationError);
  CHECK_THROWS_AS(AblationBudget::parse("image_size = 32\n"), ValidationError);
}

TEST_CASE("ablation variants share one budget") {
  AblationBudget b;
  b.train_images = 4;
  b.test_images = 2;
  b.image_size = 16;
  b.synthesis.gt_mode = GtMode::raw_propagate;
  b.train = TrainConfig::parse("patch_size = 8\nbatch_size = 2\nepochs = 2\nbatches_per_epoch = 1\n"
                               "unet_c0 = 4\nunet_c1 = 6\nunet_c2 = 8\n");
  const auto reports = run_ablation({NoiseModel::gaussian, NoiseModel::hetero},
                                    {NoiseModel::hetero_isp}, b);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].label == "G");
  CHECK(reports[1].label == "HG");
  CHECK(reports[0].test_label == "HG+ISP");
  CHECK(reports[0].config_hash == reports[1].config_hash);
  CHECK(reports[0].images.size() == 2);
  // Same test images for every variant.
  CHECK(reports[0].mean_psnr_noisy == reports[1].mean_psnr_noisy);
}
