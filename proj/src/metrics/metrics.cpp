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

#include "cbd/metrics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "cbd/error.hpp"

namespace cbd {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

/// Valid-mode separable Gaussian filter of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w) {
  static const auto taps = gaussian_taps();
  const int oh = h - kWindow + 1, ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * plane[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

void require_same(const Image& a, const Image& b, const char* what) {
  if (!a.same_dims(b)) throw ShapeError(std::string(what) + ": image dims differ");
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same(a, b, "psnr");
  if (a.size() == 0) throw ShapeError("psnr of empty images");
  auto av = a.values();
  auto bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
    acc += d * d;
  }
  if (acc == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / (acc / static_cast<double>(av.size())));
}

double ssim(const Image& a, const Image& b) {
  require_same(a, b, "ssim");
  const int h = a.height(), w = a.width();
  if (h < kWindow || w < kWindow) throw ArgumentError("ssim needs images of at least 11x11");
  const std::size_t n = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col) {
        const std::size_t i = static_cast<std::size_t>(r) * w + col;
        x[i] = a.at(r, col, c);
        y[i] = b.at(r, col, c);
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    const auto mx = filter_valid(x, h, w), my = filter_valid(y, h, w);
    const auto sxx = filter_valid(xx, h, w), syy = filter_valid(yy, h, w),
               sxy = filter_valid(xy, h, w);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      acc += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / a.channels();
}

double total_variation(const Image& img) {
  double acc = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        if (x + 1 < img.width()) acc += std::abs(img.at(y, x + 1, c) - img.at(y, x, c));
        if (y + 1 < img.height()) acc += std::abs(img.at(y + 1, x, c) - img.at(y, x, c));
      }
  return acc / (static_cast<double>(img.height()) * img.width());
}

void EvalReport::finalize() {
  mean_psnr_noisy = mean_ssim_noisy = mean_psnr = mean_ssim = 0.0;
  if (images.empty()) return;
  for (const ImageScore& s : images) {
    mean_psnr_noisy += s.psnr_noisy;
    mean_ssim_noisy += s.ssim_noisy;
    mean_psnr += s.psnr;
    mean_ssim += s.ssim;
  }
  const double n = static_cast<double>(images.size());
  mean_psnr_noisy /= n;
  mean_ssim_noisy /= n;
  mean_psnr /= n;
  mean_ssim /= n;
}

EvalReport evaluate_model(const ModelWeights& weights, const std::vector<EvalPair>& pairs,
                          std::string label, std::string test_label) {
  EvalReport report;
  report.label = std::move(label);
  report.test_label = std::move(test_label);
  for (const EvalPair& pair : pairs) {
    const Image out = clamp01(blind_denoise(weights, pair.noisy, 1.0).x_hat);
    report.images.push_back({pair.name, psnr(pair.noisy, pair.clean), ssim(pair.noisy, pair.clean),
                             psnr(out, pair.clean), ssim(out, pair.clean)});
  }
  report.finalize();
  return report;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << std::fixed << std::setprecision(4);
  out << "image\tlabel\ttest_set\tpsnr_noisy\tssim_noisy\tpsnr\tssim\n";
  for (const ImageScore& s : report.images)
    out << s.name << '\t' << report.label << '\t' << report.test_label << '\t' << s.psnr_noisy
        << '\t' << s.ssim_noisy << '\t' << s.psnr << '\t' << s.ssim << '\n';
}

void write_summary(const std::vector<EvalReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary " + path.string());
  out << std::fixed << std::setprecision(4);
  out << "label\ttest_set\tmean_psnr_noisy\tmean_ssim_noisy\tmean_psnr\tmean_ssim\tconfig_hash\n";
  for (const EvalReport& r : reports)
    out << r.label << '\t' << r.test_label << '\t' << r.mean_psnr_noisy << '\t'
        << r.mean_ssim_noisy << '\t' << r.mean_psnr << '\t' << r.mean_ssim << '\t'
        << r.config_hash << '\n';
}

}  // namespace cbd
