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

#include "cbd/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cbd/error.hpp"

namespace cbd {

Crf Crf::gamma_power(double exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw ArgumentError("CRF gamma exponent must be positive");
  Crf crf;
  crf.kind_ = CrfKind::gamma_power;
  crf.gamma_ = exponent;
  return crf;
}

Crf Crf::tabulated(std::vector<double> table) {
  if (table.size() != kTableSize)
    throw ValidationError("CRF table must have 256 entries, got " + std::to_string(table.size()));
  if (std::abs(table.front()) > 1e-6 || std::abs(table.back() - 1.0) > 1e-6)
    throw ValidationError("CRF table must start at 0 and end at 1");
  for (std::size_t i = 1; i < table.size(); ++i)
    if (!(table[i] > table[i - 1]))
      throw ValidationError("CRF table is not strictly increasing at entry " + std::to_string(i));
  table.front() = 0.0;
  table.back() = 1.0;
  Crf crf;
  crf.kind_ = CrfKind::tabulated;
  crf.table_ = std::move(table);
  return crf;
}

Crf Crf::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CRF table " + path.string());
  std::vector<double> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double t = 0.0, f = 0.0;
    if (!(row >> t >> f))
      throw ValidationError("malformed CRF line " + std::to_string(table.size() + 1));
    const double expected = static_cast<double>(table.size()) / (kTableSize - 1);
    if (std::abs(t - expected) > 1e-4)
      throw ValidationError("CRF line " + std::to_string(table.size() + 1) +
                            " has t = " + std::to_string(t) + ", expected i/255");
    table.push_back(f);
  }
  return tabulated(std::move(table));
}

void Crf::save_table(const std::filesystem::path& path) const {
  std::ofstream out(path);
  out << std::setprecision(10);
  for (int i = 0; i < kTableSize; ++i) {
    const double t = static_cast<double>(i) / (kTableSize - 1);
    out << t << ' ' << forward(t) << '\n';
  }
}

double Crf::forward(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  if (kind_ == CrfKind::gamma_power) return std::pow(t, 1.0 / gamma_);
  const double pos = t * (kTableSize - 1);
  const int i = std::min(static_cast<int>(pos), kTableSize - 2);
  const double frac = pos - i;
  return table_[i] + frac * (table_[i + 1] - table_[i]);
}

double Crf::inverse(double v) const {
  v = std::clamp(v, 0.0, 1.0);
  if (kind_ == CrfKind::gamma_power) return std::pow(v, gamma_);
  const auto it = std::upper_bound(table_.begin(), table_.end(), v);
  const int i = std::clamp(static_cast<int>(it - table_.begin()) - 1, 0, kTableSize - 2);
  const double frac = (v - table_[i]) / (table_[i + 1] - table_[i]);
  return (i + std::clamp(frac, 0.0, 1.0)) / (kTableSize - 1);
}

double Crf::slope(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  if (kind_ == CrfKind::gamma_power) {
    if (gamma_ == 1.0) return 1.0;
    // Unbounded at t = 0 for gamma > 1; evaluate just inside the domain.
    const double tt = std::max(t, 1e-6);
    return std::pow(tt, 1.0 / gamma_ - 1.0) / gamma_;
  }
  const int i = std::min(static_cast<int>(t * (kTableSize - 1)), kTableSize - 2);
  return (table_[i + 1] - table_[i]) * (kTableSize - 1);
}

Image apply_crf(const Image& x, const Crf& crf, CrfDirection direction) {
  Image out(x.height(), x.width(), x.channels());
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = direction == CrfDirection::forward ? crf.forward(src[i]) : crf.inverse(src[i]);
    dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace cbd
