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

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "cbd/image.hpp"

namespace cbd {

enum class CrfKind { gamma_power, tabulated };
enum class CrfDirection { forward, inverse };

/// Camera response function mapping irradiance in [0,1] to intensity in [0,1].
/// Either f(t) = t^(1/gamma) or a 256-entry monotone table sampled at i/255
/// and linearly interpolated.
class Crf {
 public:
  static constexpr int kTableSize = 256;

  static Crf gamma_power(double exponent);
  /// Throws ValidationError unless the table has 256 strictly increasing
  /// entries starting at 0 and ending at 1.
  static Crf tabulated(std::vector<double> table);
  /// Reads the text format: 256 lines "t f(t)" with t = i/255.
  static Crf load_table(const std::filesystem::path& path);
  void save_table(const std::filesystem::path& path) const;

  CrfKind kind() const { return kind_; }
  double gamma_exponent() const { return gamma_; }
  std::span<const double> table() const { return table_; }

  double forward(double t) const;
  double inverse(double v) const;
  /// df/dt, used for first-order noise propagation.
  double slope(double t) const;

 private:
  Crf() = default;

  CrfKind kind_ = CrfKind::gamma_power;
  double gamma_ = 1.0;
  std::vector<double> table_;
};

/// Elementwise f or f^-1; input and output clamped to [0,1].
Image apply_crf(const Image& x, const Crf& crf, CrfDirection direction);

}  // namespace cbd
