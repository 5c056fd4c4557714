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

#include "cbd/tensor.hpp"

namespace cbd {

enum class PadMode { zero, reflect };

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;
  PadMode pad_mode = PadMode::zero;
};

/// Cross-correlation (no kernel flip) of an N x Cin x H x W input with a
/// Cout x Cin x k x k filter bank. Output extent floor((H + 2p - k)/s) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& opts = {});

struct ConvTranspose2dOptions {
  int stride = 1;
  int padding = 0;
  /// Extra rows/cols on the bottom/right edge; lets a stride-2 transpose conv
  /// exactly invert the extent of an even-sized stride-2 conv. Must be < stride.
  int output_padding = 0;
};

/// Adjoint of conv2d with the same stride/padding. Weight layout is
/// Cin x Cout x k x k. Output extent (H - 1)s - 2p + k + output_padding.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        const ConvTranspose2dOptions& opts = {});

Tensor relu(const Tensor& x);

/// Stacks channels of `a` before channels of `b`; N, H, W must agree.
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor square(const Tensor& a);
Tensor scale(const Tensor& a, double factor);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Mirror padding (edge sample not repeated) of the two spatial axes.
Tensor reflect_pad2d(const Tensor& x, int top, int bottom, int left, int right);

/// Spatial window [y0, y0 + h) x [x0, x0 + w) of an N x C x H x W tensor.
Tensor crop2d(const Tensor& x, int y0, int x0, int h, int w);

}  // namespace cbd
