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

#include "cbd/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <numeric>

#include "cbd/error.hpp"

namespace cbd {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_rank(const Tensor& t, int rank, const char* what) {
  if (!t.defined() || t.rank() != rank)
    throw ShapeError(std::string(what) + " must have rank " + std::to_string(rank) +
                     (t.defined() ? ", got " + shape_string(t.dims()) : ""));
}

void require_same_dims(const Tensor& a, const Tensor& b, const char* what) {
  if (a.dims() != b.dims())
    throw ShapeError(std::string(what) + ": dims " + shape_string(a.dims()) + " vs " +
                     shape_string(b.dims()));
}

int reflect_index(int i, int n) {
  // Mirror without repeating the edge sample; valid for |overhang| < n.
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

/// Source coordinate for each sampled coordinate `lo + t` of a strided
/// window sweep; -1 means a zero pad sample.
std::vector<int> axis_map(int lo, int count, int extent, PadMode mode) {
  std::vector<int> map(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    const int i = lo + t;
    if (i >= 0 && i < extent)
      map[t] = i;
    else
      map[t] = mode == PadMode::reflect ? reflect_index(i, extent) : -1;
  }
  return map;
}

/// Window geometry shared by conv2d (image -> columns) and the transpose
/// direction (columns -> image).
struct Geometry {
  int n, channels, height, width;  // image side
  int k, stride, padding;
  int out_h, out_w;                // window grid
  std::vector<int> row_map, col_map;

  Geometry(int n_, int c_, int h_, int w_, int k_, int s_, int p_, int oh, int ow,
           PadMode mode)
      : n(n_), channels(c_), height(h_), width(w_), k(k_), stride(s_), padding(p_),
        out_h(oh), out_w(ow) {
    row_map = axis_map(-p_, (oh - 1) * s_ + k_, h_, mode);
    col_map = axis_map(-p_, (ow - 1) * s_ + k_, w_, mode);
  }

  int patch_rows() const { return channels * k * k; }
  int patch_cols() const { return n * out_h * out_w; }
};

template <typename T>
void im2col(const Geometry& g, std::span<const double> image, RowMatrix<T>& cols) {
  cols.resize(g.patch_rows(), g.patch_cols());
  const int plane = g.height * g.width;
  const int out_plane = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        T* row = cols.data() + static_cast<std::ptrdiff_t>((c * g.k + ki) * g.k + kj) *
                                   g.patch_cols();
        for (int b = 0; b < g.n; ++b) {
          const double* src = image.data() + static_cast<std::ptrdiff_t>(b * g.channels + c) * plane;
          T* dst = row + static_cast<std::ptrdiff_t>(b) * out_plane;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int sy = g.row_map[oy * g.stride + ki];
            if (sy < 0) {
              std::fill(dst + oy * g.out_w, dst + (oy + 1) * g.out_w, T(0));
              continue;
            }
            const double* src_row = src + sy * g.width;
            for (int ox = 0; ox < g.out_w; ++ox) {
              const int sx = g.col_map[ox * g.stride + kj];
              dst[oy * g.out_w + ox] = sx < 0 ? T(0) : static_cast<T>(src_row[sx]);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const Geometry& g, const RowMatrix<T>& cols, std::span<double> image) {
  const int plane = g.height * g.width;
  const int out_plane = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        const T* row = cols.data() + static_cast<std::ptrdiff_t>((c * g.k + ki) * g.k + kj) *
                                         g.patch_cols();
        for (int b = 0; b < g.n; ++b) {
          double* dst = image.data() + static_cast<std::ptrdiff_t>(b * g.channels + c) * plane;
          const T* src = row + static_cast<std::ptrdiff_t>(b) * out_plane;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int sy = g.row_map[oy * g.stride + ki];
            if (sy < 0) continue;
            double* dst_row = dst + sy * g.width;
            for (int ox = 0; ox < g.out_w; ++ox) {
              const int sx = g.col_map[ox * g.stride + kj];
              if (sx >= 0) dst_row[sx] += static_cast<double>(src[oy * g.out_w + ox]);
            }
          }
        }
      }
    }
  }
}

/// Gathers an N x C x P tensor into a C x (N*P) matrix.
template <typename T>
void channels_major(std::span<const double> x, int n, int c, int plane, RowMatrix<T>& m) {
  m.resize(c, static_cast<Eigen::Index>(n) * plane);
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const double* src = x.data() + static_cast<std::ptrdiff_t>(b * c + ch) * plane;
      T* dst = m.data() + static_cast<std::ptrdiff_t>(ch) * m.cols() +
               static_cast<std::ptrdiff_t>(b) * plane;
      for (int i = 0; i < plane; ++i) dst[i] = static_cast<T>(src[i]);
    }
}

/// Scatters (adds) a C x (N*P) matrix into an N x C x P tensor.
template <typename T>
void add_batch_major(const RowMatrix<T>& m, int n, int c, int plane, std::span<double> x) {
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      double* dst = x.data() + static_cast<std::ptrdiff_t>(b * c + ch) * plane;
      const T* src = m.data() + static_cast<std::ptrdiff_t>(ch) * m.cols() +
                     static_cast<std::ptrdiff_t>(b) * plane;
      for (int i = 0; i < plane; ++i) dst[i] += static_cast<double>(src[i]);
    }
}

template <typename T>
RowMatrix<T> as_matrix(std::span<const double> v, int rows, int cols) {
  RowMatrix<T> m(rows, cols);
  for (std::size_t i = 0; i < v.size(); ++i) m.data()[i] = static_cast<T>(v[i]);
  return m;
}

template <typename T>
void add_into(const RowMatrix<T>& m, std::span<double> dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += static_cast<double>(m.data()[i]);
}

void add_bias(std::span<double> out, std::span<const double> bias, int n, int c, int plane) {
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      double* dst = out.data() + static_cast<std::ptrdiff_t>(b * c + ch) * plane;
      const double v = bias[ch];
      for (int i = 0; i < plane; ++i) dst[i] += v;
    }
}

void bias_grad(std::span<const double> gout, std::span<double> gbias, int n, int c, int plane) {
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const double* src = gout.data() + static_cast<std::ptrdiff_t>(b * c + ch) * plane;
      double acc = 0.0;
      for (int i = 0; i < plane; ++i) acc += src[i];
      gbias[ch] += acc;
    }
}

// conv2d kernels -------------------------------------------------------------

template <typename T>
void conv2d_forward(const Geometry& g, std::span<const double> x, std::span<const double> w,
                    int cout, std::span<double> out) {
  RowMatrix<T> cols;
  im2col<T>(g, x, cols);
  const RowMatrix<T> wm = as_matrix<T>(w, cout, g.patch_rows());
  const RowMatrix<T> y = wm * cols;
  add_batch_major<T>(y, g.n, cout, g.out_h * g.out_w, out);
}

template <typename T>
void conv2d_backward(const Geometry& g, const Tensor& input, const Tensor& weight, int cout,
                     std::span<const double> gout, bool want_x, bool want_w) {
  RowMatrix<T> gm;
  channels_major<T>(gout, g.n, cout, g.out_h * g.out_w, gm);
  if (want_w) {
    RowMatrix<T> cols;
    im2col<T>(g, input.values(), cols);
    const RowMatrix<T> gw = gm * cols.transpose();
    add_into<T>(gw, Tensor(weight).grad_buffer());
  }
  if (want_x) {
    const RowMatrix<T> wm = as_matrix<T>(weight.values(), cout, g.patch_rows());
    const RowMatrix<T> gcols = wm.transpose() * gm;
    col2im<T>(g, gcols, Tensor(input).grad_buffer());
  }
}

// conv_transpose2d kernels: the transpose of conv2d run from the output grid.

template <typename T>
void convt_forward(const Geometry& g, std::span<const double> x, std::span<const double> w,
                   int cin, std::span<double> out) {
  // g describes the *output* image; the window grid is the input grid.
  RowMatrix<T> xm;
  channels_major<T>(x, g.n, cin, g.out_h * g.out_w, xm);
  const RowMatrix<T> wm = as_matrix<T>(w, cin, g.patch_rows());
  const RowMatrix<T> cols = wm.transpose() * xm;
  col2im<T>(g, cols, out);
}

template <typename T>
void convt_backward(const Geometry& g, const Tensor& input, const Tensor& weight, int cin,
                    std::span<const double> gout, bool want_x, bool want_w) {
  RowMatrix<T> gcols;
  im2col<T>(g, gout, gcols);
  if (want_x) {
    const RowMatrix<T> wm = as_matrix<T>(weight.values(), cin, g.patch_rows());
    const RowMatrix<T> gx = wm * gcols;
    add_batch_major<T>(gx, g.n, cin, g.out_h * g.out_w, Tensor(input).grad_buffer());
  }
  if (want_w) {
    RowMatrix<T> xm;
    channels_major<T>(input.values(), g.n, cin, g.out_h * g.out_w, xm);
    const RowMatrix<T> gw = xm * gcols.transpose();
    add_into<T>(gw, Tensor(weight).grad_buffer());
  }
}

template <typename F>
Tensor unary(const Tensor& a, F&& value_fn) {
  Tensor out(a.dims());
  auto src = a.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = value_fn(src[i]);
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& opts) {
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  if (opts.stride <= 0) throw ArgumentError("conv2d stride must be positive");
  if (opts.padding < 0) throw ArgumentError("conv2d padding must be non-negative");
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin)
    throw ShapeError("conv2d: input has " + std::to_string(cin) + " channels, weight expects " +
                     std::to_string(weight.dim(1)));
  if (weight.dim(3) != k || k % 2 == 0) throw ShapeError("conv2d: kernel must be square and odd");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout))
    throw ShapeError("conv2d: bias must have " + std::to_string(cout) + " entries");
  if (h + 2 * opts.padding < k || w + 2 * opts.padding < k)
    throw ShapeError("conv2d: kernel larger than padded input");
  if (opts.pad_mode == PadMode::reflect && (opts.padding >= h || opts.padding >= w))
    throw ArgumentError("conv2d: reflect padding must be smaller than the input extent");

  const int oh = (h + 2 * opts.padding - k) / opts.stride + 1;
  const int ow = (w + 2 * opts.padding - k) / opts.stride + 1;
  const Geometry g(n, cin, h, w, k, opts.stride, opts.padding, oh, ow, opts.pad_mode);

  Tensor out({n, cout, oh, ow});
  if (precision() == Precision::wide)
    conv2d_forward<double>(g, input.values(), weight.values(), cout, out.values());
  else
    conv2d_forward<float>(g, input.values(), weight.values(), cout, out.values());
  if (bias.defined()) add_bias(out.values(), bias.values(), n, cout, oh * ow);

  record_op({input, weight, bias}, out,
            [=](std::span<const double> gout) {
              const bool want_x = tracked(input), want_w = tracked(weight);
              if (want_x || want_w) {
                if (precision() == Precision::wide)
                  conv2d_backward<double>(g, input, weight, cout, gout, want_x, want_w);
                else
                  conv2d_backward<float>(g, input, weight, cout, gout, want_x, want_w);
              }
              if (bias.defined() && tracked(bias))
                bias_grad(gout, Tensor(bias).grad_buffer(), n, cout, oh * ow);
            });
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        const ConvTranspose2dOptions& opts) {
  require_rank(input, 4, "conv_transpose2d input");
  require_rank(weight, 4, "conv_transpose2d weight");
  if (opts.stride <= 0) throw ArgumentError("conv_transpose2d stride must be positive");
  if (opts.padding < 0 || opts.output_padding < 0 || opts.output_padding >= opts.stride)
    throw ArgumentError("conv_transpose2d: invalid padding/output_padding");
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int cout = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != cin)
    throw ShapeError("conv_transpose2d: input has " + std::to_string(cin) +
                     " channels, weight expects " + std::to_string(weight.dim(0)));
  if (weight.dim(3) != k || k % 2 == 0)
    throw ShapeError("conv_transpose2d: kernel must be square and odd");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout))
    throw ShapeError("conv_transpose2d: bias must have " + std::to_string(cout) + " entries");
  const int oh = (h - 1) * opts.stride - 2 * opts.padding + k + opts.output_padding;
  const int ow = (w - 1) * opts.stride - 2 * opts.padding + k + opts.output_padding;
  if (oh <= 0 || ow <= 0) throw ShapeError("conv_transpose2d: non-positive output extent");

  const Geometry g(n, cout, oh, ow, k, opts.stride, opts.padding, h, w, PadMode::zero);

  Tensor out({n, cout, oh, ow});
  if (precision() == Precision::wide)
    convt_forward<double>(g, input.values(), weight.values(), cin, out.values());
  else
    convt_forward<float>(g, input.values(), weight.values(), cin, out.values());
  if (bias.defined()) add_bias(out.values(), bias.values(), n, cout, oh * ow);

  record_op({input, weight, bias}, out,
            [=](std::span<const double> gout) {
              const bool want_x = tracked(input), want_w = tracked(weight);
              if (want_x || want_w) {
                if (precision() == Precision::wide)
                  convt_backward<double>(g, input, weight, cin, gout, want_x, want_w);
                else
                  convt_backward<float>(g, input, weight, cin, gout, want_x, want_w);
              }
              if (bias.defined() && tracked(bias))
                bias_grad(gout, Tensor(bias).grad_buffer(), n, cout, oh * ow);
            });
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = unary(x, [](double v) { return v > 0.0 ? v : 0.0; });
  record_op({x}, out, [x](std::span<const double> gout) {
    auto gx = Tensor(x).grad_buffer();
    auto xv = x.values();
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xv[i] > 0.0) gx[i] += gout[i];
  });
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 4, "concat_channels lhs");
  require_rank(b, 4, "concat_channels rhs");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw ShapeError("concat_channels: " + shape_string(a.dims()) + " vs " +
                     shape_string(b.dims()));
  const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::size_t plane = static_cast<std::size_t>(a.dim(2)) * a.dim(3);
  const std::size_t sa = ca * plane, sb = cb * plane;
  Tensor out({n, ca + cb, a.dim(2), a.dim(3)});
  auto dst = out.values();
  for (int i = 0; i < n; ++i) {
    std::copy_n(a.values().data() + i * sa, sa, dst.data() + i * (sa + sb));
    std::copy_n(b.values().data() + i * sb, sb, dst.data() + i * (sa + sb) + sa);
  }
  record_op({a, b}, out, [=](std::span<const double> gout) {
    for (int i = 0; i < n; ++i) {
      const double* src = gout.data() + i * (sa + sb);
      if (tracked(a)) {
        double* ga = Tensor(a).grad_buffer().data() + i * sa;
        for (std::size_t j = 0; j < sa; ++j) ga[j] += src[j];
      }
      if (tracked(b)) {
        double* gb = Tensor(b).grad_buffer().data() + i * sb;
        for (std::size_t j = 0; j < sb; ++j) gb[j] += src[sa + j];
      }
    }
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "add");
  Tensor out(a.dims());
  auto o = out.values();
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  record_op({a, b}, out, [a, b](std::span<const double> gout) {
    for (const Tensor& t : {a, b})
      if (tracked(t)) {
        auto g = Tensor(t).grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i];
      }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "sub");
  Tensor out(a.dims());
  auto o = out.values();
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
  record_op({a, b}, out, [a, b](std::span<const double> gout) {
    if (tracked(a)) {
      auto g = Tensor(a).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i];
    }
    if (tracked(b)) {
      auto g = Tensor(b).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gout[i];
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "mul");
  Tensor out(a.dims());
  auto o = out.values();
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  record_op({a, b}, out, [a, b](std::span<const double> gout) {
    if (tracked(a)) {
      auto g = Tensor(a).grad_buffer();
      auto bv = b.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i] * bv[i];
    }
    if (tracked(b)) {
      auto g = Tensor(b).grad_buffer();
      auto av = a.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i] * av[i];
    }
  });
  return out;
}

Tensor square(const Tensor& a) {
  Tensor out = unary(a, [](double v) { return v * v; });
  record_op({a}, out, [a](std::span<const double> gout) {
    auto g = Tensor(a).grad_buffer();
    auto av = a.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * av[i] * gout[i];
  });
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = unary(a, [factor](double v) { return v * factor; });
  record_op({a}, out, [a, factor](std::span<const double> gout) {
    auto g = Tensor(a).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * gout[i];
  });
  return out;
}

Tensor sum(const Tensor& a) {
  auto av = a.values();
  Tensor out = Tensor::scalar(std::accumulate(av.begin(), av.end(), 0.0));
  record_op({a}, out, [a](std::span<const double> gout) {
    auto g = Tensor(a).grad_buffer();
    for (double& v : g) v += gout[0];
  });
  return out;
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  const double inv = 1.0 / static_cast<double>(a.size());
  auto av = a.values();
  Tensor out = Tensor::scalar(std::accumulate(av.begin(), av.end(), 0.0) * inv);
  record_op({a}, out, [a, inv](std::span<const double> gout) {
    auto g = Tensor(a).grad_buffer();
    for (double& v : g) v += gout[0] * inv;
  });
  return out;
}

Tensor reflect_pad2d(const Tensor& x, int top, int bottom, int left, int right) {
  require_rank(x, 4, "reflect_pad2d input");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (top < 0 || bottom < 0 || left < 0 || right < 0) throw ArgumentError("negative padding");
  if (std::max(top, bottom) >= h || std::max(left, right) >= w)
    throw ArgumentError("reflect padding must be smaller than the input extent");
  const int oh = h + top + bottom, ow = w + left + right;
  const auto rows = axis_map(-top, oh, h, PadMode::reflect);
  const auto cols = axis_map(-left, ow, w, PadMode::reflect);
  Tensor out({n, c, oh, ow});
  auto src = x.values();
  auto dst = out.values();
  for (int p = 0; p < n * c; ++p)
    for (int y = 0; y < oh; ++y)
      for (int xx = 0; xx < ow; ++xx)
        dst[(static_cast<std::size_t>(p) * oh + y) * ow + xx] =
            src[(static_cast<std::size_t>(p) * h + rows[y]) * w + cols[xx]];
  record_op({x}, out, [=](std::span<const double> gout) {
    auto g = Tensor(x).grad_buffer();
    for (int p = 0; p < n * c; ++p)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
          g[(static_cast<std::size_t>(p) * h + rows[y]) * w + cols[xx]] +=
              gout[(static_cast<std::size_t>(p) * oh + y) * ow + xx];
  });
  return out;
}

Tensor crop2d(const Tensor& x, int y0, int x0, int hh, int ww) {
  require_rank(x, 4, "crop2d input");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (y0 < 0 || x0 < 0 || hh <= 0 || ww <= 0 || y0 + hh > h || x0 + ww > w)
    throw ArgumentError("crop window outside the input");
  Tensor out({n, c, hh, ww});
  auto src = x.values();
  auto dst = out.values();
  for (int p = 0; p < n * c; ++p)
    for (int y = 0; y < hh; ++y)
      std::copy_n(src.data() + (static_cast<std::size_t>(p) * h + y0 + y) * w + x0, ww,
                  dst.data() + (static_cast<std::size_t>(p) * hh + y) * ww);
  record_op({x}, out, [=](std::span<const double> gout) {
    auto g = Tensor(x).grad_buffer();
    for (int p = 0; p < n * c; ++p)
      for (int y = 0; y < hh; ++y)
        for (int xx = 0; xx < ww; ++xx)
          g[(static_cast<std::size_t>(p) * h + y0 + y) * w + x0 + xx] +=
              gout[(static_cast<std::size_t>(p) * hh + y) * ww + xx];
  });
  return out;
}

}  // namespace cbd
