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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cbd {

/// Numeric mode for the heavy kernels. `wide` runs every product in double
/// precision and is what gradient checks and oracles use; `fast` runs the
/// convolution products in single precision and keeps parameters representable
/// as float32.
enum class Precision { wide, fast };

void set_precision(Precision p);
Precision precision();

/// Restores the previous precision mode on destruction.
class PrecisionScope {
 public:
  explicit PrecisionScope(Precision p);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  Precision saved_;
};

using Shape = std::vector<int>;

std::size_t shape_volume(const Shape& dims);
std::string shape_string(const Shape& dims);

namespace detail {
struct TensorImpl;
}

/// Dense row-major array taking part in reverse-mode differentiation.
///
/// A Tensor is a handle: copies share storage, which is what lets the graph
/// route gradients back to parameters. Use detach() for an independent copy.
/// Activations use N x C x H x W, filters Cout x Cin x Kh x Kw.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape dims, double fill = 0.0);
  Tensor(Shape dims, std::vector<double> values);

  static Tensor scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& dims() const;
  int rank() const;
  int dim(int axis) const;
  std::size_t size() const;

  std::span<double> values();
  std::span<const double> values() const;
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const;
  std::span<const double> grad() const;
  /// Zero-filled gradient buffer, allocated on first use.
  std::span<double> grad_buffer();
  void zero_grad();
  void clear_grad();

  /// Deep copy with no gradient and no graph membership.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Graph;
  friend bool tracked(const Tensor& t);
  friend void record_op(std::initializer_list<Tensor> inputs, Tensor& output,
                        std::function<void(std::span<const double>)> backward);

  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Tape of recorded operations. Constructing a Graph makes it the active tape
/// for the current thread until it is destroyed; ops whose inputs require a
/// gradient (or were produced on this tape) are recorded onto it.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Propagates d(loss)/d(.) to every tracked input in reverse creation order
  /// and accumulates into leaf gradients. Consumes the tape.
  void backward(const Tensor& loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t id() const { return id_; }

  static Graph* active();

 private:
  friend void record_op(std::initializer_list<Tensor> inputs, Tensor& output,
                        std::function<void(std::span<const double>)> backward);

  struct Node {
    Tensor output;
    std::function<void(std::span<const double>)> backward;
  };

  std::vector<Node> nodes_;
  std::uint64_t id_;
  Graph* previous_;
  bool consumed_ = false;
};

/// True if `t` participates in the active graph (a leaf requiring gradient or
/// the output of a recorded op).
bool tracked(const Tensor& t);

/// Records `output` as produced from `inputs` when any input is tracked. The
/// callback receives d(loss)/d(output) and must push gradients into the inputs
/// that are tracked (see tracked() and Tensor::grad_buffer()).
void record_op(std::initializer_list<Tensor> inputs, Tensor& output,
               std::function<void(std::span<const double>)> backward);

}  // namespace cbd
