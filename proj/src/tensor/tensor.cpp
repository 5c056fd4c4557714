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

#include "cbd/tensor.hpp"

#include <atomic>
#include <sstream>

#include "cbd/error.hpp"

namespace cbd {

namespace detail {

struct TensorImpl {
  Shape dims;
  std::vector<double> data;
  std::vector<double> grad;
  bool has_grad = false;
  bool requires_grad = false;
  // Id of the graph whose op produced this tensor; 0 for leaves.
  std::uint64_t graph_id = 0;
};

}  // namespace detail

namespace {

std::atomic<Precision> g_precision{Precision::fast};
thread_local Graph* t_active_graph = nullptr;
std::atomic<std::uint64_t> g_next_graph_id{1};

void check_dims(const Shape& dims) {
  if (dims.empty() || dims.size() > 4)
    throw ShapeError("tensor rank must be 1..4, got " + std::to_string(dims.size()));
  for (int d : dims)
    if (d < 0) throw ShapeError("negative tensor extent in " + shape_string(dims));
}

}  // namespace

void set_precision(Precision p) { g_precision.store(p); }
Precision precision() { return g_precision.load(); }

PrecisionScope::PrecisionScope(Precision p) : saved_(precision()) { set_precision(p); }
PrecisionScope::~PrecisionScope() { set_precision(saved_); }

std::size_t shape_volume(const Shape& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  return os.str();
}

Tensor::Tensor() = default;

Tensor::Tensor(Shape dims, double fill) : impl_(std::make_shared<detail::TensorImpl>()) {
  check_dims(dims);
  impl_->data.assign(shape_volume(dims), fill);
  impl_->dims = std::move(dims);
}

Tensor::Tensor(Shape dims, std::vector<double> values)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  check_dims(dims);
  if (values.size() != shape_volume(dims))
    throw ShapeError("tensor of dims " + shape_string(dims) + " given " +
                     std::to_string(values.size()) + " values");
  impl_->dims = std::move(dims);
  impl_->data = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor({1}, value); }

const Shape& Tensor::dims() const { return impl_->dims; }
int Tensor::rank() const { return static_cast<int>(impl_->dims.size()); }
int Tensor::dim(int axis) const { return impl_->dims.at(static_cast<std::size_t>(axis)); }
std::size_t Tensor::size() const { return impl_->data.size(); }

std::span<double> Tensor::values() { return impl_->data; }
std::span<const double> Tensor::values() const { return impl_->data; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of dims " + shape_string(dims()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return impl_ && impl_->has_grad; }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw StateError("tensor has no gradient");
  return impl_->grad;
}

std::span<double> Tensor::grad_buffer() {
  if (!impl_->has_grad) {
    impl_->grad.assign(impl_->data.size(), 0.0);
    impl_->has_grad = true;
  }
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_->has_grad) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::clear_grad() {
  impl_->grad.clear();
  impl_->grad.shrink_to_fit();
  impl_->has_grad = false;
}

Tensor Tensor::detach() const {
  Tensor copy;
  copy.impl_ = std::make_shared<detail::TensorImpl>();
  copy.impl_->dims = impl_->dims;
  copy.impl_->data = impl_->data;
  return copy;
}

Graph::Graph() : id_(g_next_graph_id.fetch_add(1)), previous_(t_active_graph) {
  t_active_graph = this;
}

Graph::~Graph() {
  if (t_active_graph == this) t_active_graph = previous_;
}

Graph* Graph::active() { return t_active_graph; }

bool tracked(const Tensor& t) {
  if (!t.impl_) return false;
  if (t.impl_->requires_grad) return true;
  const Graph* g = Graph::active();
  return g != nullptr && !g->consumed() && t.impl_->graph_id == g->id();
}

void record_op(std::initializer_list<Tensor> inputs, Tensor& output,
               std::function<void(std::span<const double>)> backward) {
  Graph* g = Graph::active();
  if (g == nullptr || g->consumed()) return;
  bool any = false;
  for (const Tensor& t : inputs) any = any || tracked(t);
  if (!any) return;
  output.impl_->graph_id = g->id();
  g->nodes_.push_back({output, std::move(backward)});
}

void Graph::backward(const Tensor& loss) {
  if (consumed_) throw StateError("backward on a consumed graph");
  if (!loss.defined() || loss.size() != 1)
    throw ArgumentError("backward requires a single-element loss");
  if (!tracked(loss)) throw StateError("loss is not connected to the active graph");

  Tensor root = loss;
  root.grad_buffer()[0] += 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Tensor& out = it->output;
    if (!out.has_grad()) continue;
    it->backward(out.grad());
  }
  nodes_.clear();
  nodes_.shrink_to_fit();
  consumed_ = true;
}

}  // namespace cbd
