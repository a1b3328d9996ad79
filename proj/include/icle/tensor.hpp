// Copyright (C) 2026 the icle authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "icle/common.hpp"
#include "icle/rng.hpp"

namespace icle::numcore {

using Shape = std::vector<int64_t>;

inline int64_t shape_size(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) {
    if (d <= 0) throw_shape("dimension sizes must be positive");
    n *= d;
  }
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out + "]";
}

/// Dense row-major tensor. Copies share the underlying node (shallow); values
/// are immutable once the tensor participates in a tape, grad buffers are the
/// only mutable state and belong to one backward pass at a time.
template <typename T>
class Tensor {
  struct Node {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;  // empty until a backward pass touches this tensor
    bool requires_grad = false;
  };

 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->values.assign(static_cast<size_t>(shape_size(shape)), T(0));
    t.node_->shape = std::move(shape);
    t.node_->requires_grad = requires_grad;
    return t;
  }

  static Tensor full(Shape shape, T value, bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (T& v : t.node_->values) v = value;
    if (!std::isfinite(static_cast<double>(value))) throw_numeric("tensor fill value is not finite");
    return t;
  }

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (shape_size(shape) != static_cast<int64_t>(values.size()))
      throw_shape("value count " + std::to_string(values.size()) + " does not match shape " + shape_str(shape));
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = std::move(shape);
    t.node_->values = std::move(values);
    t.node_->requires_grad = requires_grad;
    t.check_finite("tensor construction");
    return t;
  }

  static Tensor scalar(T value) { return from({1}, {value}); }

  static Tensor randn(Shape shape, SeededRng& rng, T stddev, bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (T& v : t.node_->values) v = static_cast<T>(rng.next_normal()) * stddev;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t size() const { return static_cast<int64_t>(node_->values.size()); }
  int64_t ndim() const { return static_cast<int64_t>(node_->shape.size()); }
  int64_t dim(int i) const { return node_->shape.at(static_cast<size_t>(i)); }
  int64_t rows() const { return ndim() == 2 ? dim(0) : (ndim() == 1 ? 1 : throw_2d()); }
  int64_t cols() const { return ndim() == 2 ? dim(1) : (ndim() == 1 ? dim(0) : throw_2d()); }

  const T* data() const { return node_->values.data(); }
  T* data_mut() { return node_->values.data(); }
  std::span<const T> values() const { return node_->values; }
  T item() const {
    if (size() != 1) throw_contract("item() requires a scalar tensor, got " + shape_str(shape()));
    return node_->values[0];
  }
  T at(int64_t i) const { return node_->values.at(static_cast<size_t>(i)); }
  T at(int64_t r, int64_t c) const { return node_->values.at(static_cast<size_t>(r * cols() + c)); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }

  bool has_grad() const { return !node_->grad.empty(); }
  void ensure_grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->values.size(), T(0));
  }
  std::span<const T> grad() const {
    if (node_->grad.empty()) throw_contract("tensor has no gradient (backward not run or not reachable)");
    return node_->grad;
  }
  T* grad_mut() {
    ensure_grad();
    return node_->grad.data();
  }
  void zero_grad() { node_->grad.clear(); }

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  void check_finite(const std::string& context) const {
    for (const T& v : node_->values)
      if (!std::isfinite(static_cast<double>(v))) throw_numeric("non-finite value in " + context);
  }

  Tensor deep_copy() const {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = node_->shape;
    t.node_->values = node_->values;
    t.node_->requires_grad = node_->requires_grad;
    return t;
  }

 private:
  int64_t throw_2d() const { throw_shape("expected 1-D or 2-D tensor, got " + shape_str(shape())); }

  std::shared_ptr<Node> node_;
};

/// Reverse-mode tape: ordered record of executed primitives. backward() replays
/// the record in exact reverse execution order; a tape can be consumed once.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> backward_step) { steps_.push_back(std::move(backward_step)); }

  size_t size() const { return steps_.size(); }
  bool spent() const { return spent_; }

  void backward(Tensor<T>& loss) {
    if (spent_) throw_contract("backward called twice on the same tape");
    if (loss.size() != 1) throw_contract("backward requires a scalar loss, got " + shape_str(loss.shape()));
    spent_ = true;
    loss.ensure_grad();
    loss.grad_mut()[0] = T(1);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> steps_;
  bool spent_ = false;
};

}  // namespace icle::numcore
