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

#include <cstring>
#include <functional>
#include <vector>

#include "icle/tensor.hpp"

namespace icle::numcore {

/// A differentiable scalar function of one tensor. The tape argument is null
/// for plain (non-recording) evaluations.
template <typename T>
using ScalarFn = std::function<Tensor<T>(Tape<T>*, const Tensor<T>&)>;

/// Central-difference gradient check. Returns the maximum over coordinates of
///   |analytic - numeric| / max(1, |numeric|).
/// The function must be deterministic; two plain evaluations are compared
/// bitwise and a mismatch is rejected. Coordinates can optionally be
/// restricted to `coords` (empty means all).
template <typename T>
double grad_check(const ScalarFn<T>& f, const Tensor<T>& x, T step,
                  const std::vector<int64_t>& coords = {}) {
  if (step <= T(0)) throw_contract("grad_check: step must be positive");

  const Tensor<T> base1 = f(nullptr, x);
  const Tensor<T> base2 = f(nullptr, x);
  if (base1.size() != 1) throw_contract("grad_check: function must return a scalar");
  if (std::memcmp(base1.data(), base2.data(), sizeof(T)) != 0)
    throw_contract("grad_check: function is not deterministic (repeated evaluation mismatch)");

  // analytic gradient
  Tensor<T> xg = x.deep_copy();
  xg.set_requires_grad(true);
  Tape<T> tape;
  Tensor<T> loss = f(&tape, xg);
  if (loss.size() != 1) throw_contract("grad_check: function must return a scalar");
  tape.backward(loss);
  std::vector<T> analytic(static_cast<size_t>(x.size()), T(0));
  if (xg.has_grad()) analytic.assign(xg.grad().begin(), xg.grad().end());

  std::vector<int64_t> todo = coords;
  if (todo.empty()) {
    todo.resize(static_cast<size_t>(x.size()));
    for (int64_t i = 0; i < x.size(); ++i) todo[static_cast<size_t>(i)] = i;
  }

  double worst = 0.0;
  for (int64_t i : todo) {
    Tensor<T> xp = x.deep_copy();
    Tensor<T> xm = x.deep_copy();
    const T xi = x.at(i);
    xp.data_mut()[i] = xi + step;
    xm.data_mut()[i] = xi - step;
    const double span = static_cast<double>(xp.at(i)) - static_cast<double>(xm.at(i));
    const double fp = static_cast<double>(f(nullptr, xp).item());
    const double fm = static_cast<double>(f(nullptr, xm).item());
    const double numeric = (fp - fm) / span;
    const double err = std::abs(static_cast<double>(analytic[static_cast<size_t>(i)]) - numeric) /
                       std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace icle::numcore
