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

// Reference kernels. Plain loops, no pragmas; these define the semantics the
// SIMD variants are tested against.

#include <cmath>
#include <limits>

#include "icle/kernels/kernels.hpp"

namespace icle::kernels {
namespace {

template <typename T>
void gemm_nn_ref(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (size_t l = 0; l < k; ++l) {
      const T av = arow[l];
      const T* brow = b + l * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt_ref(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = 0;
      for (size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] += acc;
    }
  }
}

template <typename T>
void gemm_tn_ref(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t l = 0; l < m; ++l) {
    const T* arow = a + l * k;
    const T* brow = b + l * n;
    for (size_t i = 0; i < k; ++i) {
      const T av = arow[i];
      T* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
T dot_ref(const T* a, const T* b, size_t n) {
  T acc = 0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy_ref(T alpha, const T* x, T* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale_ref(T* x, T alpha, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void vadd_ref(const T* a, const T* b, T* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
T reduce_max_ref(const T* x, size_t n) {
  T m = -std::numeric_limits<T>::infinity();
  for (size_t i = 0; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

template <typename T>
T reduce_sum_ref(const T* x, size_t n) {
  T s = 0;
  for (size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

template <typename T>
void softmax_row_ref(T* x, size_t n) {
  if (n == 0) return;
  const T m = reduce_max_ref(x, n);
  if (m == -std::numeric_limits<T>::infinity()) {
    // fully masked row: defined as all zeros
    for (size_t i = 0; i < n; ++i) x[i] = 0;
    return;
  }
  T s = 0;
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    s += x[i];
  }
  const T inv = T(1) / s;
  for (size_t i = 0; i < n; ++i) x[i] *= inv;
}

template <typename T>
void rmsnorm_row_ref(const T* x, const T* gain, T eps, T* out, size_t n) {
  T ss = 0;
  for (size_t i = 0; i < n; ++i) ss += x[i] * x[i];
  const T inv = T(1) / std::sqrt(ss / static_cast<T>(n) + eps);
  for (size_t i = 0; i < n; ++i) out[i] = gain[i] * x[i] * inv;
}

template <typename T>
Kernels<T> make_scalar() {
  Kernels<T> k;
  k.gemm_nn = gemm_nn_ref<T>;
  k.gemm_nt = gemm_nt_ref<T>;
  k.gemm_tn = gemm_tn_ref<T>;
  k.dot = dot_ref<T>;
  k.axpy = axpy_ref<T>;
  k.scale = scale_ref<T>;
  k.vadd = vadd_ref<T>;
  k.reduce_max = reduce_max_ref<T>;
  k.reduce_sum = reduce_sum_ref<T>;
  k.softmax_row = softmax_row_ref<T>;
  k.rmsnorm_row = rmsnorm_row_ref<T>;
  return k;
}

}  // namespace

const Kernels<float>& scalar_f32() {
  static const Kernels<float> k = make_scalar<float>();
  return k;
}

const Kernels<double>& scalar_f64() {
  static const Kernels<double> k = make_scalar<double>();
  return k;
}

}  // namespace icle::kernels
