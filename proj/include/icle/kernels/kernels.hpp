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

#include <cstddef>
#include <string>

namespace icle::kernels {

// Dense inner-loop kernels on row-major buffers. Every entry point has a
// scalar reference implementation plus SIMD variants (AVX2 on x86-64, NEON
// on aarch64) selected once at startup. All gemm_* ACCUMULATE into c; callers
// zero-fill first when they want a plain product.
//
// Selection order: ICLE_KERNELS env var ("scalar", "avx2", "neon", "auto"),
// then CPU feature detection, then scalar fallback.

template <typename T>
struct Kernels {
  // c[m,n] += a[m,k] * b[k,n]
  void (*gemm_nn)(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
  // c[m,n] += a[m,k] * b[n,k]^T
  void (*gemm_nt)(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
  // c[k,n] += a[m,k]^T * b[m,n]
  void (*gemm_tn)(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
  T (*dot)(const T* a, const T* b, size_t n);
  // y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, size_t n);
  void (*scale)(T* x, T alpha, size_t n);
  void (*vadd)(const T* a, const T* b, T* out, size_t n);
  T (*reduce_max)(const T* x, size_t n);
  T (*reduce_sum)(const T* x, size_t n);
  // in-place, max-shifted; returns nothing. Rows with max == -inf become all zero.
  void (*softmax_row)(T* x, size_t n);
  // out[i] = gain[i] * x[i] / sqrt(mean(x^2) + eps)
  void (*rmsnorm_row)(const T* x, const T* gain, T eps, T* out, size_t n);
};

const Kernels<float>& f32();
const Kernels<double>& f64();

template <typename T>
const Kernels<T>& active();

template <>
inline const Kernels<float>& active<float>() { return f32(); }
template <>
inline const Kernels<double>& active<double>() { return f64(); }

/// Name of the variant selected at startup ("scalar", "avx2", "neon").
const std::string& active_name();

/// Reference tables, exposed for equivalence testing against the active set.
const Kernels<float>& scalar_f32();
const Kernels<double>& scalar_f64();

/// True when a SIMD variant (not scalar) is active.
bool simd_active();

}  // namespace icle::kernels
