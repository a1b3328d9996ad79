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

// AVX2+FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// only reached after a runtime cpuid check, so plain loads/stores are safe.
// exp() stays scalar so softmax matches the reference transcendentals; only
// the surrounding reductions are vectorized.

#include "icle/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace icle::kernels {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_hadd_pd(lo, lo);
  return _mm_cvtsd_f64(lo);
}

// ---- float32 ----

void gemm_nn_avx2(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t n8 = n & ~size_t(7);
  for (size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    for (size_t l = 0; l < k; ++l) {
      const float av = arow[l];
      const float* brow = b + l * n;
      const __m256 avv = _mm256_set1_ps(av);
      size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_avx2(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t k8 = k & ~size_t(7);
  for (size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const float* brow = b + j * k;
      __m256 acc = _mm256_setzero_ps();
      size_t l = 0;
      for (; l < k8; l += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(arow + l), _mm256_loadu_ps(brow + l), acc);
      float s = hsum8(acc);
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] += s;
    }
  }
}

void gemm_tn_avx2(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t n8 = n & ~size_t(7);
  for (size_t l = 0; l < m; ++l) {
    const float* arow = a + l * k;
    const float* brow = b + l * n;
    for (size_t i = 0; i < k; ++i) {
      const float av = arow[i];
      if (av == 0.0f) continue;  // embedding-gradient rows are mostly zero
      float* crow = c + i * n;
      const __m256 avv = _mm256_set1_ps(av);
      size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

float dot_avx2(const float* a, const float* b, size_t n) {
  const size_t n8 = n & ~size_t(7);
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float s = hsum8(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(float alpha, const float* x, float* y, size_t n) {
  const size_t n8 = n & ~size_t(7);
  const __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(float* x, float alpha, size_t n) {
  const size_t n8 = n & ~size_t(7);
  const __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i < n8; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), av));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_avx2(const float* a, const float* b, float* out, size_t n) {
  const size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

float reduce_max_avx2(const float* x, size_t n) {
  float m = -std::numeric_limits<float>::infinity();
  const size_t n8 = n & ~size_t(7);
  if (n8 > 0) {
    __m256 mv = _mm256_set1_ps(m);
    for (size_t i = 0; i < n8; i += 8) mv = _mm256_max_ps(mv, _mm256_loadu_ps(x + i));
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, mv);
    for (float lane : lanes) m = lane > m ? lane : m;
  }
  for (size_t i = n8; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

float reduce_sum_avx2(const float* x, size_t n) {
  const size_t n8 = n & ~size_t(7);
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum8(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void softmax_row_avx2(float* x, size_t n) {
  if (n == 0) return;
  const float m = reduce_max_avx2(x, n);
  if (m == -std::numeric_limits<float>::infinity()) {
    for (size_t i = 0; i < n; ++i) x[i] = 0.0f;
    return;
  }
  float s = 0.0f;
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    s += x[i];
  }
  scale_avx2(x, 1.0f / s, n);
}

void rmsnorm_row_avx2(const float* x, const float* gain, float eps, float* out, size_t n) {
  const float ss = dot_avx2(x, x, n);
  const float inv = 1.0f / std::sqrt(ss / static_cast<float>(n) + eps);
  const size_t n8 = n & ~size_t(7);
  const __m256 iv = _mm256_set1_ps(inv);
  size_t i = 0;
  for (; i < n8; i += 8) {
    const __m256 xv = _mm256_mul_ps(_mm256_loadu_ps(x + i), iv);
    _mm256_storeu_ps(out + i, _mm256_mul_ps(xv, _mm256_loadu_ps(gain + i)));
  }
  for (; i < n; ++i) out[i] = gain[i] * x[i] * inv;
}

// ---- float64 (4-wide) ----

void gemm_nn_avx2d(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  const size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      const double* brow = b + l * n;
      const __m256d avv = _mm256_set1_pd(av);
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_avx2d(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  const size_t k4 = k & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      __m256d acc = _mm256_setzero_pd();
      size_t l = 0;
      for (; l < k4; l += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l), _mm256_loadu_pd(brow + l), acc);
      double s = hsum4(acc);
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] += s;
    }
  }
}

void gemm_tn_avx2d(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  const size_t n4 = n & ~size_t(3);
  for (size_t l = 0; l < m; ++l) {
    const double* arow = a + l * k;
    const double* brow = b + l * n;
    for (size_t i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      const __m256d avv = _mm256_set1_pd(av);
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(avv, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

double dot_avx2d(const double* a, const double* b, size_t n) {
  const size_t n4 = n & ~size_t(3);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i < n4; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2d(double alpha, const double* x, double* y, size_t n) {
  const size_t n4 = n & ~size_t(3);
  const __m256d av = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i < n4; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2d(double* x, double alpha, size_t n) {
  const size_t n4 = n & ~size_t(3);
  const __m256d av = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i < n4; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_avx2d(const double* a, const double* b, double* out, size_t n) {
  const size_t n4 = n & ~size_t(3);
  size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

double reduce_max_avx2d(const double* x, size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  const size_t n4 = n & ~size_t(3);
  if (n4 > 0) {
    __m256d mv = _mm256_set1_pd(m);
    for (size_t i = 0; i < n4; i += 4) mv = _mm256_max_pd(mv, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, mv);
    for (double lane : lanes) m = lane > m ? lane : m;
  }
  for (size_t i = n4; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

double reduce_sum_avx2d(const double* x, size_t n) {
  const size_t n4 = n & ~size_t(3);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum4(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void softmax_row_avx2d(double* x, size_t n) {
  if (n == 0) return;
  const double m = reduce_max_avx2d(x, n);
  if (m == -std::numeric_limits<double>::infinity()) {
    for (size_t i = 0; i < n; ++i) x[i] = 0.0;
    return;
  }
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    s += x[i];
  }
  scale_avx2d(x, 1.0 / s, n);
}

void rmsnorm_row_avx2d(const double* x, const double* gain, double eps, double* out, size_t n) {
  const double ss = dot_avx2d(x, x, n);
  const double inv = 1.0 / std::sqrt(ss / static_cast<double>(n) + eps);
  const size_t n4 = n & ~size_t(3);
  const __m256d iv = _mm256_set1_pd(inv);
  size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d xv = _mm256_mul_pd(_mm256_loadu_pd(x + i), iv);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(xv, _mm256_loadu_pd(gain + i)));
  }
  for (; i < n; ++i) out[i] = gain[i] * x[i] * inv;
}

}  // namespace

const Kernels<float>* avx2_f32() {
  static const Kernels<float> k = [] {
    Kernels<float> t;
    t.gemm_nn = gemm_nn_avx2;
    t.gemm_nt = gemm_nt_avx2;
    t.gemm_tn = gemm_tn_avx2;
    t.dot = dot_avx2;
    t.axpy = axpy_avx2;
    t.scale = scale_avx2;
    t.vadd = vadd_avx2;
    t.reduce_max = reduce_max_avx2;
    t.reduce_sum = reduce_sum_avx2;
    t.softmax_row = softmax_row_avx2;
    t.rmsnorm_row = rmsnorm_row_avx2;
    return t;
  }();
  return &k;
}

const Kernels<double>* avx2_f64() {
  static const Kernels<double> k = [] {
    Kernels<double> t;
    t.gemm_nn = gemm_nn_avx2d;
    t.gemm_nt = gemm_nt_avx2d;
    t.gemm_tn = gemm_tn_avx2d;
    t.dot = dot_avx2d;
    t.axpy = axpy_avx2d;
    t.scale = scale_avx2d;
    t.vadd = vadd_avx2d;
    t.reduce_max = reduce_max_avx2d;
    t.reduce_sum = reduce_sum_avx2d;
    t.softmax_row = softmax_row_avx2d;
    t.rmsnorm_row = rmsnorm_row_avx2d;
    return t;
  }();
  return &k;
}

}  // namespace icle::kernels

#endif  // x86-64
