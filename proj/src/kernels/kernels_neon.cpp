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

// NEON kernels for aarch64. Only the float32 hot paths are vectorized; the
// double table stays scalar on ARM.

#include "icle/kernels/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace icle::kernels {
namespace {

void gemm_nn_neon(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    for (size_t l = 0; l < k; ++l) {
      const float av = arow[l];
      const float* brow = b + l * n;
      const float32x4_t avv = vdupq_n_f32(av);
      size_t j = 0;
      for (; j < n4; j += 4) {
        float32x4_t cv = vld1q_f32(crow + j);
        cv = vfmaq_f32(cv, avv, vld1q_f32(brow + j));
        vst1q_f32(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_neon(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t k4 = k & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const float* brow = b + j * k;
      float32x4_t acc = vdupq_n_f32(0.0f);
      size_t l = 0;
      for (; l < k4; l += 4) acc = vfmaq_f32(acc, vld1q_f32(arow + l), vld1q_f32(brow + l));
      float s = vaddvq_f32(acc);
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] += s;
    }
  }
}

void gemm_tn_neon(const float* a, const float* b, float* c, size_t m, size_t k, size_t n) {
  const size_t n4 = n & ~size_t(3);
  for (size_t l = 0; l < m; ++l) {
    const float* arow = a + l * k;
    const float* brow = b + l * n;
    for (size_t i = 0; i < k; ++i) {
      const float av = arow[i];
      if (av == 0.0f) continue;
      float* crow = c + i * n;
      const float32x4_t avv = vdupq_n_f32(av);
      size_t j = 0;
      for (; j < n4; j += 4) {
        float32x4_t cv = vld1q_f32(crow + j);
        cv = vfmaq_f32(cv, avv, vld1q_f32(brow + j));
        vst1q_f32(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

float dot_neon(const float* a, const float* b, size_t n) {
  const size_t n4 = n & ~size_t(3);
  float32x4_t acc = vdupq_n_f32(0.0f);
  size_t i = 0;
  for (; i < n4; i += 4) acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
  float s = vaddvq_f32(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(float alpha, const float* x, float* y, size_t n) {
  const size_t n4 = n & ~size_t(3);
  const float32x4_t av = vdupq_n_f32(alpha);
  size_t i = 0;
  for (; i < n4; i += 4) {
    float32x4_t yv = vld1q_f32(y + i);
    yv = vfmaq_f32(yv, av, vld1q_f32(x + i));
    vst1q_f32(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(float* x, float alpha, size_t n) {
  const size_t n4 = n & ~size_t(3);
  const float32x4_t av = vdupq_n_f32(alpha);
  size_t i = 0;
  for (; i < n4; i += 4) vst1q_f32(x + i, vmulq_f32(vld1q_f32(x + i), av));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_neon(const float* a, const float* b, float* out, size_t n) {
  const size_t n4 = n & ~size_t(3);
  size_t i = 0;
  for (; i < n4; i += 4) vst1q_f32(out + i, vaddq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

float reduce_max_neon(const float* x, size_t n) {
  float m = -std::numeric_limits<float>::infinity();
  const size_t n4 = n & ~size_t(3);
  if (n4 > 0) {
    float32x4_t mv = vdupq_n_f32(m);
    for (size_t i = 0; i < n4; i += 4) mv = vmaxq_f32(mv, vld1q_f32(x + i));
    const float lane = vmaxvq_f32(mv);
    m = lane > m ? lane : m;
  }
  for (size_t i = n4; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

float reduce_sum_neon(const float* x, size_t n) {
  const size_t n4 = n & ~size_t(3);
  float32x4_t acc = vdupq_n_f32(0.0f);
  size_t i = 0;
  for (; i < n4; i += 4) acc = vaddq_f32(acc, vld1q_f32(x + i));
  float s = vaddvq_f32(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void softmax_row_neon(float* x, size_t n) {
  if (n == 0) return;
  const float m = reduce_max_neon(x, n);
  if (m == -std::numeric_limits<float>::infinity()) {
    for (size_t i = 0; i < n; ++i) x[i] = 0.0f;
    return;
  }
  float s = 0.0f;
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - m);
    s += x[i];
  }
  scale_neon(x, 1.0f / s, n);
}

void rmsnorm_row_neon(const float* x, const float* gain, float eps, float* out, size_t n) {
  const float ss = dot_neon(x, x, n);
  const float inv = 1.0f / std::sqrt(ss / static_cast<float>(n) + eps);
  const size_t n4 = n & ~size_t(3);
  const float32x4_t iv = vdupq_n_f32(inv);
  size_t i = 0;
  for (; i < n4; i += 4) {
    const float32x4_t xv = vmulq_f32(vld1q_f32(x + i), iv);
    vst1q_f32(out + i, vmulq_f32(xv, vld1q_f32(gain + i)));
  }
  for (; i < n; ++i) out[i] = gain[i] * x[i] * inv;
}

}  // namespace

const Kernels<float>* neon_f32() {
  static const Kernels<float> k = [] {
    Kernels<float> t;
    t.gemm_nn = gemm_nn_neon;
    t.gemm_nt = gemm_nt_neon;
    t.gemm_tn = gemm_tn_neon;
    t.dot = dot_neon;
    t.axpy = axpy_neon;
    t.scale = scale_neon;
    t.vadd = vadd_neon;
    t.reduce_max = reduce_max_neon;
    t.reduce_sum = reduce_sum_neon;
    t.softmax_row = softmax_row_neon;
    t.rmsnorm_row = rmsnorm_row_neon;
    return t;
  }();
  return &k;
}

}  // namespace icle::kernels

#endif  // __aarch64__
