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
#include <limits>
#include <memory>
#include <vector>

#include "icle/ops.hpp"
#include "icle/tensor.hpp"

namespace icle::numcore {

/// Boolean attention mask: allow[i*len+j] says whether query position i may
/// attend to key position j.
struct AttentionAllow {
  int64_t len = 0;
  std::vector<uint8_t> allow;  // len*len, row-major

  bool at(int64_t i, int64_t j) const { return allow[static_cast<size_t>(i * len + j)] != 0; }
};

namespace detail {

template <typename T>
void split_head(const Tensor<T>& x, int64_t head, int64_t head_dim, std::vector<T>& out) {
  const int64_t l = x.rows(), d = x.cols();
  out.resize(static_cast<size_t>(l * head_dim));
  const T* src = x.data() + head * head_dim;
  for (int64_t i = 0; i < l; ++i)
    std::copy_n(src + i * d, head_dim, out.data() + i * head_dim);
}

template <typename T>
void scatter_head_grad(Tensor<T>& x, int64_t head, int64_t head_dim, const std::vector<T>& g) {
  const int64_t l = x.rows(), d = x.cols();
  T* dst = x.grad_mut() + head * head_dim;
  for (int64_t i = 0; i < l; ++i)
    for (int64_t j = 0; j < head_dim; ++j) dst[i * d + j] += g[static_cast<size_t>(i * head_dim + j)];
}

}  // namespace detail

/// Fused masked multi-head attention over packed [len, d] projections.
/// Heads are contiguous column slices of width d/n_heads. Disallowed entries
/// score -inf before the row softmax; fully masked rows produce zero outputs.
/// Attention probabilities are retained per head for the backward pass.
template <typename T>
Tensor<T> multi_head_attention(Tape<T>* tape, const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               const AttentionAllow& mask, int64_t n_heads) {
  const int64_t l = q.rows(), d = q.cols();
  if (k.rows() != l || v.rows() != l || k.cols() != d || v.cols() != d)
    throw_shape("multi_head_attention: q/k/v must share shape");
  if (n_heads <= 0 || d % n_heads != 0) throw_shape("multi_head_attention: d must divide by n_heads");
  if (mask.len != l) throw_shape("multi_head_attention: mask length mismatch");
  const int64_t hd = d / n_heads;
  const T att_scale = T(1) / std::sqrt(static_cast<T>(hd));
  const auto& K = kernels::active<T>();

  Tensor<T> out = Tensor<T>::zeros({l, d});
  // probabilities saved for backward: n_heads contiguous [l,l] blocks
  auto probs = std::make_shared<std::vector<T>>(static_cast<size_t>(n_heads * l * l));

  std::vector<T> qh, kh, vh;
  std::vector<T> scores(static_cast<size_t>(l * l));
  std::vector<T> oh(static_cast<size_t>(l * hd));
  for (int64_t h = 0; h < n_heads; ++h) {
    detail::split_head(q, h, hd, qh);
    detail::split_head(k, h, hd, kh);
    detail::split_head(v, h, hd, vh);
    std::fill(scores.begin(), scores.end(), T(0));
    K.gemm_nt(qh.data(), kh.data(), scores.data(), l, hd, l);
    K.scale(scores.data(), att_scale, scores.size());
    for (int64_t i = 0; i < l; ++i)
      for (int64_t j = 0; j < l; ++j)
        if (!mask.at(i, j)) scores[static_cast<size_t>(i * l + j)] = -std::numeric_limits<T>::infinity();
    for (int64_t i = 0; i < l; ++i) K.softmax_row(scores.data() + i * l, static_cast<size_t>(l));
    std::copy(scores.begin(), scores.end(), probs->data() + h * l * l);
    std::fill(oh.begin(), oh.end(), T(0));
    K.gemm_nn(scores.data(), vh.data(), oh.data(), l, l, hd);
    T* dst = out.data_mut() + h * hd;
    for (int64_t i = 0; i < l; ++i) std::copy_n(oh.data() + i * hd, hd, dst + i * d);
  }

  if (detail::track(tape, {&q, &k, &v})) {
    out.set_requires_grad(true);
    tape->record([q, k, v, out, probs, n_heads, l, d, hd, att_scale]() mutable {
      const auto& Kb = kernels::active<T>();
      std::vector<T> qh2, kh2, vh2;
      std::vector<T> go(static_cast<size_t>(l * hd));
      std::vector<T> gp(static_cast<size_t>(l * l));
      std::vector<T> gs(static_cast<size_t>(l * l));
      std::vector<T> gqh(static_cast<size_t>(l * hd)), gkh(static_cast<size_t>(l * hd)),
          gvh(static_cast<size_t>(l * hd));
      for (int64_t h = 0; h < n_heads; ++h) {
        detail::split_head(q, h, hd, qh2);
        detail::split_head(k, h, hd, kh2);
        detail::split_head(v, h, hd, vh2);
        const T* p = probs->data() + h * l * l;
        const T* gout = out.grad().data() + h * hd;
        for (int64_t i = 0; i < l; ++i)
          std::copy_n(gout + i * d, hd, go.data() + i * hd);
        // dV = P^T * dO ; dP = dO * V^T
        std::fill(gvh.begin(), gvh.end(), T(0));
        Kb.gemm_tn(p, go.data(), gvh.data(), l, l, hd);
        std::fill(gp.begin(), gp.end(), T(0));
        Kb.gemm_nt(go.data(), vh2.data(), gp.data(), l, hd, l);
        // softmax backward row-wise; masked entries have p == 0 and drop out
        for (int64_t i = 0; i < l; ++i) {
          const T* pr = p + i * l;
          const T* gpr = gp.data() + i * l;
          T inner = Kb.dot(gpr, pr, static_cast<size_t>(l));
          T* gsr = gs.data() + i * l;
          for (int64_t j = 0; j < l; ++j) gsr[j] = pr[j] * (gpr[j] - inner);
        }
        Kb.scale(gs.data(), att_scale, gs.size());
        // dQ = dS * K ; dK = dS^T * Q
        std::fill(gqh.begin(), gqh.end(), T(0));
        Kb.gemm_nn(gs.data(), kh2.data(), gqh.data(), l, l, hd);
        std::fill(gkh.begin(), gkh.end(), T(0));
        Kb.gemm_tn(gs.data(), qh2.data(), gkh.data(), l, l, hd);
        if (q.requires_grad()) detail::scatter_head_grad(q, h, hd, gqh);
        if (k.requires_grad()) detail::scatter_head_grad(k, h, hd, gkh);
        if (v.requires_grad()) detail::scatter_head_grad(v, h, hd, gvh);
      }
    });
  }
  return out;
}

}  // namespace icle::numcore
