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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "icle/kernels/kernels.hpp"
#include "icle/tensor.hpp"

namespace icle::numcore {

// Autograd primitives. Every op takes the tape as its first argument; passing
// nullptr runs the forward computation without recording (inference mode).
// Forward math goes through the kernel dispatch table; backward closures
// accumulate into input grads, so replaying the tape in reverse yields exact
// reverse-mode gradients for arbitrary DAGs.

namespace detail {

template <typename T>
inline bool track(Tape<T>* tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (!tape) return false;
  for (const Tensor<T>* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

}  // namespace detail

/// c[m,n] = a[m,k] * b[k,n]
template <typename T>
Tensor<T> matmul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    throw_shape("matmul: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  const auto& K = kernels::active<T>();
  Tensor<T> c = Tensor<T>::zeros({a.dim(0), b.dim(1)});
  K.gemm_nn(a.data(), b.data(), c.data_mut(), m, k, n);
  if (detail::track(tape, {&a, &b})) {
    c.set_requires_grad(true);
    tape->record([a, b, c, m, k, n]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = c.grad().data();
      if (a.requires_grad()) Kb.gemm_nt(g, b.data(), a.grad_mut(), m, n, k);
      if (b.requires_grad()) Kb.gemm_tn(a.data(), g, b.grad_mut(), m, k, n);
    });
  }
  return c;
}

/// c[m,n] = a[m,k] * b[n,k]^T  (right-multiplication by a transposed matrix)
template <typename T>
Tensor<T> matmul_nt(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1))
    throw_shape("matmul_nt: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()) + "^T");
  const size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  const auto& K = kernels::active<T>();
  Tensor<T> c = Tensor<T>::zeros({a.dim(0), b.dim(0)});
  K.gemm_nt(a.data(), b.data(), c.data_mut(), m, k, n);
  if (detail::track(tape, {&a, &b})) {
    c.set_requires_grad(true);
    tape->record([a, b, c, m, k, n]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = c.grad().data();
      if (a.requires_grad()) Kb.gemm_nn(g, b.data(), a.grad_mut(), m, n, k);
      if (b.requires_grad()) Kb.gemm_tn(g, a.data(), b.grad_mut(), m, n, k);
    });
  }
  return c;
}

template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    throw_shape("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const auto& K = kernels::active<T>();
  Tensor<T> c = Tensor<T>::zeros(a.shape());
  K.vadd(a.data(), b.data(), c.data_mut(), static_cast<size_t>(a.size()));
  if (detail::track(tape, {&a, &b})) {
    c.set_requires_grad(true);
    tape->record([a, b, c]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = c.grad().data();
      const size_t n = static_cast<size_t>(c.size());
      if (a.requires_grad()) Kb.axpy(T(1), g, a.grad_mut(), n);
      if (b.requires_grad()) Kb.axpy(T(1), g, b.grad_mut(), n);
    });
  }
  return c;
}

template <typename T>
Tensor<T> scale(Tape<T>* tape, const Tensor<T>& a, T factor) {
  Tensor<T> c = a.deep_copy();
  c.set_requires_grad(false);
  kernels::active<T>().scale(c.data_mut(), factor, static_cast<size_t>(c.size()));
  if (detail::track(tape, {&a})) {
    c.set_requires_grad(true);
    tape->record([a, c, factor]() mutable {
      kernels::active<T>().axpy(factor, c.grad().data(), a.grad_mut(), static_cast<size_t>(c.size()));
    });
  }
  return c;
}

/// Smooth gated activation y = x * sigmoid(1.702 x).
template <typename T>
Tensor<T> smooth_act(Tape<T>* tape, const Tensor<T>& x) {
  constexpr T kBeta = T(1.702);
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  const T* xv = x.data();
  T* yv = y.data_mut();
  const size_t n = static_cast<size_t>(x.size());
  for (size_t i = 0; i < n; ++i) {
    const T s = T(1) / (T(1) + std::exp(-kBeta * xv[i]));
    yv[i] = xv[i] * s;
  }
  if (detail::track(tape, {&x})) {
    y.set_requires_grad(true);
    tape->record([x, y]() mutable {
      const T beta = T(1.702);
      const T* xv2 = x.data();
      const T* g = y.grad().data();
      T* gx = x.grad_mut();
      const size_t n2 = static_cast<size_t>(x.size());
      for (size_t i = 0; i < n2; ++i) {
        const T s = T(1) / (T(1) + std::exp(-beta * xv2[i]));
        gx[i] += g[i] * (s + xv2[i] * beta * s * (T(1) - s));
      }
    });
  }
  return y;
}

/// Row-wise RMS normalization: out[r,i] = gain[i] * x[r,i] / sqrt(mean(x[r]^2) + eps).
template <typename T>
Tensor<T> rmsnorm(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& gain, T eps) {
  if (eps <= T(0)) throw_contract("rmsnorm: eps must be positive");
  const int64_t c = x.cols();
  if (gain.size() != c) throw_shape("rmsnorm: gain size must equal feature width");
  const int64_t r = x.rows();
  const auto& K = kernels::active<T>();
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  for (int64_t i = 0; i < r; ++i)
    K.rmsnorm_row(x.data() + i * c, gain.data(), eps, y.data_mut() + i * c, static_cast<size_t>(c));
  if (detail::track(tape, {&x, &gain})) {
    y.set_requires_grad(true);
    tape->record([x, gain, y, eps, r, c]() mutable {
      const auto& Kb = kernels::active<T>();
      const size_t cc = static_cast<size_t>(c);
      for (int64_t i = 0; i < r; ++i) {
        const T* xr = x.data() + i * c;
        const T* gr = y.grad().data() + i * c;
        const T ms = Kb.dot(xr, xr, cc) / static_cast<T>(c);
        const T inv = T(1) / std::sqrt(ms + eps);
        if (x.requires_grad()) {
          // sum_j g_j * gain_j * x_j, shared by every coordinate of the row
          T mix = 0;
          for (int64_t j = 0; j < c; ++j) mix += gr[j] * gain.at(j) * xr[j];
          const T coef = inv * inv * inv * mix / static_cast<T>(c);
          T* gx = x.grad_mut() + i * c;
          for (int64_t j = 0; j < c; ++j) gx[j] += gr[j] * gain.at(j) * inv - coef * xr[j];
        }
        if (gain.requires_grad()) {
          T* gg = gain.grad_mut();
          for (int64_t j = 0; j < c; ++j) gg[j] += gr[j] * xr[j] * inv;
        }
      }
    });
  }
  return y;
}

/// Row-wise softmax with max-subtraction; rows sum to one.
template <typename T>
Tensor<T> softmax_rows(Tape<T>* tape, const Tensor<T>& x) {
  x.check_finite("softmax_rows input");
  const int64_t r = x.rows(), c = x.cols();
  Tensor<T> y = x.deep_copy();
  y.set_requires_grad(false);
  const auto& K = kernels::active<T>();
  for (int64_t i = 0; i < r; ++i) K.softmax_row(y.data_mut() + i * c, static_cast<size_t>(c));
  if (detail::track(tape, {&x})) {
    y.set_requires_grad(true);
    tape->record([x, y, r, c]() mutable {
      for (int64_t i = 0; i < r; ++i) {
        const T* yr = y.data() + i * c;
        const T* gr = y.grad().data() + i * c;
        T inner = 0;
        for (int64_t j = 0; j < c; ++j) inner += gr[j] * yr[j];
        T* gx = x.grad_mut() + i * c;
        for (int64_t j = 0; j < c; ++j) gx[j] += yr[j] * (gr[j] - inner);
      }
    });
  }
  return y;
}

/// Gathers rows of an embedding table: out[l,:] = table[ids[l],:].
template <typename T>
Tensor<T> embedding_rows(Tape<T>* tape, const Tensor<T>& table, const std::vector<int32_t>& ids) {
  const int64_t v = table.dim(0), d = table.dim(1);
  if (ids.empty()) throw_contract("embedding_rows: empty id list");
  for (int32_t id : ids)
    if (id < 0 || id >= v) throw_contract("embedding_rows: token id " + std::to_string(id) + " out of vocabulary");
  Tensor<T> out = Tensor<T>::zeros({static_cast<int64_t>(ids.size()), d});
  for (size_t l = 0; l < ids.size(); ++l)
    std::copy_n(table.data() + static_cast<int64_t>(ids[l]) * d, d, out.data_mut() + static_cast<int64_t>(l) * d);
  if (detail::track(tape, {&table})) {
    out.set_requires_grad(true);
    tape->record([table, out, ids, d]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = out.grad().data();
      T* gt = table.grad_mut();
      for (size_t l = 0; l < ids.size(); ++l)
        Kb.axpy(T(1), g + static_cast<int64_t>(l) * d, gt + static_cast<int64_t>(ids[l]) * d,
                static_cast<size_t>(d));
    });
  }
  return out;
}

/// Stacks 1-D tensors of equal width into a matrix, one per row.
template <typename T>
Tensor<T> concat_rows(Tape<T>* tape, const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw_contract("concat_rows: no parts");
  const int64_t d = parts[0].size();
  for (const auto& p : parts)
    if (p.ndim() != 1 || p.size() != d) throw_shape("concat_rows: parts must be 1-D of equal width");
  Tensor<T> out = Tensor<T>::zeros({static_cast<int64_t>(parts.size()), d});
  for (size_t i = 0; i < parts.size(); ++i)
    std::copy_n(parts[i].data(), d, out.data_mut() + static_cast<int64_t>(i) * d);
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (tape && any) {
    out.set_requires_grad(true);
    tape->record([parts, out, d]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = out.grad().data();
      for (size_t i = 0; i < parts.size(); ++i)
        if (parts[i].requires_grad())
          Kb.axpy(T(1), g + static_cast<int64_t>(i) * d, parts[i].grad_mut(), static_cast<size_t>(d));
    });
  }
  return out;
}

/// Extracts one row of a matrix as a 1-D tensor.
template <typename T>
Tensor<T> row_at(Tape<T>* tape, const Tensor<T>& x, int64_t row) {
  const int64_t r = x.rows(), c = x.cols();
  if (row < 0 || row >= r) throw_contract("row_at: row index out of range");
  Tensor<T> out = Tensor<T>::zeros({c});
  std::copy_n(x.data() + row * c, c, out.data_mut());
  if (detail::track(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, row, c]() mutable {
      kernels::active<T>().axpy(T(1), out.grad().data(), x.grad_mut() + row * c, static_cast<size_t>(c));
    });
  }
  return out;
}

/// Mean of the listed rows, as a 1-D tensor.
template <typename T>
Tensor<T> mean_rows(Tape<T>* tape, const Tensor<T>& x, const std::vector<int64_t>& rows) {
  const int64_t r = x.rows(), c = x.cols();
  if (rows.empty()) throw_contract("mean_rows: empty row selection");
  for (int64_t i : rows)
    if (i < 0 || i >= r) throw_contract("mean_rows: row index out of range");
  Tensor<T> out = Tensor<T>::zeros({c});
  const auto& K = kernels::active<T>();
  for (int64_t i : rows) K.axpy(T(1), x.data() + i * c, out.data_mut(), static_cast<size_t>(c));
  K.scale(out.data_mut(), T(1) / static_cast<T>(rows.size()), static_cast<size_t>(c));
  if (detail::track(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, rows, c]() mutable {
      const auto& Kb = kernels::active<T>();
      const T w = T(1) / static_cast<T>(rows.size());
      for (int64_t i : rows) Kb.axpy(w, out.grad().data(), x.grad_mut() + i * c, static_cast<size_t>(c));
    });
  }
  return out;
}

/// Row-wise L2 normalization. Zero rows are rejected as degenerate embeddings.
template <typename T>
Tensor<T> l2_normalize_rows(Tape<T>* tape, const Tensor<T>& x) {
  const int64_t r = x.rows(), c = x.cols();
  const auto& K = kernels::active<T>();
  Tensor<T> y = Tensor<T>::zeros(x.shape());
  std::vector<T> norms(static_cast<size_t>(r));
  for (int64_t i = 0; i < r; ++i) {
    const T* xr = x.data() + i * c;
    const T nrm = std::sqrt(K.dot(xr, xr, static_cast<size_t>(c)));
    if (nrm == T(0)) throw_numeric("l2_normalize_rows: zero vector (degenerate embedding)");
    norms[static_cast<size_t>(i)] = nrm;
    T* yr = y.data_mut() + i * c;
    std::copy_n(xr, c, yr);
    K.scale(yr, T(1) / nrm, static_cast<size_t>(c));
  }
  if (detail::track(tape, {&x})) {
    y.set_requires_grad(true);
    tape->record([x, y, norms, r, c]() mutable {
      const auto& Kb = kernels::active<T>();
      for (int64_t i = 0; i < r; ++i) {
        const T* yr = y.data() + i * c;
        const T* gr = y.grad().data() + i * c;
        const T inner = Kb.dot(gr, yr, static_cast<size_t>(c));
        T* gx = x.grad_mut() + i * c;
        const T inv = T(1) / norms[static_cast<size_t>(i)];
        for (int64_t j = 0; j < c; ++j) gx[j] += (gr[j] - yr[j] * inner) * inv;
      }
    });
  }
  return y;
}

/// Diagonal of a square matrix.
template <typename T>
Tensor<T> diag(Tape<T>* tape, const Tensor<T>& x) {
  const int64_t n = x.rows();
  if (x.cols() != n) throw_shape("diag: matrix must be square");
  Tensor<T> out = Tensor<T>::zeros({n});
  for (int64_t i = 0; i < n; ++i) out.data_mut()[i] = x.at(i, i);
  if (detail::track(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, n]() mutable {
      const T* g = out.grad().data();
      T* gx = x.grad_mut();
      for (int64_t i = 0; i < n; ++i) gx[i * n + i] += g[i];
    });
  }
  return out;
}

/// Per-row block dots: out[i,j] = q[i,:] . n[i*h + j,:], for j in [0,h).
template <typename T>
Tensor<T> block_rows_dot(Tape<T>* tape, const Tensor<T>& q, const Tensor<T>& n, int64_t h) {
  const int64_t b = q.rows(), d = q.cols();
  if (h <= 0 || n.rows() != b * h || n.cols() != d)
    throw_shape("block_rows_dot: expected " + std::to_string(b) + "*" + std::to_string(h) + " rows of width " +
                std::to_string(d));
  const auto& K = kernels::active<T>();
  Tensor<T> out = Tensor<T>::zeros({b, h});
  for (int64_t i = 0; i < b; ++i)
    for (int64_t j = 0; j < h; ++j)
      out.data_mut()[i * h + j] = K.dot(q.data() + i * d, n.data() + (i * h + j) * d, static_cast<size_t>(d));
  if (detail::track(tape, {&q, &n})) {
    out.set_requires_grad(true);
    tape->record([q, n, out, b, h, d]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* g = out.grad().data();
      for (int64_t i = 0; i < b; ++i)
        for (int64_t j = 0; j < h; ++j) {
          const T gij = g[i * h + j];
          if (q.requires_grad())
            Kb.axpy(gij, n.data() + (i * h + j) * d, q.grad_mut() + i * d, static_cast<size_t>(d));
          if (n.requires_grad())
            Kb.axpy(gij, q.data() + i * d, n.grad_mut() + (i * h + j) * d, static_cast<size_t>(d));
        }
    });
  }
  return out;
}

/// Dot product of two 1-D tensors.
template <typename T>
Tensor<T> dot(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 1 || b.ndim() != 1 || a.size() != b.size())
    throw_shape("dot: 1-D tensors of equal length required");
  const size_t n = static_cast<size_t>(a.size());
  Tensor<T> out = Tensor<T>::scalar(kernels::active<T>().dot(a.data(), b.data(), n));
  if (detail::track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape->record([a, b, out, n]() mutable {
      const auto& Kb = kernels::active<T>();
      const T g = out.grad()[0];
      if (a.requires_grad()) Kb.axpy(g, b.data(), a.grad_mut(), n);
      if (b.requires_grad()) Kb.axpy(g, a.data(), b.grad_mut(), n);
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> out = Tensor<T>::scalar(kernels::active<T>().reduce_sum(x.data(), static_cast<size_t>(x.size())));
  if (detail::track(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out]() mutable {
      const T g = out.grad()[0];
      T* gx = x.grad_mut();
      for (int64_t i = 0; i < x.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean(Tape<T>* tape, const Tensor<T>& x) {
  return scale(tape, sum(tape, x), T(1) / static_cast<T>(x.size()));
}

/// Contiguous group-mean over rows: groups of `ratio` rows from the start are
/// averaged; a smaller trailing group is averaged as-is, so the final row of
/// the input always contributes to the final row of the output.
template <typename T>
Tensor<T> group_mean_rows(Tape<T>* tape, const Tensor<T>& x, int64_t ratio) {
  const int64_t r = x.rows(), c = x.cols();
  if (ratio < 1) throw_contract("group_mean_rows: ratio must be >= 1");
  const int64_t groups = (r + ratio - 1) / ratio;
  Tensor<T> out = Tensor<T>::zeros({groups, c});
  const auto& K = kernels::active<T>();
  for (int64_t g = 0; g < groups; ++g) {
    const int64_t lo = g * ratio, hi = std::min(r, lo + ratio);
    T* orow = out.data_mut() + g * c;
    for (int64_t i = lo; i < hi; ++i) K.axpy(T(1), x.data() + i * c, orow, static_cast<size_t>(c));
    K.scale(orow, T(1) / static_cast<T>(hi - lo), static_cast<size_t>(c));
  }
  if (detail::track(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, ratio, r, c, groups]() mutable {
      const auto& Kb = kernels::active<T>();
      for (int64_t g = 0; g < groups; ++g) {
        const int64_t lo = g * ratio, hi = std::min(r, lo + ratio);
        const T w = T(1) / static_cast<T>(hi - lo);
        const T* grow = out.grad().data() + g * c;
        for (int64_t i = lo; i < hi; ++i) Kb.axpy(w, grow, x.grad_mut() + i * c, static_cast<size_t>(c));
      }
    });
  }
  return out;
}

}  // namespace icle::numcore
