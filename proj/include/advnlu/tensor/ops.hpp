//
// Copyright 2026 The advnlu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef ADVNLU_TENSOR_OPS_HPP_
#define ADVNLU_TENSOR_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advnlu/error.hpp"
#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tensor {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Raw kernels. All matrices are row-major; every kernel accumulates.

// c[n x m] += a[n x k] * b[k x m]
template <typename T>
void MatMulAdd(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
               std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    T* ci = c + i * m;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      const T* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[n x k] += a[n x m] * b[k x m]^T
template <typename T>
void MatMulTransBAdd(const T* a, const T* b, T* c, std::size_t n,
                     std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * m;
    T* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * m;
      T acc = T(0);
      for (std::size_t j = 0; j < m; ++j) acc += ai[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// c[k x m] += a[n x k]^T * b[n x m]
template <typename T>
void MatMulTransAAdd(const T* a, const T* b, T* c, std::size_t n,
                     std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * k;
    const T* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      T* cp = c + p * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += av * bi[j];
    }
  }
}

template <typename T>
T Sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// ---------------------------------------------------------------------------
// affine: y = x W + b

template <typename T>
Tensor<T> Affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1 ||
      x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0)) {
    Fail(ErrorCode::kDimension, "affine: incompatible shapes x" +
                                    ShapeString(x.shape()) + " W" +
                                    ShapeString(w.shape()) + " b" +
                                    ShapeString(b.shape()));
  }
  const std::size_t n = x.dim(0), d_in = w.dim(0), d_out = w.dim(1);
  Tensor<T> y({n, d_out});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(b.data(), b.data() + d_out, y.data() + i * d_out);
  }
  MatMulAdd(x.data(), w.data(), y.data(), n, d_in, d_out);
  return y;
}

// Accumulates dL/dx, dL/dW and dL/db into the grad buffers of whichever of
// the three tensors have gradients enabled.
template <typename T>
void AffineBackward(Tensor<T>& x, Tensor<T>& w, Tensor<T>& b,
                    const Tensor<T>& dy) {
  const std::size_t n = x.dim(0), d_in = w.dim(0), d_out = w.dim(1);
  if (dy.rank() != 2 || dy.dim(0) != n || dy.dim(1) != d_out) {
    Fail(ErrorCode::kDimension, "affine backward: dy" +
                                    ShapeString(dy.shape()) +
                                    " does not match output [" +
                                    std::to_string(n) + "x" +
                                    std::to_string(d_out) + "]");
  }
  if (w.has_grad()) {
    MatMulTransAAdd(x.data(), dy.data(), w.grad().data(), n, d_in, d_out);
  }
  if (b.has_grad()) {
    T* gb = b.grad().data();
    for (std::size_t i = 0; i < n; ++i) {
      const T* r = dy.data() + i * d_out;
      for (std::size_t j = 0; j < d_out; ++j) gb[j] += r[j];
    }
  }
  if (x.has_grad()) {
    MatMulTransBAdd(dy.data(), w.data(), x.grad().data(), n, d_out, d_in);
  }
}

// ---------------------------------------------------------------------------
// Softmax and cross-entropy.

template <typename T>
std::vector<T> Softmax(std::span<const T> logits) {
  std::vector<T> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const T mx = *std::max_element(p.begin(), p.end());
  T z = T(0);
  for (T& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (T& v : p) v /= z;
  return p;
}

// -log softmax(logits)[target]. When `dlogits` is non-empty, adds
// scale * (softmax(logits) - onehot(target)) to it.
template <typename T>
T SoftmaxCrossEntropy(std::span<const T> logits, std::size_t target,
                      std::span<T> dlogits = {}, T scale = T(1)) {
  if (target >= logits.size()) {
    Fail(ErrorCode::kIndex, "cross-entropy target " + std::to_string(target) +
                                " out of range for " +
                                std::to_string(logits.size()) + " classes");
  }
  const T mx = *std::max_element(logits.begin(), logits.end());
  T z = T(0);
  for (T v : logits) z += std::exp(v - mx);
  const T log_z = std::log(z) + mx;
  if (!dlogits.empty()) {
    for (std::size_t j = 0; j < logits.size(); ++j) {
      dlogits[j] += scale * std::exp(logits[j] - log_z);
    }
    dlogits[target] -= scale;
  }
  return log_z - logits[target];
}

// ---------------------------------------------------------------------------
// Mean squared error.

template <typename T>
T Mse(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size() || a.empty()) {
    Fail(ErrorCode::kDimension, "mse: shapes [" + std::to_string(a.size()) +
                                    "] and [" + std::to_string(b.size()) +
                                    "] differ");
  }
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<T>(a.size());
}

// Adds scale * dMse/da into da and scale * dMse/db into db.
template <typename T>
void MseBackward(std::span<const T> a, std::span<const T> b, T scale,
                 std::span<T> da, std::span<T> db) {
  const T k = T(2) * scale / static_cast<T>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T g = k * (a[i] - b[i]);
    if (!da.empty()) da[i] += g;
    if (!db.empty()) db[i] -= g;
  }
}

// ---------------------------------------------------------------------------
// Inverted dropout. The mask holds 0 or 1/(1-p) per element.

template <typename T>
std::vector<T> DropoutMask(std::size_t n, double p, Rng& rng) {
  std::vector<T> mask(n, T(1));
  if (p <= 0.0) return mask;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (T& m : mask) m = u(rng) < p ? T(0) : keep;
  return mask;
}

template <typename T>
void ApplyMask(std::span<T> values, std::span<const T> mask) {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= mask[i];
}

// Gathers one embedding row per token id.
template <typename T>
Tensor<T> EmbeddingLookup(const Tensor<T>& table,
                          std::span<const std::int32_t> ids) {
  if (ids.empty()) {
    Fail(ErrorCode::kPrecondition, "embedding lookup on an empty sequence");
  }
  const std::size_t d = table.dim(1);
  Tensor<T> out({ids.size(), d});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const auto id = static_cast<std::size_t>(ids[t]);
    if (ids[t] < 0 || id >= table.dim(0)) {
      Fail(ErrorCode::kIndex, "token id " + std::to_string(ids[t]) +
                                  " outside embedding table of " +
                                  std::to_string(table.dim(0)) + " rows");
    }
    std::copy_n(table.data() + id * d, d, out.data() + t * d);
  }
  return out;
}

template <typename T>
void EmbeddingBackward(Tensor<T>& table, std::span<const std::int32_t> ids,
                       const Tensor<T>& d_out) {
  if (!table.has_grad()) return;
  const std::size_t d = table.dim(1);
  T* g = table.grad().data();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const T* src = d_out.data() + t * d;
    T* dst = g + static_cast<std::size_t>(ids[t]) * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
}

template <typename T>
std::size_t ArgMax(std::span<const T> v) {
  // First maximum wins, so ties resolve to the lowest index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Uniform(-scale, scale) initialization.
template <typename T>
void InitUniform(Tensor<T>& t, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (T& v : t.values()) v = static_cast<T>(u(rng));
}

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_OPS_HPP_
