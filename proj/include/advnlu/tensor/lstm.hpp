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

#ifndef ADVNLU_TENSOR_LSTM_HPP_
#define ADVNLU_TENSOR_LSTM_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "advnlu/error.hpp"
#include "advnlu/tensor/ops.hpp"
#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tensor {

// One unidirectional LSTM layer. Gate blocks are laid out [i | f | g | o]
// along the 4H axis of every matrix.
template <typename T>
struct LstmParams {
  Tensor<T> wx;  // [in x 4H]
  Tensor<T> wh;  // [H x 4H]
  Tensor<T> b;   // [4H]

  LstmParams() = default;
  LstmParams(std::size_t input_size, std::size_t hidden)
      : wx({input_size, 4 * hidden}), wh({hidden, 4 * hidden}), b({4 * hidden}) {}

  std::size_t input_size() const { return wx.dim(0); }
  std::size_t hidden() const { return wh.dim(0); }

  void AppendTo(ParamList<T>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".wx", &wx);
    out.emplace_back(prefix + ".wh", &wh);
    out.emplace_back(prefix + ".b", &b);
  }
};

template <typename T>
struct LstmCache {
  bool reverse = false;
  Tensor<T> input;   // [T x in]
  Tensor<T> gates;   // [T x 4H] post-activation
  Tensor<T> cell;    // [T x H]
  Tensor<T> tanh_cell;
  Tensor<T> hidden;  // [T x H]
  std::vector<T> h0, c0;
};

// Runs the layer over `input` (in time order, or reversed when `reverse`),
// starting from (h0, c0). Output row t is the hidden state at input
// position t regardless of direction.
template <typename T>
Tensor<T> LstmForward(const LstmParams<T>& p, const Tensor<T>& input,
                      bool reverse, std::span<const T> h0,
                      std::span<const T> c0, LstmCache<T>* cache) {
  if (input.rank() != 2 || input.dim(1) != p.input_size()) {
    Fail(ErrorCode::kDimension, "lstm: input " + ShapeString(input.shape()) +
                                    " does not match Wx " +
                                    ShapeString(p.wx.shape()));
  }
  const std::size_t steps = input.dim(0), hs = p.hidden(), g4 = 4 * hs;
  Tensor<T> pre({steps, g4});
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy_n(p.b.data(), g4, pre.data() + t * g4);
  }
  MatMulAdd(input.data(), p.wx.data(), pre.data(), steps, p.input_size(), g4);

  Tensor<T> gates({steps, g4}), cell({steps, hs}), tanh_cell({steps, hs}),
      hidden({steps, hs});
  std::vector<T> h(hs), c(hs);
  if (!h0.empty()) std::copy(h0.begin(), h0.end(), h.begin());
  if (!c0.empty()) std::copy(c0.begin(), c0.end(), c.begin());
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    T* z = pre.data() + t * g4;
    MatMulAdd(h.data(), p.wh.data(), z, 1, hs, g4);
    T* a = gates.data() + t * g4;
    for (std::size_t j = 0; j < hs; ++j) {
      a[j] = Sigmoid(z[j]);
      a[hs + j] = Sigmoid(z[hs + j]);
      a[2 * hs + j] = std::tanh(z[2 * hs + j]);
      a[3 * hs + j] = Sigmoid(z[3 * hs + j]);
      c[j] = a[hs + j] * c[j] + a[j] * a[2 * hs + j];
      const T tc = std::tanh(c[j]);
      h[j] = a[3 * hs + j] * tc;
      cell.at(t, j) = c[j];
      tanh_cell.at(t, j) = tc;
      hidden.at(t, j) = h[j];
    }
  }
  if (cache != nullptr) {
    cache->reverse = reverse;
    cache->input = input;
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->tanh_cell = std::move(tanh_cell);
    cache->hidden = hidden;
    cache->h0.assign(hs, T(0));
    cache->c0.assign(hs, T(0));
    if (!h0.empty()) cache->h0.assign(h0.begin(), h0.end());
    if (!c0.empty()) cache->c0.assign(c0.begin(), c0.end());
  }
  return hidden;
}

template <typename T>
struct LstmInputGrads {
  Tensor<T> d_input;     // [T x in]
  std::vector<T> d_h0, d_c0;
};

// Backpropagates d_hidden (gradient on every output row) plus the gradient
// on the final state (d_h_last, d_c_last; either may be empty). Parameter
// gradients accumulate into `p`.
template <typename T>
LstmInputGrads<T> LstmBackward(LstmParams<T>& p, const LstmCache<T>& cache,
                               const Tensor<T>& d_hidden,
                               std::span<const T> d_h_last,
                               std::span<const T> d_c_last) {
  const std::size_t steps = cache.input.dim(0), hs = p.hidden(), g4 = 4 * hs;
  Tensor<T> dz({steps, g4});
  std::vector<T> dh_next(hs, T(0)), dc_next(hs, T(0));
  if (!d_h_last.empty()) std::copy(d_h_last.begin(), d_h_last.end(), dh_next.begin());
  if (!d_c_last.empty()) std::copy(d_c_last.begin(), d_c_last.end(), dc_next.begin());
  // Hidden state feeding each step, in processing order.
  Tensor<T> h_prev_rows({steps, hs});
  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = cache.reverse ? steps - 1 - s : s;
    const bool first = s == 0;
    const std::size_t t_prev = cache.reverse ? t + 1 : t - 1;
    const T* a = cache.gates.data() + t * g4;
    const T* tc = cache.tanh_cell.data() + t * hs;
    const T* c_prev = first ? cache.c0.data() : cache.cell.data() + t_prev * hs;
    const T* h_prev = first ? cache.h0.data() : cache.hidden.data() + t_prev * hs;
    std::copy_n(h_prev, hs, h_prev_rows.data() + t * hs);
    T* d = dz.data() + t * g4;
    for (std::size_t j = 0; j < hs; ++j) {
      const T i_g = a[j], f_g = a[hs + j], g_g = a[2 * hs + j], o_g = a[3 * hs + j];
      const T dh = d_hidden.at(t, j) + dh_next[j];
      const T d_o = dh * tc[j];
      const T dc = dc_next[j] + dh * o_g * (T(1) - tc[j] * tc[j]);
      d[j] = dc * g_g * i_g * (T(1) - i_g);
      d[hs + j] = dc * c_prev[j] * f_g * (T(1) - f_g);
      d[2 * hs + j] = dc * i_g * (T(1) - g_g * g_g);
      d[3 * hs + j] = d_o * o_g * (T(1) - o_g);
      dc_next[j] = dc * f_g;
    }
    std::fill(dh_next.begin(), dh_next.end(), T(0));
    MatMulTransBAdd(d, p.wh.data(), dh_next.data(), 1, g4, hs);
  }
  if (p.wx.has_grad()) {
    MatMulTransAAdd(cache.input.data(), dz.data(), p.wx.grad().data(), steps,
                    p.input_size(), g4);
  }
  if (p.wh.has_grad()) {
    MatMulTransAAdd(h_prev_rows.data(), dz.data(), p.wh.grad().data(), steps,
                    hs, g4);
  }
  if (p.b.has_grad()) {
    T* gb = p.b.grad().data();
    for (std::size_t t = 0; t < steps; ++t) {
      const T* d = dz.data() + t * g4;
      for (std::size_t j = 0; j < g4; ++j) gb[j] += d[j];
    }
  }
  LstmInputGrads<T> out;
  out.d_input = Tensor<T>({steps, p.input_size()});
  MatMulTransBAdd(dz.data(), p.wx.data(), out.d_input.data(), steps, g4,
                  p.input_size());
  out.d_h0 = std::move(dh_next);
  out.d_c0 = std::move(dc_next);
  return out;
}

// Single step for autoregressive decoding; updates (h, c) in place.
template <typename T>
void LstmStep(const LstmParams<T>& p, std::span<const T> x, std::vector<T>& h,
              std::vector<T>& c) {
  const std::size_t hs = p.hidden(), g4 = 4 * hs;
  std::vector<T> z(p.b.data(), p.b.data() + g4);
  MatMulAdd(x.data(), p.wx.data(), z.data(), 1, p.input_size(), g4);
  MatMulAdd(h.data(), p.wh.data(), z.data(), 1, hs, g4);
  for (std::size_t j = 0; j < hs; ++j) {
    const T i_g = Sigmoid(z[j]), f_g = Sigmoid(z[hs + j]);
    const T g_g = std::tanh(z[2 * hs + j]), o_g = Sigmoid(z[3 * hs + j]);
    c[j] = f_g * c[j] + i_g * g_g;
    h[j] = o_g * std::tanh(c[j]);
  }
}

// ---------------------------------------------------------------------------
// Stacked bidirectional LSTM.

template <typename T>
struct BiLstmLayer {
  LstmParams<T> fwd;
  LstmParams<T> bwd;

  BiLstmLayer() = default;
  BiLstmLayer(std::size_t input_size, std::size_t hidden)
      : fwd(input_size, hidden), bwd(input_size, hidden) {}
};

template <typename T>
struct BiLstmCache {
  std::vector<LstmCache<T>> fwd, bwd;
  std::vector<std::vector<T>> masks;  // dropout mask after each layer but the last
};

// Encodes a [T x d] sequence into [T x 2H] (forward state | backward state
// per position). Dropout is applied between layers in training mode only.
template <typename T>
Tensor<T> BiLstmEncode(const Tensor<T>& emb,
                       const std::vector<BiLstmLayer<T>>& layers,
                       double dropout_p, bool training, Rng* rng,
                       BiLstmCache<T>* cache) {
  if (emb.rank() != 2 || emb.dim(0) == 0) {
    Fail(ErrorCode::kPrecondition, "bilstm_encode requires a non-empty sequence");
  }
  if (layers.empty()) {
    Fail(ErrorCode::kPrecondition, "bilstm_encode requires at least one layer");
  }
  if (training && dropout_p > 0.0 && rng == nullptr) {
    Fail(ErrorCode::kPrecondition, "training-mode dropout requires an rng");
  }
  if (cache != nullptr) {
    cache->fwd.assign(layers.size(), {});
    cache->bwd.assign(layers.size(), {});
    cache->masks.assign(layers.size() > 0 ? layers.size() - 1 : 0, {});
  }
  const std::size_t steps = emb.dim(0);
  Tensor<T> x = emb;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t hs = layers[l].fwd.hidden();
    Tensor<T> f = LstmForward<T>(layers[l].fwd, x, false, {}, {},
                                 cache ? &cache->fwd[l] : nullptr);
    Tensor<T> b = LstmForward<T>(layers[l].bwd, x, true, {}, {},
                                 cache ? &cache->bwd[l] : nullptr);
    Tensor<T> out({steps, 2 * hs});
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(f.data() + t * hs, hs, out.data() + t * 2 * hs);
      std::copy_n(b.data() + t * hs, hs, out.data() + t * 2 * hs + hs);
    }
    if (l + 1 < layers.size() && training && dropout_p > 0.0) {
      std::vector<T> mask = DropoutMask<T>(out.size(), dropout_p, *rng);
      ApplyMask<T>(out.values(), mask);
      if (cache != nullptr) cache->masks[l] = std::move(mask);
    }
    x = std::move(out);
  }
  return x;
}

// Returns dL/d(emb) and accumulates parameter gradients.
template <typename T>
Tensor<T> BiLstmBackward(std::vector<BiLstmLayer<T>>& layers,
                         const BiLstmCache<T>& cache, const Tensor<T>& d_out) {
  Tensor<T> d = d_out;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const std::size_t steps = d.dim(0), hs = layers[l].fwd.hidden();
    if (l + 1 < layers.size() && !cache.masks[l].empty()) {
      ApplyMask<T>(d.values(), cache.masks[l]);
    }
    Tensor<T> df({steps, hs}), db({steps, hs});
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(d.data() + t * 2 * hs, hs, df.data() + t * hs);
      std::copy_n(d.data() + t * 2 * hs + hs, hs, db.data() + t * hs);
    }
    LstmInputGrads<T> gf = LstmBackward<T>(layers[l].fwd, cache.fwd[l], df, {}, {});
    LstmInputGrads<T> gb = LstmBackward<T>(layers[l].bwd, cache.bwd[l], db, {}, {});
    for (std::size_t i = 0; i < gf.d_input.size(); ++i) {
      gf.d_input[i] += gb.d_input[i];
    }
    d = std::move(gf.d_input);
  }
  return d;
}

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_LSTM_HPP_
