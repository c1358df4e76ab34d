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

#ifndef ADVNLU_TAGGER_NET_HPP_
#define ADVNLU_TAGGER_NET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advnlu/tensor/lstm.hpp"
#include "advnlu/tensor/ops.hpp"
#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tagger {

using tensor::Tensor;

// Embedding -> stacked biLSTM -> two projection heads. The intent head reads
// the final forward state concatenated with the final backward state; the
// slot head reads every position.
template <typename T>
struct TaggerNet {
  Tensor<T> embedding;  // [V x E]
  std::vector<tensor::BiLstmLayer<T>> encoder;
  Tensor<T> intent_w;   // [2H x intents]
  Tensor<T> intent_b;
  Tensor<T> slot_w;     // [2H x tags]
  Tensor<T> slot_b;
  double dropout = 0.0;

  TaggerNet() = default;
  TaggerNet(std::size_t vocab_size, std::size_t embedding_dim, std::size_t hidden,
            std::size_t layers, std::size_t n_intents, std::size_t n_tags,
            double dropout_p)
      : embedding({vocab_size, embedding_dim}),
        intent_w({2 * hidden, n_intents}),
        intent_b({n_intents}),
        slot_w({2 * hidden, n_tags}),
        slot_b({n_tags}),
        dropout(dropout_p) {
    for (std::size_t l = 0; l < layers; ++l) {
      encoder.emplace_back(l == 0 ? embedding_dim : 2 * hidden, hidden);
    }
  }

  std::size_t hidden() const { return encoder.front().fwd.hidden(); }
  std::size_t n_intents() const { return intent_b.dim(0); }
  std::size_t n_tags() const { return slot_b.dim(0); }

  tensor::ParamList<T> Params() {
    tensor::ParamList<T> out;
    out.emplace_back("embedding", &embedding);
    for (std::size_t l = 0; l < encoder.size(); ++l) {
      encoder[l].fwd.AppendTo(out, "encoder." + std::to_string(l) + ".fwd");
      encoder[l].bwd.AppendTo(out, "encoder." + std::to_string(l) + ".bwd");
    }
    out.emplace_back("intent.w", &intent_w);
    out.emplace_back("intent.b", &intent_b);
    out.emplace_back("slot.w", &slot_w);
    out.emplace_back("slot.b", &slot_b);
    return out;
  }

  void Init(tensor::Rng& rng, double scale) {
    for (auto& [name, t] : Params()) tensor::InitUniform(*t, scale, rng);
  }

  template <typename U>
  TaggerNet<U> Cast() const {
    TaggerNet<U> out(embedding.dim(0), embedding.dim(1), hidden(), encoder.size(),
                     n_intents(), n_tags(), dropout);
    TaggerNet<T> source = *this;
    tensor::CopyParams<T, U>(source.Params(), out.Params());
    return out;
  }
};

template <typename T>
struct TaggerForward {
  std::vector<std::int32_t> ids;
  tensor::BiLstmCache<T> encoder_cache;
  Tensor<T> encoded;          // [len x 2H], after head dropout
  std::vector<T> head_mask;   // empty outside training
  Tensor<T> intent_features;  // [1 x 2H]
  Tensor<T> intent_logits;    // [1 x intents]
  Tensor<T> slot_logits;      // [len x tags]
};

// Pre-softmax intent and slot scores for one token-id sequence.
template <typename T>
TaggerForward<T> Forward(const TaggerNet<T>& net, std::span<const std::int32_t> ids,
                         bool training, tensor::Rng* rng) {
  if (ids.empty()) {
    Fail(ErrorCode::kPrecondition, "tagger forward on an empty utterance");
  }
  TaggerForward<T> f;
  f.ids.assign(ids.begin(), ids.end());
  const Tensor<T> emb = tensor::EmbeddingLookup(net.embedding, ids);
  f.encoded = tensor::BiLstmEncode<T>(emb, net.encoder, net.dropout, training, rng,
                                      &f.encoder_cache);
  if (training && net.dropout > 0.0) {
    f.head_mask = tensor::DropoutMask<T>(f.encoded.size(), net.dropout, *rng);
    tensor::ApplyMask<T>(f.encoded.values(), f.head_mask);
  }
  const std::size_t len = ids.size(), h = net.hidden();
  f.intent_features = Tensor<T>({1, 2 * h});
  std::copy_n(f.encoded.data() + (len - 1) * 2 * h, h, f.intent_features.data());
  std::copy_n(f.encoded.data() + h, h, f.intent_features.data() + h);
  f.intent_logits = tensor::Affine(f.intent_features, net.intent_w, net.intent_b);
  f.slot_logits = tensor::Affine(f.encoded, net.slot_w, net.slot_b);
  return f;
}

// Accumulates parameter gradients given dL/d(intent logits) and
// dL/d(slot logits).
template <typename T>
void Backward(TaggerNet<T>& net, TaggerForward<T>& f, std::span<const T> d_intent,
              const Tensor<T>& d_slots) {
  const std::size_t len = f.ids.size(), h = net.hidden();
  Tensor<T> d_intent_t({1, net.n_intents()},
                       std::vector<T>(d_intent.begin(), d_intent.end()));
  f.intent_features.EnableGrad();
  f.intent_features.ZeroGrad();
  tensor::AffineBackward(f.intent_features, net.intent_w, net.intent_b, d_intent_t);
  f.encoded.EnableGrad();
  f.encoded.ZeroGrad();
  tensor::AffineBackward(f.encoded, net.slot_w, net.slot_b, d_slots);
  std::span<T> d_enc = f.encoded.grad();
  const auto df = f.intent_features.grad();
  for (std::size_t j = 0; j < h; ++j) {
    d_enc[(len - 1) * 2 * h + j] += df[j];
    d_enc[h + j] += df[h + j];
  }
  Tensor<T> d_encoded(f.encoded.shape(), std::vector<T>(d_enc.begin(), d_enc.end()));
  if (!f.head_mask.empty()) tensor::ApplyMask<T>(d_encoded.values(), f.head_mask);
  const Tensor<T> d_emb = tensor::BiLstmBackward<T>(net.encoder, f.encoder_cache, d_encoded);
  tensor::EmbeddingBackward(net.embedding, f.ids, d_emb);
}

}  // namespace advnlu::tagger

#endif  // ADVNLU_TAGGER_NET_HPP_
