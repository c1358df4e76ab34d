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

#ifndef ADVNLU_PARAPHRASER_AUTOENCODER_HPP_
#define ADVNLU_PARAPHRASER_AUTOENCODER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/corpus/vocab.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"
#include "advnlu/tensor/lstm.hpp"
#include "advnlu/tensor/ops.hpp"

namespace advnlu::paraphraser {

inline constexpr char kSeq2SeqSource[] = "seq2seq";

struct AutoencoderConfig {
  std::size_t hidden_size = 64;
  std::size_t embedding_dim = 32;
  // 0 means 2 x input length + 5.
  std::size_t max_decode_len = 0;
  double noise_sigma = 0.3;
  std::size_t beam_width = 5;
  std::size_t epochs = 30;
  double learning_rate = 0.01;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  double init_scale = 0.1;
};

void ValidateAutoencoderConfig(const AutoencoderConfig& config);
std::string AutoencoderConfigToJson(const AutoencoderConfig& config);
AutoencoderConfig AutoencoderConfigFromJson(const std::string& json_text);

// Shared embedding, one-layer LSTM encoder and decoder, no attention. The
// decoder starts from the encoder's final (h, c).
template <typename T>
struct Seq2SeqNet {
  tensor::Tensor<T> embedding;  // [V x E]
  tensor::LstmParams<T> encoder;
  tensor::LstmParams<T> decoder;
  tensor::Tensor<T> out_w;  // [H x V]
  tensor::Tensor<T> out_b;

  Seq2SeqNet() = default;
  Seq2SeqNet(std::size_t vocab_size, std::size_t embedding_dim, std::size_t hidden)
      : embedding({vocab_size, embedding_dim}),
        encoder(embedding_dim, hidden),
        decoder(embedding_dim, hidden),
        out_w({hidden, vocab_size}),
        out_b({vocab_size}) {}

  std::size_t hidden() const { return encoder.hidden(); }
  std::size_t vocab_size() const { return embedding.dim(0); }

  tensor::ParamList<T> Params() {
    tensor::ParamList<T> out;
    out.emplace_back("embedding", &embedding);
    encoder.AppendTo(out, "encoder");
    decoder.AppendTo(out, "decoder");
    out.emplace_back("out.w", &out_w);
    out.emplace_back("out.b", &out_b);
    return out;
  }
};

// Mean per-token cross-entropy of reconstructing `ids` (then <eos>) with
// teacher forcing. With `backward`, gradients accumulate into `net`.
template <typename T>
T ReconstructionLoss(Seq2SeqNet<T>& net, std::span<const std::int32_t> ids,
                     bool backward) {
  using tensor::Tensor;
  if (ids.empty()) Fail(ErrorCode::kPrecondition, "autoencoder input is empty");
  const std::size_t n = ids.size();
  const Tensor<T> enc_in = tensor::EmbeddingLookup(net.embedding, ids);
  tensor::LstmCache<T> enc_cache;
  const Tensor<T> enc_h =
      tensor::LstmForward<T>(net.encoder, enc_in, false, {}, {}, &enc_cache);
  const std::span<const T> h_last = enc_h.row(n - 1);
  const std::span<const T> c_last = enc_cache.cell.row(n - 1);

  std::vector<std::int32_t> dec_ids{corpus::Vocab::kBos};
  dec_ids.insert(dec_ids.end(), ids.begin(), ids.end());
  std::vector<std::int32_t> targets(ids.begin(), ids.end());
  targets.push_back(corpus::Vocab::kEos);
  const Tensor<T> dec_in = tensor::EmbeddingLookup(net.embedding, dec_ids);
  tensor::LstmCache<T> dec_cache;
  Tensor<T> dec_h =
      tensor::LstmForward<T>(net.decoder, dec_in, false, h_last, c_last, &dec_cache);
  const Tensor<T> logits = tensor::Affine(dec_h, net.out_w, net.out_b);
  const std::size_t steps = targets.size();
  const T scale = T(1) / static_cast<T>(steps);
  Tensor<T> d_logits(logits.shape());
  T loss = T(0);
  for (std::size_t t = 0; t < steps; ++t) {
    std::span<T> d = backward ? d_logits.row(t) : std::span<T>();
    loss += tensor::SoftmaxCrossEntropy<T>(logits.row(t),
                                           static_cast<std::size_t>(targets[t]), d, scale);
  }
  loss *= scale;
  if (!backward) return loss;

  dec_h.EnableGrad();
  dec_h.ZeroGrad();
  tensor::AffineBackward(dec_h, net.out_w, net.out_b, d_logits);
  const Tensor<T> d_dec_h(dec_h.shape(),
                          std::vector<T>(dec_h.grad().begin(), dec_h.grad().end()));
  const auto dec_grads =
      tensor::LstmBackward<T>(net.decoder, dec_cache, d_dec_h, {}, {});
  tensor::EmbeddingBackward(net.embedding, dec_ids, dec_grads.d_input);
  const Tensor<T> d_enc_h(enc_h.shape());
  const auto enc_grads = tensor::LstmBackward<T>(net.encoder, enc_cache, d_enc_h,
                                                 dec_grads.d_h0, dec_grads.d_c0);
  tensor::EmbeddingBackward(net.embedding, ids, enc_grads.d_input);
  return loss;
}

struct Hypothesis {
  std::vector<std::int32_t> ids;  // without <eos>
  double logprob = 0.0;
  bool truncated = false;

  double normalized_score() const {
    return logprob / static_cast<double>(ids.size() + (truncated ? 0 : 1));
  }
};

class Seq2SeqModel {
 public:
  Seq2SeqModel(AutoencoderConfig config, corpus::Vocab vocab);

  const AutoencoderConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }
  const Seq2SeqNet<float>& net() const { return net_; }
  Seq2SeqNet<float>& mutable_net() { return net_; }

  // Final encoder (h, c) for an utterance.
  void Encode(const corpus::Utterance& utterance, std::vector<float>& h,
              std::vector<float>& c) const;

  std::size_t MaxDecodeLen(const corpus::Utterance& utterance) const;

  // Argmax decoding from (h, c); ties go to the lower token id.
  Hypothesis Greedy(std::vector<float> h, std::vector<float> c, std::size_t max_len) const;

  // Beam search keeping the `width` best partial hypotheses by cumulative
  // log-probability. Finished hypotheses are ranked by log-probability per
  // generated token (including <eos>); hypotheses still open at `max_len`
  // are returned flagged as truncated.
  std::vector<Hypothesis> Beam(std::vector<float> h, std::vector<float> c,
                               std::size_t width, std::size_t max_len) const;

  std::string Detokenize(const Hypothesis& hyp) const;

  void Save(const std::string& dir) const;
  static Seq2SeqModel Load(const std::string& dir);

 private:
  AutoencoderConfig config_;
  corpus::Vocab vocab_;
  Seq2SeqNet<float> net_;
};

struct AutoencoderResult {
  Seq2SeqModel model;
  std::vector<double> epoch_losses;
};

// Trains on `corpus` (vocabulary built from it). Throws kPrecondition on an
// empty corpus and kTraining on a non-finite loss.
AutoencoderResult TrainAutoencoder(
    const std::vector<corpus::Utterance>& corpus, const AutoencoderConfig& config,
    const std::function<void(std::size_t epoch, double loss)>& on_epoch = {});

// Greedy reconstruction without noise.
Hypothesis GreedyDecode(const Seq2SeqModel& model, const corpus::Utterance& utterance);

// Adds N(0, sigma^2) noise to the encoder's final h and c, runs beam search
// of width k and returns the deduplicated beams. With sigma = 0 no random
// numbers are drawn.
ParaphraseSet PerturbDecode(const Seq2SeqModel& model, const corpus::Utterance& utterance,
                            double sigma, std::size_t k, std::uint64_t seed);

}  // namespace advnlu::paraphraser

#endif  // ADVNLU_PARAPHRASER_AUTOENCODER_HPP_
