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

#ifndef ADVNLU_TAGGER_MODEL_HPP_
#define ADVNLU_TAGGER_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/corpus/vocab.hpp"
#include "advnlu/tagger/config.hpp"
#include "advnlu/tagger/net.hpp"

namespace advnlu::tagger {

struct Prediction {
  std::string intent;
  std::vector<float> intent_logits;
  corpus::TagSequence slot_tags;                // after BIO repair
  std::vector<std::vector<float>> slot_logits;  // one row per token
  std::vector<corpus::SlotSpan> slots;

  corpus::Annotation annotation() const { return {intent, slots}; }
};

// Decision rule shared by every predictor: intent = argmax (lowest index on
// ties), slot tags = per-token argmax followed by BIO repair.
Prediction DecodeLogits(const corpus::LabelSpace& labels,
                        std::span<const float> intent_logits,
                        const std::vector<std::vector<float>>& slot_logits);

class TaggerModel {
 public:
  // Builds a freshly initialized model; initialization uses config.seed.
  TaggerModel(TaggerConfig config, corpus::Vocab vocab, corpus::LabelSpace labels);

  const TaggerConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }
  const corpus::LabelSpace& labels() const { return labels_; }
  const TaggerNet<float>& net() const { return net_; }
  TaggerNet<float>& mutable_net() { return net_; }

  std::vector<std::int32_t> Encode(const corpus::Utterance& utterance) const;

  // Eval-mode logits: intent scores and one row of tag scores per token.
  TaggerForward<float> Logits(const corpus::Utterance& utterance) const;

  Prediction Predict(const corpus::Utterance& utterance) const;

  // Writes <dir>/params.ckpt and <dir>/meta.json (config, labels, vocab).
  void Save(const std::string& dir) const;
  static TaggerModel Load(const std::string& dir);

 private:
  TaggerConfig config_;
  corpus::Vocab vocab_;
  corpus::LabelSpace labels_;
  TaggerNet<float> net_;
};

// True when intent and the full slot-span set both match.
bool ExactMatch(const corpus::Annotation& predicted, const corpus::Annotation& gold);

// Fraction of sentences that match exactly. Throws kPrecondition on a
// length mismatch; an empty list scores 0.
double ExactMatchAccuracy(const std::vector<Prediction>& predictions,
                          const std::vector<corpus::Annotation>& golds);

// Majority vote over member predictions for the intent and for every
// token's tag; ties go to the larger summed logit, then the lower index.
// The returned logits are vote-dominated scores, so argmax reproduces the
// vote. Throws kPrecondition on an empty list or mismatched label spaces.
Prediction EnsemblePredict(std::span<const TaggerModel* const> models,
                           const corpus::Utterance& utterance);

// Self-training annotation for a paraphrase: intent copied from the
// original's gold label, slots predicted by `model` on the paraphrase.
corpus::Annotation SelfTrainTag(const TaggerModel& model,
                                const corpus::Utterance& paraphrase,
                                const corpus::LabeledExample& original);

}  // namespace advnlu::tagger

#endif  // ADVNLU_TAGGER_MODEL_HPP_
