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

#ifndef ADVNLU_TAGGER_TRAIN_HPP_
#define ADVNLU_TAGGER_TRAIN_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/corpus/vocab.hpp"
#include "advnlu/pairing/pairing.hpp"
#include "advnlu/tagger/config.hpp"
#include "advnlu/tagger/model.hpp"
#include "advnlu/tagger/net.hpp"

namespace advnlu::tagger {

// splitmix64 finalizer over the combined inputs.
inline std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL) ^
                    (c * 0xBF58476D1CE4E5B9ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One encoded sentence of a training batch.
struct TrainItem {
  std::vector<std::int32_t> ids;
  std::size_t intent = 0;
  std::vector<std::size_t> tags;
  corpus::Annotation annotation;  // spans drive grouping and slot alignment
  double task_weight = 1.0;       // 0 keeps the item out of the task loss
  bool clean = false;             // takes part in clean logit pairing
  std::uint64_t dropout_seed = 0;
};

// Items plus the number of loss units they form. A unit is a clean sentence
// together with the augmented sentences derived from it, or a lone augmented
// sentence whose parent is absent.
struct TrainBatch {
  std::vector<TrainItem> items;
  std::size_t units = 1;
  std::vector<pairing::AdvGroup> adv_groups;
  std::uint64_t pair_seed = 0;
};

struct BatchLossValue {
  double task = 0.0;
  double clean_task = 0.0;
  double augmented_task = 0.0;
  double clean_pair = 0.0;
  double adv_pair = 0.0;
  double total = 0.0;
  std::size_t clean_pairs = 0;
  std::size_t adv_pairs = 0;
};

// Encodes an example against the model's vocabulary and label space.
// Throws kValidation when a label is unknown.
TrainItem MakeTrainItem(const corpus::Vocab& vocab, const corpus::LabelSpace& labels,
                        const corpus::LabeledExample& example, double task_weight,
                        bool clean, std::uint64_t dropout_seed);

// Full batch objective
//   (1/U) sum_items w * (CE(intent) + mean_t CE(tag_t))
//   + clean pairing + adversarial pairing
// With `backward`, parameter gradients of `net` are accumulated (callers
// zero them first). Dropout masks come from each item's own seed, so the
// value is a deterministic function of the parameters.
template <typename T>
BatchLossValue BatchLoss(TaggerNet<T>& net, const TrainBatch& batch,
                         const pairing::PairingConfig& pairing, bool training,
                         bool backward) {
  const std::size_t n = batch.items.size();
  const T inv_units = T(1) / static_cast<T>(batch.units);
  std::vector<TaggerForward<T>> fwd;
  fwd.reserve(n);
  std::vector<std::vector<T>> d_intent(n);
  std::vector<Tensor<T>> d_slots;
  d_slots.reserve(n);
  BatchLossValue out;
  for (std::size_t i = 0; i < n; ++i) {
    const TrainItem& item = batch.items[i];
    tensor::Rng rng(item.dropout_seed);
    fwd.push_back(Forward<T>(net, item.ids, training, &rng));
    TaggerForward<T>& f = fwd.back();
    d_intent[i].assign(net.n_intents(), T(0));
    d_slots.emplace_back(f.slot_logits.shape());
    if (item.task_weight == 0.0) continue;
    const T w = static_cast<T>(item.task_weight) * inv_units;
    const std::size_t len = item.ids.size();
    const T tok_scale = w / static_cast<T>(len);
    std::span<T> di = backward ? std::span<T>(d_intent[i]) : std::span<T>();
    T loss = tensor::SoftmaxCrossEntropy<T>(f.intent_logits.values(), item.intent, di, w) * w;
    T slot_sum = T(0);
    for (std::size_t t = 0; t < len; ++t) {
      std::span<T> ds = backward ? d_slots[i].row(t) : std::span<T>();
      slot_sum += tensor::SoftmaxCrossEntropy<T>(f.slot_logits.row(t), item.tags[t], ds,
                                                 tok_scale);
    }
    loss += slot_sum * tok_scale;
    out.task += static_cast<double>(loss);
    (item.clean ? out.clean_task : out.augmented_task) += static_cast<double>(loss);
  }

  std::vector<pairing::SentenceLogits<T>> logits(n);
  std::vector<pairing::SentenceGrads<T>> grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    logits[i] = {fwd[i].intent_logits.values(), fwd[i].slot_logits.values(),
                 net.n_tags(), &batch.items[i].annotation.slots};
    grads[i] = {std::span<T>(d_intent[i]), d_slots[i].values()};
  }
  std::span<pairing::SentenceGrads<T>> grad_span =
      backward ? std::span<pairing::SentenceGrads<T>>(grads)
               : std::span<pairing::SentenceGrads<T>>();

  if (pairing.clean) {
    std::vector<std::size_t> clean_idx;
    std::vector<corpus::Annotation> clean_ann;
    for (std::size_t i = 0; i < n; ++i) {
      if (batch.items[i].clean) {
        clean_idx.push_back(i);
        clean_ann.push_back(batch.items[i].annotation);
      }
    }
    std::vector<pairing::PairGroup> groups = pairing::GroupByAnnotation(clean_ann);
    for (auto& g : groups) {
      for (auto& m : g.members) m = clean_idx[m];
    }
    const auto value = pairing::CleanPairLoss<T>(logits, groups, pairing,
                                                 batch.pair_seed, grad_span);
    out.clean_pair = value.loss;
    out.clean_pairs = value.pairs;
  }
  if (pairing.adversarial) {
    const auto value = pairing::AdvPairLoss<T>(logits, batch.adv_groups, pairing, grad_span);
    out.adv_pair = value.loss;
    out.adv_pairs = value.pairs;
  }
  out.total = out.task + out.clean_pair + out.adv_pair;

  if (backward) {
    for (std::size_t i = 0; i < n; ++i) {
      Backward<T>(net, fwd[i], d_intent[i], d_slots[i]);
    }
  }
  return out;
}

struct TrainData {
  std::vector<corpus::LabeledExample> clean;
  // Extra task-loss examples; each contributes with its own weight.
  std::vector<corpus::LabeledExample> augmented;
  // Adversarial pairing partners, linked to clean sentences by parent_id.
  std::vector<corpus::LabeledExample> paraphrases;
  std::vector<corpus::LabeledExample> dev;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t batches = 0;
  double loss = 0.0;  // mean batch total
  double clean_task = 0.0;
  double augmented_task = 0.0;
  double clean_pair = 0.0;
  double adv_pair = 0.0;
  std::size_t clean_pairs = 0;
  std::size_t adv_pairs = 0;
  bool has_dev = false;
  double dev_exact_match = 0.0;
  double seconds = 0.0;
};

std::string EpochRecordToJson(const EpochRecord& record);

struct TrainResult {
  TaggerModel model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains a tagger. The vocabulary covers every training input (clean,
// augmented and pairing partners); the label space comes from the clean
// examples. Throws kPrecondition when the clean set is empty or adversarial
// pairing finds no linked paraphrase, kValidation on unknown labels, and
// kTraining on a non-finite batch loss.
TrainResult Train(const TrainData& data, const TaggerConfig& config,
                  const pairing::PairingConfig& pairing,
                  const EpochCallback& on_epoch = {});

}  // namespace advnlu::tagger

#endif  // ADVNLU_TAGGER_TRAIN_HPP_
