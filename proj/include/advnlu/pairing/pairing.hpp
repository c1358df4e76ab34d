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

#ifndef ADVNLU_PAIRING_PAIRING_HPP_
#define ADVNLU_PAIRING_PAIRING_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/error.hpp"
#include "advnlu/tensor/ops.hpp"

namespace advnlu::pairing {

struct PairingConfig {
  bool clean = false;        // same-annotation pairing within a batch
  bool adversarial = false;  // original <-> paraphrase pairing
  double lambda_sf = 0.01;
  double lambda_a = 0.01;
  std::size_t pair_cap = 10;  // sampled pairs per annotation group
  bool include_para_para = true;
  std::uint64_t seed = 0;
};

void ValidatePairingConfig(const PairingConfig& config);

// Intent plus the sorted multiset of slot labels. Slot values are ignored.
struct GroupKey {
  std::string intent;
  std::vector<std::string> slot_labels;

  auto operator<=>(const GroupKey&) const = default;
};

GroupKey KeyOf(const corpus::Annotation& annotation);

struct PairGroup {
  GroupKey key;
  std::vector<std::size_t> members;  // indices into the batch, ascending
};

// Partition of batch indices by annotation key, in order of first
// appearance. Singleton groups are kept; they simply yield no pairs.
std::vector<PairGroup> GroupByAnnotation(
    std::span<const corpus::Annotation> batch);

using IndexPair = std::pair<std::size_t, std::size_t>;

// All unordered member pairs when there are at most `cap`, otherwise a
// seeded uniform sample of `cap` distinct pairs. Pairs hold batch indices
// with first < second and come back sorted.
std::vector<IndexPair> SamplePairs(const PairGroup& group, std::size_t cap,
                                   std::uint64_t seed);

struct AlignedSlot {
  std::size_t first = 0;   // entity index in the first sentence
  std::size_t second = 0;  // entity index in the second sentence
  std::string label;

  bool operator==(const AlignedSlot&) const = default;
};

using SlotAlignment = std::vector<AlignedSlot>;

// For every label, the i-th entity carrying it on one side is matched with
// the i-th on the other, left to right; unmatched entities drop out. The
// result is sorted by position in the first sentence.
SlotAlignment AlignSlots(const std::vector<corpus::SlotSpan>& first,
                         const std::vector<corpus::SlotSpan>& second);

// Logits of one sentence as seen by the pairing losses. `slots` is the
// row-major [n_tokens x n_tags] slot logit matrix.
template <typename T>
struct SentenceLogits {
  std::span<const T> intent;
  std::span<const T> slots;
  std::size_t n_tags = 0;
  // Slot entities used for alignment (gold for clean sentences, self-trained
  // tags for paraphrases).
  const std::vector<corpus::SlotSpan>* entities = nullptr;
};

// Gradient buffers matching a SentenceLogits; empty spans are skipped.
template <typename T>
struct SentenceGrads {
  std::span<T> intent;
  std::span<T> slots;
};

// Mean of the per-token slot logit rows covering `span`.
template <typename T>
std::vector<T> EntityLogits(const SentenceLogits<T>& s, const corpus::SlotSpan& span) {
  std::vector<T> out(s.n_tags, T(0));
  const auto len = static_cast<T>(span.end - span.start + 1);
  for (int t = span.start; t <= span.end; ++t) {
    const T* row = s.slots.data() + static_cast<std::size_t>(t) * s.n_tags;
    for (std::size_t j = 0; j < s.n_tags; ++j) out[j] += row[j];
  }
  for (T& v : out) v /= len;
  return out;
}

// One pair term: mse(intent) + sum over aligned entities of mse(entity
// logits). With grads, adds scale * d(term) into both sentences' buffers.
template <typename T>
T PairTerm(const SentenceLogits<T>& a, const SentenceLogits<T>& b, T scale,
           SentenceGrads<T>* ga, SentenceGrads<T>* gb) {
  T term = tensor::Mse<T>(a.intent, b.intent);
  if (ga != nullptr) {
    tensor::MseBackward<T>(a.intent, b.intent, scale, ga->intent, gb->intent);
  }
  static const std::vector<corpus::SlotSpan> kNone;
  const auto& ea = a.entities ? *a.entities : kNone;
  const auto& eb = b.entities ? *b.entities : kNone;
  for (const AlignedSlot& al : AlignSlots(ea, eb)) {
    const corpus::SlotSpan& sa = ea[al.first];
    const corpus::SlotSpan& sb = eb[al.second];
    const std::vector<T> la = EntityLogits(a, sa);
    const std::vector<T> lb = EntityLogits(b, sb);
    term += tensor::Mse<T>(la, lb);
    if (ga == nullptr) continue;
    std::vector<T> da(la.size(), T(0)), db(lb.size(), T(0));
    tensor::MseBackward<T>(la, lb, scale, da, db);
    const auto spread = [](const std::vector<T>& d, const corpus::SlotSpan& span,
                           std::span<T> dst, std::size_t n_tags) {
      if (dst.empty()) return;
      const auto len = static_cast<T>(span.end - span.start + 1);
      for (int t = span.start; t <= span.end; ++t) {
        T* row = dst.data() + static_cast<std::size_t>(t) * n_tags;
        for (std::size_t j = 0; j < n_tags; ++j) row[j] += d[j] / len;
      }
    };
    spread(da, sa, ga->slots, a.n_tags);
    spread(db, sb, gb->slots, b.n_tags);
  }
  return term;
}

struct PairLossValue {
  double loss = 0.0;
  std::size_t pairs = 0;  // P
};

// (lambda / P) * sum of PairTerm over `pairs`; exactly 0 when P = 0.
template <typename T>
PairLossValue WeightedPairSum(std::span<const SentenceLogits<T>> logits,
                              const std::vector<IndexPair>& pairs, double lambda,
                              std::span<SentenceGrads<T>> grads) {
  PairLossValue out;
  out.pairs = pairs.size();
  if (pairs.empty()) return out;
  const T scale = static_cast<T>(lambda / static_cast<double>(pairs.size()));
  T sum = T(0);
  for (const auto& [i, j] : pairs) {
    if (i >= logits.size() || j >= logits.size()) {
      Fail(ErrorCode::kIndex, "pair index outside the batch");
    }
    SentenceGrads<T>* gi = grads.empty() ? nullptr : &grads[i];
    SentenceGrads<T>* gj = grads.empty() ? nullptr : &grads[j];
    sum += PairTerm<T>(logits[i], logits[j], scale, gi, gj);
  }
  out.loss = static_cast<double>(scale * sum);
  return out;
}

// Pairs drawn for clean logit pairing: per group, SamplePairs with a seed
// derived from `seed` and the group's position.
std::vector<IndexPair> CleanPairs(const std::vector<PairGroup>& groups,
                                  std::size_t cap, std::uint64_t seed);

// lambda_sf / P * sum over sampled same-annotation pairs.
template <typename T>
PairLossValue CleanPairLoss(std::span<const SentenceLogits<T>> logits,
                            const std::vector<PairGroup>& groups,
                            const PairingConfig& config, std::uint64_t seed,
                            std::span<SentenceGrads<T>> grads = {}) {
  return WeightedPairSum<T>(logits, CleanPairs(groups, config.pair_cap, seed),
                            config.lambda_sf, grads);
}

// An original sentence and its paraphrases, as batch indices.
struct AdvGroup {
  std::size_t original = 0;
  std::vector<std::size_t> paraphrases;
};

// Original-paraphrase pairs for every group, followed by paraphrase-
// paraphrase pairs when `include_para_para`.
std::vector<IndexPair> AdversarialPairs(const std::vector<AdvGroup>& groups,
                                        bool include_para_para);

// lambda_a / P * sum over original-paraphrase (and paraphrase-paraphrase)
// pairs, P counting both kinds.
template <typename T>
PairLossValue AdvPairLoss(std::span<const SentenceLogits<T>> logits,
                          const std::vector<AdvGroup>& groups,
                          const PairingConfig& config,
                          std::span<SentenceGrads<T>> grads = {}) {
  return WeightedPairSum<T>(logits, AdversarialPairs(groups, config.include_para_para),
                            config.lambda_a, grads);
}

}  // namespace advnlu::pairing

#endif  // ADVNLU_PAIRING_PAIRING_HPP_
