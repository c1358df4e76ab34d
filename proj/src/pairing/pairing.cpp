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

#include "advnlu/pairing/pairing.hpp"

#include <cmath>

namespace advnlu::pairing {
namespace {

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void ValidatePairingConfig(const PairingConfig& c) {
  if (!std::isfinite(c.lambda_sf) || !std::isfinite(c.lambda_a) ||
      c.lambda_sf < 0.0 || c.lambda_a < 0.0) {
    Fail(ErrorCode::kValidation, "pairing weights must be finite and >= 0");
  }
  if (c.pair_cap < 1) Fail(ErrorCode::kValidation, "pair_cap must be >= 1");
}

GroupKey KeyOf(const corpus::Annotation& annotation) {
  GroupKey key;
  key.intent = annotation.intent;
  for (const auto& s : annotation.slots) key.slot_labels.push_back(s.label);
  std::sort(key.slot_labels.begin(), key.slot_labels.end());
  return key;
}

std::vector<PairGroup> GroupByAnnotation(std::span<const corpus::Annotation> batch) {
  std::vector<PairGroup> groups;
  std::map<GroupKey, std::size_t> where;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    GroupKey key = KeyOf(batch[i]);
    auto it = where.find(key);
    if (it == where.end()) {
      where.emplace(key, groups.size());
      groups.push_back({std::move(key), {i}});
    } else {
      groups[it->second].members.push_back(i);
    }
  }
  return groups;
}

std::vector<IndexPair> SamplePairs(const PairGroup& group, std::size_t cap,
                                   std::uint64_t seed) {
  if (cap < 1) Fail(ErrorCode::kPrecondition, "pair cap must be >= 1");
  std::vector<IndexPair> all;
  const auto& m = group.members;
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) {
      all.emplace_back(std::min(m[a], m[b]), std::max(m[a], m[b]));
    }
  }
  if (all.size() > cap) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(cap);
  }
  std::sort(all.begin(), all.end());
  return all;
}

SlotAlignment AlignSlots(const std::vector<corpus::SlotSpan>& first,
                         const std::vector<corpus::SlotSpan>& second) {
  // Positions of each label's occurrences on the second side, left to right.
  std::map<std::string, std::vector<std::size_t>> second_by_label;
  std::vector<std::size_t> order(second.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return second[a].start < second[b].start;
  });
  for (std::size_t i : order) second_by_label[second[i].label].push_back(i);

  std::vector<std::size_t> first_order(first.size());
  for (std::size_t i = 0; i < first_order.size(); ++i) first_order[i] = i;
  std::stable_sort(first_order.begin(), first_order.end(),
                   [&](std::size_t a, std::size_t b) { return first[a].start < first[b].start; });

  std::map<std::string, std::size_t> used;
  SlotAlignment out;
  for (std::size_t i : first_order) {
    const std::string& label = first[i].label;
    auto it = second_by_label.find(label);
    if (it == second_by_label.end()) continue;
    std::size_t& k = used[label];
    if (k >= it->second.size()) continue;
    out.push_back({i, it->second[k], label});
    ++k;
  }
  return out;
}

std::vector<IndexPair> CleanPairs(const std::vector<PairGroup>& groups, std::size_t cap,
                                  std::uint64_t seed) {
  std::vector<IndexPair> pairs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto sampled = SamplePairs(groups[g], cap, Mix(seed, g));
    pairs.insert(pairs.end(), sampled.begin(), sampled.end());
  }
  return pairs;
}

std::vector<IndexPair> AdversarialPairs(const std::vector<AdvGroup>& groups,
                                        bool include_para_para) {
  std::vector<IndexPair> pairs;
  for (const AdvGroup& g : groups) {
    for (std::size_t p : g.paraphrases) pairs.emplace_back(g.original, p);
  }
  if (include_para_para) {
    for (const AdvGroup& g : groups) {
      for (std::size_t a = 0; a < g.paraphrases.size(); ++a) {
        for (std::size_t b = a + 1; b < g.paraphrases.size(); ++b) {
          pairs.emplace_back(g.paraphrases[a], g.paraphrases[b]);
        }
      }
    }
  }
  return pairs;
}

}  // namespace advnlu::pairing
