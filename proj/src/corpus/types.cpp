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

#include "advnlu/corpus/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "advnlu/error.hpp"

namespace advnlu::corpus {

std::string Lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(Lowercase(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(Lowercase(current));
  return tokens;
}

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Utterance MakeUtterance(std::string id, std::string_view text) {
  Utterance u;
  u.id = std::move(id);
  u.text = std::string(text);
  u.tokens = Tokenize(text);
  if (u.tokens.empty()) {
    Fail(ErrorCode::kPrecondition, "utterance '" + u.id + "' has no tokens");
  }
  return u;
}

void ValidateSpans(const std::vector<SlotSpan>& slots, std::size_t n_tokens) {
  int previous_end = -1;
  for (const SlotSpan& s : slots) {
    if (s.label.empty()) {
      Fail(ErrorCode::kValidation, "slot span has an empty label");
    }
    if (s.start < 0 || s.end < s.start ||
        static_cast<std::size_t>(s.end) >= n_tokens) {
      Fail(ErrorCode::kValidation,
           "slot span " + s.label + ":" + std::to_string(s.start) + "-" +
               std::to_string(s.end) + " is out of range for " +
               std::to_string(n_tokens) + " tokens");
    }
    if (s.start <= previous_end) {
      Fail(ErrorCode::kValidation, "slot span " + s.label + ":" +
                                       std::to_string(s.start) + "-" +
                                       std::to_string(s.end) +
                                       " overlaps or is out of order");
    }
    previous_end = s.end;
  }
}

const char* OriginName(Origin origin) {
  switch (origin) {
    case Origin::kClean: return "clean";
    case Origin::kAugmented: return "augmented";
    case Origin::kAdversarial: return "adversarial";
  }
  return "clean";
}

std::optional<Origin> ParseOrigin(std::string_view name) {
  if (name == "clean") return Origin::kClean;
  if (name == "augmented") return Origin::kAugmented;
  if (name == "adversarial") return Origin::kAdversarial;
  return std::nullopt;
}

LabelSpace::LabelSpace(std::vector<std::string> intents,
                       std::vector<std::string> slot_labels)
    : intents_(std::move(intents)), slot_labels_(std::move(slot_labels)) {
  for (std::size_t i = 0; i < intents_.size(); ++i) {
    if (!intent_index_.emplace(intents_[i], i).second) {
      Fail(ErrorCode::kValidation, "duplicate intent label '" + intents_[i] + "'");
    }
  }
  tags_.emplace_back(kOutsideTag);
  for (std::size_t i = 0; i < slot_labels_.size(); ++i) {
    if (!slot_index_.emplace(slot_labels_[i], i).second) {
      Fail(ErrorCode::kValidation, "duplicate slot label '" + slot_labels_[i] + "'");
    }
    tags_.push_back("B-" + slot_labels_[i]);
    tags_.push_back("I-" + slot_labels_[i]);
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) tag_index_.emplace(tags_[i], i);
}

LabelSpace LabelSpace::FromExamples(const std::vector<LabeledExample>& examples) {
  std::set<std::string> intents, slots;
  for (const LabeledExample& ex : examples) {
    intents.insert(ex.annotation.intent);
    for (const SlotSpan& s : ex.annotation.slots) slots.insert(s.label);
  }
  return LabelSpace({intents.begin(), intents.end()}, {slots.begin(), slots.end()});
}

std::optional<std::size_t> LabelSpace::IntentIndex(std::string_view intent) const {
  auto it = intent_index_.find(intent);
  if (it == intent_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LabelSpace::SlotIndex(std::string_view label) const {
  auto it = slot_index_.find(label);
  if (it == slot_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LabelSpace::TagIndex(std::string_view tag) const {
  auto it = tag_index_.find(tag);
  if (it == tag_index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace advnlu::corpus
