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

#ifndef ADVNLU_CORPUS_TYPES_HPP_
#define ADVNLU_CORPUS_TYPES_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace advnlu::corpus {

// Lowercases ASCII letters; other bytes (including UTF-8 sequences) pass
// through unchanged.
std::string Lowercase(std::string_view text);

// Lowercase + split on runs of whitespace.
std::vector<std::string> Tokenize(std::string_view text);

// Tokens joined by single spaces.
std::string JoinTokens(const std::vector<std::string>& tokens);

struct Utterance {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;

  // The canonical text: tokens joined with single spaces.
  std::string normalized() const { return JoinTokens(tokens); }
};

// Builds an utterance from raw text. Throws kPrecondition on empty text.
Utterance MakeUtterance(std::string id, std::string_view text);

struct SlotSpan {
  std::string label;
  int start = 0;  // inclusive token index
  int end = 0;    // inclusive token index

  bool operator==(const SlotSpan&) const = default;
  auto operator<=>(const SlotSpan&) const = default;
};

struct Annotation {
  std::string intent;
  std::vector<SlotSpan> slots;

  bool operator==(const Annotation&) const = default;
};

// Throws kValidation unless every span lies in [0, n_tokens) and spans are
// sorted by start and non-overlapping.
void ValidateSpans(const std::vector<SlotSpan>& slots, std::size_t n_tokens);

enum class Origin { kClean, kAugmented, kAdversarial };

const char* OriginName(Origin origin);
std::optional<Origin> ParseOrigin(std::string_view name);

struct LabeledExample {
  Utterance utterance;
  Annotation annotation;
  Origin origin = Origin::kClean;
  double weight = 1.0;
  // Id of the clean utterance this example was derived from, if any.
  std::string parent_id;
  // Generation source descriptor, e.g. "bt-es" or "seq2seq".
  std::string source;
};

using TagSequence = std::vector<std::string>;

inline constexpr std::string_view kOutsideTag = "O";

// Intent and slot inventories plus the derived BIO tag set
//   {O} + {B-l, I-l : l in slot_labels}
class LabelSpace {
 public:
  LabelSpace() : LabelSpace({}, {}) {}
  LabelSpace(std::vector<std::string> intents,
             std::vector<std::string> slot_labels);

  // Label space of `examples`, labels sorted lexicographically.
  static LabelSpace FromExamples(const std::vector<LabeledExample>& examples);

  const std::vector<std::string>& intents() const { return intents_; }
  const std::vector<std::string>& slot_labels() const { return slot_labels_; }
  const std::vector<std::string>& tags() const { return tags_; }

  std::optional<std::size_t> IntentIndex(std::string_view intent) const;
  std::optional<std::size_t> SlotIndex(std::string_view label) const;
  std::optional<std::size_t> TagIndex(std::string_view tag) const;

  bool operator==(const LabelSpace& other) const {
    return intents_ == other.intents_ && slot_labels_ == other.slot_labels_;
  }

 private:
  std::vector<std::string> intents_;
  std::vector<std::string> slot_labels_;
  std::vector<std::string> tags_;
  std::map<std::string, std::size_t, std::less<>> intent_index_;
  std::map<std::string, std::size_t, std::less<>> slot_index_;
  std::map<std::string, std::size_t, std::less<>> tag_index_;
};

}  // namespace advnlu::corpus

#endif  // ADVNLU_CORPUS_TYPES_HPP_
