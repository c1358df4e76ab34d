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

#include "advnlu/corpus/bio.hpp"

#include <string>
#include <string_view>
#include <utility>

namespace advnlu::corpus {
namespace {

// Splits "B-x"/"I-x" into prefix and label; anything else reads as O.
std::pair<char, std::string_view> SplitTag(std::string_view tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], tag.substr(2)};
  }
  return {'O', {}};
}

}  // namespace

TagSequence SpansToBio(const Annotation& annotation, std::size_t n_tokens) {
  ValidateSpans(annotation.slots, n_tokens);
  TagSequence tags(n_tokens, std::string(kOutsideTag));
  for (const SlotSpan& s : annotation.slots) {
    tags[static_cast<std::size_t>(s.start)] = "B-" + s.label;
    for (int t = s.start + 1; t <= s.end; ++t) {
      tags[static_cast<std::size_t>(t)] = "I-" + s.label;
    }
  }
  return tags;
}

TagSequence RepairBio(const TagSequence& tags) {
  TagSequence out;
  out.reserve(tags.size());
  std::string_view open_label;
  bool open = false;
  for (const std::string& tag : tags) {
    auto [prefix, label] = SplitTag(tag);
    if (prefix == 'O') {
      out.emplace_back(kOutsideTag);
      open = false;
    } else if (prefix == 'I' && open && label == open_label) {
      out.push_back(tag);
    } else {
      out.push_back("B-" + std::string(label));
      open = true;
      open_label = label;
    }
  }
  return out;
}

std::vector<SlotSpan> BioToSpans(const TagSequence& tags) {
  const TagSequence fixed = RepairBio(tags);
  std::vector<SlotSpan> spans;
  for (std::size_t t = 0; t < fixed.size(); ++t) {
    auto [prefix, label] = SplitTag(fixed[t]);
    if (prefix == 'B') {
      spans.push_back({std::string(label), static_cast<int>(t), static_cast<int>(t)});
    } else if (prefix == 'I') {
      spans.back().end = static_cast<int>(t);
    }
  }
  return spans;
}

}  // namespace advnlu::corpus
