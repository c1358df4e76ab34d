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

#include "advnlu/corpus/vocab.hpp"

#include <algorithm>
#include <utility>

#include "advnlu/error.hpp"

namespace advnlu::corpus {
namespace {

const std::vector<std::string>& Reserved() {
  static const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<bos>", "<eos>"};
  return kReserved;
}

}  // namespace

Vocab::Vocab() : Vocab(Reserved()) {}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto& reserved = Reserved();
  if (tokens_.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), tokens_.begin())) {
    Fail(ErrorCode::kValidation, "vocabulary must start with the reserved tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
      Fail(ErrorCode::kValidation, "duplicate vocabulary entry '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::Build(const std::vector<std::vector<std::string>>& sentences,
                   int min_count) {
  if (min_count < 1) Fail(ErrorCode::kPrecondition, "min_count must be >= 1");
  std::map<std::string, int> counts;
  for (const auto& s : sentences) {
    for (const auto& tok : s) ++counts[tok];
  }
  std::vector<std::pair<std::string, int>> kept;
  const auto& reserved = Reserved();
  for (auto& [tok, n] : counts) {
    if (n >= min_count &&
        std::find(reserved.begin(), reserved.end(), tok) == reserved.end()) {
      kept.emplace_back(tok, n);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens = reserved;
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return Vocab(std::move(tokens));
}

Vocab Vocab::Build(const std::vector<LabeledExample>& examples, int min_count) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(examples.size());
  for (const auto& ex : examples) sentences.push_back(ex.utterance.tokens);
  return Build(sentences, min_count);
}

std::int32_t Vocab::Index(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::Token(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size()) {
    Fail(ErrorCode::kIndex, "vocabulary index " + std::to_string(index) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(index)];
}

std::vector<std::int32_t> Vocab::Encode(const std::vector<std::string>& tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Index(t));
  return ids;
}

bool Vocab::Contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

}  // namespace advnlu::corpus
