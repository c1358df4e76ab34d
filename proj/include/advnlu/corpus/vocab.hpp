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

#ifndef ADVNLU_CORPUS_VOCAB_HPP_
#define ADVNLU_CORPUS_VOCAB_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "advnlu/corpus/types.hpp"

namespace advnlu::corpus {

class Vocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kBos = 2;
  static constexpr std::int32_t kEos = 3;

  Vocab();
  explicit Vocab(std::vector<std::string> tokens);  // reserved entries first

  // Tokens seen at least `min_count` times, ordered by frequency descending
  // then lexicographically, after the four reserved entries.
  static Vocab Build(const std::vector<std::vector<std::string>>& sentences,
                     int min_count);
  static Vocab Build(const std::vector<LabeledExample>& examples, int min_count);

  std::int32_t Index(std::string_view token) const;
  const std::string& Token(std::int32_t index) const;
  std::vector<std::int32_t> Encode(const std::vector<std::string>& tokens) const;
  bool Contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::int32_t, std::less<>> index_;
};

}  // namespace advnlu::corpus

#endif  // ADVNLU_CORPUS_VOCAB_HPP_
