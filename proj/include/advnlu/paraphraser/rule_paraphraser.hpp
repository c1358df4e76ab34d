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

#ifndef ADVNLU_PARAPHRASER_RULE_PARAPHRASER_HPP_
#define ADVNLU_PARAPHRASER_RULE_PARAPHRASER_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "advnlu/corpus/synthetic.hpp"
#include "advnlu/corpus/types.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"

namespace advnlu::paraphraser {

inline constexpr char kRuleSource[] = "rulebased";

// Deterministic rewrites of `utterance` with the grammar's transformation
// rules. Candidates are every single rule application (score 0) followed by
// every application of two different rules (score -1), each tier shuffled
// with `seed`; the first `k` distinct results that differ from the original
// are returned. Throws kPrecondition when `rules` is empty.
ParaphraseSet RuleParaphrase(const corpus::Utterance& utterance,
                             const std::vector<corpus::TransformRule>& rules,
                             std::uint64_t seed, std::size_t k);

}  // namespace advnlu::paraphraser

#endif  // ADVNLU_PARAPHRASER_RULE_PARAPHRASER_HPP_
