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

#ifndef ADVNLU_CORPUS_SYNTHETIC_HPP_
#define ADVNLU_CORPUS_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"

namespace advnlu::corpus {

enum class TransformKind { kSynonym, kReorder, kFiller };

const char* TransformKindName(TransformKind kind);

// A phrase rewrite. kSynonym and kReorder replace an occurrence of `from`
// with one of `to`; kFiller inserts one of `to` at the start or end of the
// sentence (`from` is empty and `at_end` picks the side).
struct TransformRule {
  TransformKind kind = TransformKind::kSynonym;
  std::vector<std::string> from;
  std::vector<std::vector<std::string>> to;
  bool at_end = false;
};

struct IntentTemplates {
  std::string intent;
  // Whitespace-separated tokens; `{label}` marks a slot placeholder.
  std::vector<std::string> templates;
};

struct SyntheticGrammar {
  std::vector<IntentTemplates> intents;
  std::map<std::string, std::vector<std::string>> lexicons;
  std::vector<TransformRule> rules;

  std::vector<std::string> SlotLabels() const;
};

// Weather/alarm style grammar with 6 intents and 5 slot labels.
SyntheticGrammar DefaultGrammar();

// JSON grammar file:
//   {"intents": {"<intent>": ["template", ...], ...},
//    "lexicons": {"<slot>": ["value", ...], ...},
//    "rules": [{"kind": "synonym"|"reorder"|"filler", "from": "phrase",
//               "to": ["phrase", ...], "position": "start"|"end"}, ...]}
SyntheticGrammar ParseGrammarJson(const std::string& json_text);
SyntheticGrammar LoadGrammar(const std::string& path);
std::string GrammarToJson(const SyntheticGrammar& grammar);

// Throws kPrecondition unless the grammar has >= 4 intents, >= 3 slot labels,
// a lexicon for every placeholder and at least one rule.
void ValidateGrammar(const SyntheticGrammar& grammar);

// One rewrite site for `rule`: the alternative and the token offset where it
// applies (ignored for fillers).
struct TransformSite {
  std::size_t rule = 0;
  std::size_t alternative = 0;
  std::size_t position = 0;
};

// All places `rule` can apply to `tokens`. When `tags` is given, a rewrite
// only matches tokens tagged O so gold slot spans survive.
std::vector<TransformSite> FindSites(const std::vector<TransformRule>& rules,
                                     std::size_t rule_index,
                                     const std::vector<std::string>& tokens,
                                     const TagSequence* tags);

// Applies one site. `tags`, when given, is rewritten in lockstep (inserted
// tokens are tagged O).
void ApplySite(const std::vector<TransformRule>& rules, const TransformSite& site,
               std::vector<std::string>& tokens, TagSequence* tags);

struct SyntheticCorpus {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  // One perturbed variant of each test sentence built only from the
  // grammar's transformation rules; gold labels follow by construction.
  std::vector<LabeledExample> perturbed;
};

// Templates never contain rule outputs, so the perturbation set is a
// distribution shift away from train. All sentences are unique across
// train/dev/test. Throws kPrecondition if the grammar cannot supply enough
// distinct sentences.
SyntheticCorpus GenerateSynthetic(const SyntheticGrammar& grammar,
                                  std::uint64_t seed, std::size_t n_train,
                                  std::size_t n_dev, std::size_t n_test);

}  // namespace advnlu::corpus

#endif  // ADVNLU_CORPUS_SYNTHETIC_HPP_
