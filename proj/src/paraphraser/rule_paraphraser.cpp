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

#include "advnlu/paraphraser/rule_paraphraser.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "advnlu/error.hpp"

namespace advnlu::paraphraser {
namespace {

std::vector<std::string> ApplyAt(const std::vector<corpus::TransformRule>& rules,
                                 corpus::TransformSite site,
                                 std::vector<std::string> tokens) {
  if (rules[site.rule].kind == corpus::TransformKind::kFiller &&
      rules[site.rule].at_end) {
    site.position = tokens.size();
  }
  corpus::ApplySite(rules, site, tokens, nullptr);
  return tokens;
}

}  // namespace

ParaphraseSet RuleParaphrase(const corpus::Utterance& utterance,
                             const std::vector<corpus::TransformRule>& rules,
                             std::uint64_t seed, std::size_t k) {
  if (rules.empty()) Fail(ErrorCode::kPrecondition, "rule paraphraser needs rules");
  ParaphraseSet out;
  out.original_id = utterance.id;
  out.source = kRuleSource;
  std::mt19937_64 rng(seed);

  std::vector<std::vector<std::string>> singles;
  std::vector<std::size_t> single_rule;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    for (const auto& site : corpus::FindSites(rules, r, utterance.tokens, nullptr)) {
      singles.push_back(ApplyAt(rules, site, utterance.tokens));
      single_rule.push_back(r);
    }
  }
  std::vector<std::vector<std::string>> doubles;
  for (std::size_t i = 0; i < singles.size(); ++i) {
    for (std::size_t r = single_rule[i] + 1; r < rules.size(); ++r) {
      for (const auto& site : corpus::FindSites(rules, r, singles[i], nullptr)) {
        doubles.push_back(ApplyAt(rules, site, singles[i]));
      }
    }
  }
  std::shuffle(singles.begin(), singles.end(), rng);
  std::shuffle(doubles.begin(), doubles.end(), rng);

  std::vector<Beam> beams;
  for (const auto& t : singles) beams.push_back({corpus::JoinTokens(t), 0.0, false});
  for (const auto& t : doubles) beams.push_back({corpus::JoinTokens(t), -1.0, false});
  out.beams = FilterBeams(beams, utterance.normalized(), k);
  return out;
}

}  // namespace advnlu::paraphraser
