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

#ifndef ADVNLU_PARAPHRASER_PARAPHRASE_SET_HPP_
#define ADVNLU_PARAPHRASER_PARAPHRASE_SET_HPP_

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace advnlu::paraphraser {

struct Beam {
  std::string text;
  double score = 0.0;
  bool truncated = false;  // decoder hit its length limit

  bool operator==(const Beam&) const = default;
};

// Source descriptors: "<adapter>-<language>" for back-translation (e.g.
// "bt-es"), "seq2seq" for the autoencoder, "rulebased" for rule rewrites.
struct ParaphraseSet {
  std::string original_id;
  std::string source;
  std::vector<Beam> beams;
  // Non-empty when producing this set failed; beams are then empty.
  std::string error;

  bool operator==(const ParaphraseSet&) const = default;
};

// Drops beams whose lowercased text is in `reference` and later duplicates
// of an earlier beam (after lowercasing). Order is preserved.
std::vector<Beam> Dedupe(const std::vector<Beam>& beams,
                         const std::set<std::string>& reference);

// Drops blank beams and beams equal to the original after lowercasing and
// whitespace normalization, dedupes the rest, then keeps the first `k`.
std::vector<Beam> FilterBeams(const std::vector<Beam>& beams,
                              const std::string& original_text, std::size_t k);

// True when the set satisfies its invariants for the given original and k.
bool IsWellFormed(const ParaphraseSet& set, const std::string& original_text,
                  std::size_t k);

std::string ParaphraseSetToJson(const ParaphraseSet& set);
ParaphraseSet ParaphraseSetFromJson(const std::string& line);

// Line-delimited cache of paraphrase sets. Reading tolerates a truncated
// final line (an interrupted writer) but rejects malformed earlier lines.
std::vector<ParaphraseSet> ReadCache(const std::string& path);
void AppendCache(const std::string& path, const std::vector<ParaphraseSet>& sets);

}  // namespace advnlu::paraphraser

#endif  // ADVNLU_PARAPHRASER_PARAPHRASE_SET_HPP_
