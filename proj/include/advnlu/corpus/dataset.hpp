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

#ifndef ADVNLU_CORPUS_DATASET_HPP_
#define ADVNLU_CORPUS_DATASET_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"

namespace advnlu::corpus {

// Canonical line format (UTF-8, one record per line):
//
//   text \t intent \t label:start-end[,label:start-end...] [\t source [\t meta]]
//
// The slot field may be empty. `source` is the generation source descriptor
// and `meta` a ';'-separated list of key=value pairs (id, origin, parent,
// weight). Blank lines are ignored.
struct ParseOptions {
  // Prefix for ids of records that carry none; ids are `<prefix>-<line>`.
  std::string id_prefix = "ex";
  // When set (eval/test splits), labels outside this space are rejected.
  const LabelSpace* label_space = nullptr;
};

struct ParsedDataset {
  std::vector<LabeledExample> examples;
  LabelSpace label_space;
  // Set when the stream held no records; the label space is then empty.
  bool no_training_data = false;
};

// Throws kParse (with the 1-based line number) on malformed records,
// out-of-range or overlapping spans, and unknown labels.
ParsedDataset ParseDataset(std::istream& in, const ParseOptions& options = {});
ParsedDataset LoadDataset(const std::string& path,
                          const ParseOptions& options = {});

void WriteDataset(std::ostream& out, const std::vector<LabeledExample>& examples);
void SaveDataset(const std::string& path,
                 const std::vector<LabeledExample>& examples);

// Single canonical record for one example, without a trailing newline.
std::string FormatRecord(const LabeledExample& example);

// Token/tag column importer. Sentences are separated by blank lines; each
// sentence starts with a `# intent = <label>` line, optionally preceded or
// followed by `# id = <id>`, then one `token \t BIO-tag` line per token.
ParsedDataset ParseColumnDataset(std::istream& in,
                                 const ParseOptions& options = {});

// Throws kValidation if any intent or slot label is outside `space`.
void CheckLabels(const std::vector<LabeledExample>& examples,
                 const LabelSpace& space);

}  // namespace advnlu::corpus

#endif  // ADVNLU_CORPUS_DATASET_HPP_
