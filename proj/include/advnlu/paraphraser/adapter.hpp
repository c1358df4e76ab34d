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

#ifndef ADVNLU_PARAPHRASER_ADAPTER_HPP_
#define ADVNLU_PARAPHRASER_ADAPTER_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"

namespace advnlu::paraphraser {

// A back-translation adapter is an external program speaking line-delimited
// JSON on stdin/stdout:
//   request  {"id": "...", "text": "...", "k": 5}
//   response {"id": "...", "beams": ["...", ...]}
struct AdapterOptions {
  std::vector<std::string> argv;  // program and arguments
  std::string source = "bt";      // descriptor stored in each set
  std::size_t k = 5;
  int timeout_ms = 30000;         // silence allowed while requests are pending
  std::size_t max_in_flight = 8;
};

// Splits a command line on whitespace, honoring single and double quotes.
std::vector<std::string> SplitCommand(const std::string& command);

// One set per utterance, in input order. Timeouts, malformed responses and
// adapter exits become per-utterance error records; the adapter is restarted
// for the remaining utterances. Beams beyond k are discarded before the
// original sentence and duplicates are filtered out.
std::vector<ParaphraseSet> Backtranslate(const std::vector<corpus::Utterance>& utterances,
                                         const AdapterOptions& options);

}  // namespace advnlu::paraphraser

#endif  // ADVNLU_PARAPHRASER_ADAPTER_HPP_
