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

#ifndef ADVNLU_PIPELINE_PIPELINE_HPP_
#define ADVNLU_PIPELINE_PIPELINE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "advnlu/error.hpp"

namespace advnlu::pipeline {

using Logger = std::function<void(const std::string& line)>;

// Workflow stages. Each takes a JSON request object, reads and writes only
// the paths it names, writes the fully resolved request (defaults filled
// in) next to its outputs, and returns a JSON summary. Unknown request
// fields and missing required ones raise kUsage.
//
//   ingest         input, output, format ("canonical" | "columns"),
//                  label_space (dataset whose labels bound this one)
//   synth          out_dir, seed, n_train, n_dev, n_test, grammar
//   train          train, dev, augmented[], paraphrases[], tagger{},
//                  pairing{mode, lambda_sf, lambda_a, pair_cap,
//                  include_para_para, seed}, ensemble, out_dir, resume
//   paraphrase     input, method ("rule" | "adapter" | "seq2seq"), source,
//                  k, seed, cache, resume, grammar, adapter{command,
//                  timeout_ms, max_in_flight}, seq2seq{model, train,
//                  config{}, sigma}
//   augment        model, train, cache[], weight, output
//   advset-build   models[], test, cache[], store
//   advset-export  store, output
//   eval           models[{name, dirs[]}], clean{name, path},
//                  adversarial[{name, path}], out_dir
//   report         inputs[], output
std::string RunStage(const std::string& stage, const std::string& request_json,
                     const Logger& log = {});

std::vector<std::string> StageNames();

// Process exit status for a failure category: 1 usage, 2 data, 3 runtime.
int ExitCodeFor(ErrorCode code);

}  // namespace advnlu::pipeline

#endif  // ADVNLU_PIPELINE_PIPELINE_HPP_
