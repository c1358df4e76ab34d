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

#ifndef ADVNLU_REPORT_REPORT_HPP_
#define ADVNLU_REPORT_REPORT_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/tagger/model.hpp"

namespace advnlu::report {

// Exact-match accuracy of one model variant on one evaluation set, in
// percent, with a breakdown by the examples' source descriptor.
struct SetScore {
  std::string name;
  std::size_t size = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::map<std::string, double> by_source;
};

struct ReportRow {
  std::string model;
  SetScore clean;
  std::vector<SetScore> adversarial;
  double adversarial_average = 0.0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> metadata;
};

// A named model variant; more than one model means a voting ensemble.
struct ModelVariant {
  std::string name;
  std::vector<const tagger::TaggerModel*> models;
};

struct EvalSet {
  std::string name;
  std::vector<corpus::LabeledExample> examples;
};

// Arithmetic mean. Throws kPrecondition on an empty list.
double AdversarialAverage(const std::vector<double>& accuracies);

// Throws kPrecondition naming the set when it is empty.
SetScore ScoreSet(const ModelVariant& variant, const EvalSet& set);

// One row per variant: clean accuracy, each adversarial set, and their mean.
EvalReport MakeReport(const std::vector<ModelVariant>& variants, const EvalSet& clean,
                      const std::vector<EvalSet>& adversarial);

// Recomputes every row's adversarial average from its set scores.
void RecomputeAverages(EvalReport& report);

// Aligned text table with one decimal per percentage.
std::string FormatTable(const EvalReport& report);

// One JSON record per row, preceded by a metadata record.
std::string ReportToJsonl(const EvalReport& report);
EvalReport ReportFromJsonl(const std::string& text);

}  // namespace advnlu::report

#endif  // ADVNLU_REPORT_REPORT_HPP_
