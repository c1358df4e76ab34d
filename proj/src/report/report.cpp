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

#include "advnlu/report/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"

namespace advnlu::report {
namespace {

using json = nlohmann::json;

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

json ScoreToJson(const SetScore& s) {
  return {{"name", s.name},
          {"size", s.size},
          {"correct", s.correct},
          {"accuracy", s.accuracy},
          {"by_source", s.by_source}};
}

SetScore ScoreFromJson(const json& j) {
  SetScore s;
  s.name = j.at("name").get<std::string>();
  s.size = j.at("size").get<std::size_t>();
  s.correct = j.at("correct").get<std::size_t>();
  s.accuracy = j.at("accuracy").get<double>();
  s.by_source = j.at("by_source").get<std::map<std::string, double>>();
  return s;
}

}  // namespace

double AdversarialAverage(const std::vector<double>& accuracies) {
  if (accuracies.empty()) Fail(ErrorCode::kPrecondition, "no adversarial accuracies to average");
  return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
         static_cast<double>(accuracies.size());
}

SetScore ScoreSet(const ModelVariant& variant, const EvalSet& set) {
  if (set.examples.empty()) Fail(ErrorCode::kPrecondition, "test set '" + set.name + "' is empty");
  if (variant.models.empty()) {
    Fail(ErrorCode::kPrecondition, "model variant '" + variant.name + "' has no models");
  }
  SetScore score;
  score.name = set.name;
  score.size = set.examples.size();
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_source;
  for (const auto& ex : set.examples) {
    const tagger::Prediction p =
        variant.models.size() == 1
            ? variant.models.front()->Predict(ex.utterance)
            : tagger::EnsemblePredict(variant.models, ex.utterance);
    const bool ok = tagger::ExactMatch(p.annotation(), ex.annotation);
    score.correct += ok ? 1 : 0;
    auto& [hit, total] = per_source[ex.source];
    hit += ok ? 1 : 0;
    ++total;
  }
  score.accuracy = 100.0 * static_cast<double>(score.correct) / static_cast<double>(score.size);
  for (const auto& [source, counts] : per_source) {
    score.by_source[source] =
        100.0 * static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return score;
}

void RecomputeAverages(EvalReport& report) {
  for (auto& row : report.rows) {
    std::vector<double> acc;
    for (const auto& s : row.adversarial) acc.push_back(s.accuracy);
    row.adversarial_average = acc.empty() ? 0.0 : AdversarialAverage(acc);
  }
}

EvalReport MakeReport(const std::vector<ModelVariant>& variants, const EvalSet& clean,
                      const std::vector<EvalSet>& adversarial) {
  if (clean.examples.empty()) Fail(ErrorCode::kPrecondition, "test set '" + clean.name + "' is empty");
  for (const auto& set : adversarial) {
    if (set.examples.empty()) {
      Fail(ErrorCode::kPrecondition, "test set '" + set.name + "' is empty");
    }
  }
  EvalReport report;
  for (const auto& variant : variants) {
    ReportRow row;
    row.model = variant.name;
    row.clean = ScoreSet(variant, clean);
    for (const auto& set : adversarial) row.adversarial.push_back(ScoreSet(variant, set));
    report.rows.push_back(std::move(row));
  }
  RecomputeAverages(report);
  return report;
}

std::string FormatTable(const EvalReport& report) {
  std::vector<std::string> header = {"Model", "Clean accuracy"};
  if (!report.rows.empty()) {
    for (const auto& s : report.rows.front().adversarial) header.push_back("Adv " + s.name);
    if (!report.rows.front().adversarial.empty()) header.push_back("Adv avg");
  }
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& row : report.rows) {
    std::vector<std::string> line = {row.model, Percent(row.clean.accuracy)};
    for (const auto& s : row.adversarial) line.push_back(Percent(s.accuracy));
    if (!row.adversarial.empty()) line.push_back(Percent(row.adversarial_average));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width;
  for (const auto& line : cells) {
    width.resize(std::max(width.size(), line.size()), 0);
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const std::string& cell = cells[r][c];
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) out << "  ";
      out << (c == 0 ? cell + pad : pad + cell);
    }
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
      out << std::string(total, '-') << "\n";
    }
  }
  return out.str();
}

std::string ReportToJsonl(const EvalReport& report) {
  std::ostringstream out;
  out << json{{"record", "metadata"}, {"metadata", report.metadata}}.dump() << "\n";
  for (const auto& row : report.rows) {
    json adv = json::array();
    for (const auto& s : row.adversarial) adv.push_back(ScoreToJson(s));
    out << json{{"record", "row"},
                {"model", row.model},
                {"clean", ScoreToJson(row.clean)},
                {"adversarial", adv},
                {"adversarial_average", row.adversarial_average}}
               .dump()
        << "\n";
  }
  return out.str();
}

EvalReport ReportFromJsonl(const std::string& text) {
  EvalReport report;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "metadata") {
        report.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
      } else if (kind == "row") {
        ReportRow row;
        row.model = j.at("model").get<std::string>();
        row.clean = ScoreFromJson(j.at("clean"));
        for (const auto& s : j.at("adversarial")) row.adversarial.push_back(ScoreFromJson(s));
        row.adversarial_average = j.at("adversarial_average").get<double>();
        report.rows.push_back(std::move(row));
      } else {
        Fail(ErrorCode::kParse, "report line " + std::to_string(line_no) + ": unknown record");
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, "report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace advnlu::report
