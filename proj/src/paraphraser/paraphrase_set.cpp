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

#include "advnlu/paraphraser/paraphrase_set.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "advnlu/corpus/types.hpp"
#include "advnlu/error.hpp"

namespace advnlu::paraphraser {

using json = nlohmann::json;

std::vector<Beam> Dedupe(const std::vector<Beam>& beams,
                         const std::set<std::string>& reference) {
  std::vector<Beam> out;
  std::set<std::string> seen;
  for (const Beam& b : beams) {
    const std::string key = corpus::Lowercase(b.text);
    if (reference.count(key) > 0 || !seen.insert(key).second) continue;
    out.push_back(b);
  }
  return out;
}

std::vector<Beam> FilterBeams(const std::vector<Beam>& beams,
                              const std::string& original_text, std::size_t k) {
  const std::string original = corpus::JoinTokens(corpus::Tokenize(original_text));
  std::vector<Beam> kept;
  for (const Beam& b : beams) {
    const auto tokens = corpus::Tokenize(b.text);
    if (!tokens.empty() && corpus::JoinTokens(tokens) != original) kept.push_back(b);
  }
  std::vector<Beam> out = Dedupe(kept, {});
  if (out.size() > k) out.resize(k);
  return out;
}

bool IsWellFormed(const ParaphraseSet& set, const std::string& original_text,
                  std::size_t k) {
  if (set.beams.size() > k) return false;
  const std::string original = corpus::JoinTokens(corpus::Tokenize(original_text));
  std::set<std::string> seen;
  for (const Beam& b : set.beams) {
    const std::string key = corpus::Lowercase(b.text);
    if (corpus::JoinTokens(corpus::Tokenize(b.text)) == original || !seen.insert(key).second) {
      return false;
    }
  }
  return true;
}

std::string ParaphraseSetToJson(const ParaphraseSet& set) {
  json beams = json::array();
  for (const Beam& b : set.beams) {
    json jb = {{"text", b.text}, {"score", b.score}};
    if (b.truncated) jb["truncated"] = true;
    beams.push_back(std::move(jb));
  }
  json j = {{"id", set.original_id}, {"source", set.source}, {"beams", beams}};
  if (!set.error.empty()) j["error"] = set.error;
  return j.dump();
}

ParaphraseSet ParaphraseSetFromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    ParaphraseSet set;
    set.original_id = j.at("id").get<std::string>();
    set.source = j.at("source").get<std::string>();
    for (const json& jb : j.at("beams")) {
      set.beams.push_back({jb.at("text").get<std::string>(), jb.value("score", 0.0),
                           jb.value("truncated", false)});
    }
    set.error = j.value("error", "");
    return set;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("paraphrase record: ") + e.what());
  }
}

std::vector<ParaphraseSet> ReadCache(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open paraphrase cache " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  std::vector<ParaphraseSet> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(ParaphraseSetFromJson(lines[i]));
    } catch (const Error& e) {
      if (i + 1 == lines.size()) break;
      Fail(ErrorCode::kParse, path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

void AppendCache(const std::string& path, const std::vector<ParaphraseSet>& sets) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::app);
  if (!out) Fail(ErrorCode::kIo, "cannot write paraphrase cache " + path);
  for (const auto& s : sets) out << ParaphraseSetToJson(s) << "\n";
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "failed writing paraphrase cache " + path);
}

}  // namespace advnlu::paraphraser
