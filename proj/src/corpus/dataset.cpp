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

#include "advnlu/corpus/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "advnlu/corpus/bio.hpp"
#include "advnlu/error.hpp"

namespace advnlu::corpus {
namespace {

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void LineError(std::size_t line, const std::string& message) {
  Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": " + message);
}

int ParseIndex(std::string_view s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    LineError(line, "bad token index '" + std::string(s) + "'");
  }
  return v;
}

std::vector<SlotSpan> ParseSlots(std::string_view field, std::size_t line) {
  std::vector<SlotSpan> slots;
  field = Trim(field);
  if (field.empty()) return slots;
  for (std::string_view item : Split(field, ',')) {
    item = Trim(item);
    const std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      LineError(line, "malformed slot '" + std::string(item) + "'");
    }
    const std::string_view range = item.substr(colon + 1);
    const std::size_t dash = range.find('-');
    if (dash == std::string_view::npos) {
      LineError(line, "malformed slot range '" + std::string(item) + "'");
    }
    SlotSpan span;
    span.label = std::string(Trim(item.substr(0, colon)));
    span.start = ParseIndex(range.substr(0, dash), line);
    span.end = ParseIndex(range.substr(dash + 1), line);
    slots.push_back(std::move(span));
  }
  std::sort(slots.begin(), slots.end(),
            [](const SlotSpan& a, const SlotSpan& b) { return a.start < b.start; });
  return slots;
}

void ApplyMeta(std::string_view field, LabeledExample& ex, std::size_t line) {
  field = Trim(field);
  if (field.empty()) return;
  for (std::string_view kv : Split(field, ';')) {
    kv = Trim(kv);
    if (kv.empty()) continue;
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos) {
      LineError(line, "malformed metadata entry '" + std::string(kv) + "'");
    }
    const std::string_view key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "id") {
      if (value.empty()) LineError(line, "empty id");
      ex.utterance.id = std::string(value);
    } else if (key == "origin") {
      auto origin = ParseOrigin(value);
      if (!origin) LineError(line, "unknown origin '" + std::string(value) + "'");
      ex.origin = *origin;
    } else if (key == "parent") {
      ex.parent_id = std::string(value);
    } else if (key == "weight") {
      try {
        std::size_t used = 0;
        ex.weight = std::stod(std::string(value), &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        LineError(line, "bad weight '" + std::string(value) + "'");
      }
      if (!(ex.weight > 0.0)) LineError(line, "weight must be > 0");
    } else {
      LineError(line, "unknown metadata key '" + std::string(key) + "'");
    }
  }
}

void CheckExampleLabels(const LabeledExample& ex, const LabelSpace& space,
                        const std::string& where) {
  if (!space.IntentIndex(ex.annotation.intent)) {
    Fail(ErrorCode::kValidation,
         where + ": unknown intent '" + ex.annotation.intent + "'");
  }
  for (const SlotSpan& s : ex.annotation.slots) {
    if (!space.SlotIndex(s.label)) {
      Fail(ErrorCode::kValidation, where + ": unknown slot label '" + s.label + "'");
    }
  }
}

void Finish(ParsedDataset& out, const ParseOptions& options) {
  if (options.label_space != nullptr) {
    out.label_space = *options.label_space;
  } else {
    out.label_space = LabelSpace::FromExamples(out.examples);
  }
  out.no_training_data = out.examples.empty();
}

void CheckUniqueIds(const std::vector<LabeledExample>& examples) {
  std::map<std::string_view, int> seen;
  for (const auto& ex : examples) {
    if (!seen.emplace(ex.utterance.id, 0).second) {
      Fail(ErrorCode::kParse, "duplicate example id '" + ex.utterance.id + "'");
    }
  }
}

}  // namespace

ParsedDataset ParseDataset(std::istream& in, const ParseOptions& options) {
  ParsedDataset out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text_line = raw;
    if (!text_line.empty() && text_line.back() == '\r') text_line.remove_suffix(1);
    if (Trim(text_line).empty()) continue;
    const auto fields = Split(text_line, '\t');
    if (fields.size() < 2 || fields.size() > 5) {
      LineError(line, "expected 3 to 5 tab-separated fields, found " +
                          std::to_string(fields.size()));
    }
    LabeledExample ex;
    const std::string_view text = Trim(fields[0]);
    if (text.empty()) LineError(line, "empty text");
    ex.utterance.id = options.id_prefix + "-" + std::to_string(line);
    ex.utterance.text = std::string(text);
    ex.utterance.tokens = Tokenize(text);
    ex.annotation.intent = std::string(Trim(fields[1]));
    if (ex.annotation.intent.empty()) LineError(line, "empty intent");
    if (fields.size() >= 3) ex.annotation.slots = ParseSlots(fields[2], line);
    if (fields.size() >= 4) ex.source = std::string(Trim(fields[3]));
    if (fields.size() >= 5) ApplyMeta(fields[4], ex, line);
    if (ex.origin == Origin::kClean && ex.weight != 1.0) {
      LineError(line, "clean examples must have weight 1");
    }
    try {
      ValidateSpans(ex.annotation.slots, ex.utterance.tokens.size());
      if (options.label_space != nullptr) {
        CheckExampleLabels(ex, *options.label_space, "record");
      }
    } catch (const Error& e) {
      LineError(line, e.what());
    }
    out.examples.push_back(std::move(ex));
  }
  CheckUniqueIds(out.examples);
  Finish(out, options);
  return out;
}

ParsedDataset LoadDataset(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open dataset " + path);
  try {
    return ParseDataset(in, options);
  } catch (const Error& e) {
    Fail(e.code(), path + ": " + e.what());
  }
}

std::string FormatRecord(const LabeledExample& ex) {
  const auto bad = [](const std::string& s) {
    return s.find_first_of("\t\n\r") != std::string::npos;
  };
  if (bad(ex.utterance.text) || bad(ex.annotation.intent) || bad(ex.source) ||
      ex.utterance.id.find_first_of("\t\n\r;=") != std::string::npos ||
      ex.parent_id.find_first_of("\t\n\r;=") != std::string::npos) {
    Fail(ErrorCode::kValidation,
         "example '" + ex.utterance.id + "' contains characters the format cannot hold");
  }
  std::ostringstream out;
  out << ex.utterance.text << '\t' << ex.annotation.intent << '\t';
  for (std::size_t i = 0; i < ex.annotation.slots.size(); ++i) {
    const SlotSpan& s = ex.annotation.slots[i];
    if (i > 0) out << ',';
    out << s.label << ':' << s.start << '-' << s.end;
  }
  out << '\t' << ex.source << '\t' << "id=" << ex.utterance.id;
  if (ex.origin != Origin::kClean) out << ";origin=" << OriginName(ex.origin);
  if (!ex.parent_id.empty()) out << ";parent=" << ex.parent_id;
  if (ex.weight != 1.0) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, ex.weight).ptr;
    out << ";weight=" << std::string_view(buf, static_cast<std::size_t>(end - buf));
  }
  return out.str();
}

void WriteDataset(std::ostream& out, const std::vector<LabeledExample>& examples) {
  for (const auto& ex : examples) out << FormatRecord(ex) << '\n';
}

void SaveDataset(const std::string& path, const std::vector<LabeledExample>& examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write dataset " + path);
  WriteDataset(out, examples);
  if (!out) Fail(ErrorCode::kIo, "failed writing dataset " + path);
}

ParsedDataset ParseColumnDataset(std::istream& in, const ParseOptions& options) {
  ParsedDataset out;
  std::string raw;
  std::size_t line = 0, sentence_line = 0;
  LabeledExample current;
  TagSequence tags;
  bool has_intent = false;

  const auto flush = [&]() {
    if (current.utterance.tokens.empty() && !has_intent) return;
    if (!has_intent) LineError(sentence_line, "sentence without '# intent =' line");
    if (current.utterance.tokens.empty()) LineError(sentence_line, "sentence has no tokens");
    if (current.utterance.id.empty()) {
      current.utterance.id = options.id_prefix + "-" + std::to_string(sentence_line);
    }
    current.utterance.text = JoinTokens(current.utterance.tokens);
    current.annotation.slots = BioToSpans(tags);
    if (options.label_space != nullptr) {
      try {
        CheckExampleLabels(current, *options.label_space, "sentence");
      } catch (const Error& e) {
        LineError(sentence_line, e.what());
      }
    }
    out.examples.push_back(std::move(current));
    current = LabeledExample{};
    tags.clear();
    has_intent = false;
  };

  while (std::getline(in, raw)) {
    ++line;
    std::string_view l = Trim(raw);
    if (l.empty()) {
      flush();
      continue;
    }
    if (current.utterance.tokens.empty() && !has_intent && current.utterance.id.empty()) {
      sentence_line = line;
    }
    if (l.front() == '#') {
      std::string_view body = Trim(l.substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = Trim(body.substr(0, eq));
      const std::string_view value = Trim(body.substr(eq + 1));
      if (key == "intent") {
        current.annotation.intent = std::string(value);
        has_intent = !value.empty();
      } else if (key == "id") {
        current.utterance.id = std::string(value);
      }
      continue;
    }
    const auto fields = Split(l, '\t');
    if (fields.size() != 2) LineError(line, "expected 'token<TAB>tag'");
    const auto tok = Tokenize(fields[0]);
    if (tok.size() != 1) LineError(line, "token column must hold exactly one token");
    current.utterance.tokens.push_back(tok[0]);
    tags.emplace_back(Trim(fields[1]));
  }
  flush();
  CheckUniqueIds(out.examples);
  Finish(out, options);
  return out;
}

void CheckLabels(const std::vector<LabeledExample>& examples, const LabelSpace& space) {
  for (const auto& ex : examples) CheckExampleLabels(ex, space, "example '" + ex.utterance.id + "'");
}

}  // namespace advnlu::corpus
