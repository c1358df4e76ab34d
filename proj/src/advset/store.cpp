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

#include "advnlu/advset/store.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"

namespace advnlu::advset {
namespace {

using json = nlohmann::json;

constexpr std::size_t kAnnotationsPerCandidate = 2;

json SpansToJson(const std::vector<corpus::SlotSpan>& slots) {
  json out = json::array();
  for (const auto& s : slots) out.push_back({{"label", s.label}, {"start", s.start}, {"end", s.end}});
  return out;
}

std::vector<corpus::SlotSpan> SpansFromJson(const json& j) {
  std::vector<corpus::SlotSpan> out;
  for (const auto& s : j) {
    out.push_back({s.at("label").get<std::string>(), s.at("start").get<int>(),
                   s.at("end").get<int>()});
  }
  return out;
}

json PredictionToJson(const PredictionRecord& p) {
  return {{"intent", p.intent},
          {"intent_logits", p.intent_logits},
          {"slot_tags", p.slot_tags},
          {"slots", SpansToJson(p.slots)}};
}

PredictionRecord PredictionFromJson(const json& j) {
  PredictionRecord p;
  p.intent = j.at("intent").get<std::string>();
  p.intent_logits = j.at("intent_logits").get<std::vector<float>>();
  p.slot_tags = j.at("slot_tags").get<std::vector<std::string>>();
  p.slots = SpansFromJson(j.at("slots"));
  return p;
}

json DecisionJson(const Decision& d) {
  json j = {{"kind", DecisionKindName(d.kind)}};
  if (d.kind == DecisionKind::kValid) {
    j["intent"] = d.annotation.intent;
    j["slots"] = SpansToJson(d.annotation.slots);
  }
  return j;
}

Decision DecisionFromJsonValue(const json& j) {
  if (!j.is_object()) Fail(ErrorCode::kValidation, "decision: expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    Fail(ErrorCode::kValidation, "decision.kind: required string");
  }
  const auto kind = ParseDecisionKind(j["kind"].get<std::string>());
  if (!kind) {
    Fail(ErrorCode::kValidation,
         "decision.kind: must be valid, meaningless or ambiguous");
  }
  Decision d;
  d.kind = *kind;
  if (d.kind != DecisionKind::kValid) return d;
  if (!j.contains("intent") || !j["intent"].is_string()) {
    Fail(ErrorCode::kValidation, "decision.intent: required string for a valid decision");
  }
  d.annotation.intent = j["intent"].get<std::string>();
  const json slots = j.value("slots", json::array());
  if (!slots.is_array()) Fail(ErrorCode::kValidation, "decision.slots: expected an array");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const json& s = slots[i];
    const std::string field = "decision.slots[" + std::to_string(i) + "]";
    if (!s.is_object() || !s.contains("label") || !s["label"].is_string() ||
        !s.contains("start") || !s["start"].is_number_integer() || !s.contains("end") ||
        !s["end"].is_number_integer()) {
      Fail(ErrorCode::kValidation, field + ": needs string label and integer start/end");
    }
    d.annotation.slots.push_back(
        {s["label"].get<std::string>(), s["start"].get<int>(), s["end"].get<int>()});
  }
  std::sort(d.annotation.slots.begin(), d.annotation.slots.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return d;
}

json ExampleToJson(const corpus::LabeledExample& ex) {
  return {{"id", ex.utterance.id},
          {"text", ex.utterance.text},
          {"intent", ex.annotation.intent},
          {"slots", SpansToJson(ex.annotation.slots)},
          {"origin", corpus::OriginName(ex.origin)},
          {"weight", ex.weight},
          {"parent", ex.parent_id},
          {"source", ex.source}};
}

corpus::LabeledExample ExampleFromJson(const json& j) {
  corpus::LabeledExample ex;
  ex.utterance = corpus::MakeUtterance(j.at("id").get<std::string>(),
                                       j.at("text").get<std::string>());
  ex.annotation.intent = j.at("intent").get<std::string>();
  ex.annotation.slots = SpansFromJson(j.at("slots"));
  const auto origin = corpus::ParseOrigin(j.value("origin", "clean"));
  if (!origin) Fail(ErrorCode::kParse, "unknown origin in event log");
  ex.origin = *origin;
  ex.weight = j.value("weight", 1.0);
  ex.parent_id = j.value("parent", "");
  ex.source = j.value("source", "");
  return ex;
}

json CandidateJson(const CandidateRecord& c) {
  return {{"candidate_id", c.candidate_id},
          {"original", ExampleToJson(c.original)},
          {"paraphrase", {{"id", c.paraphrase.id}, {"text", c.paraphrase.text}}},
          {"source", c.source},
          {"original_pred", PredictionToJson(c.original_pred)},
          {"paraphrase_pred", PredictionToJson(c.paraphrase_pred)},
          {"status", StatusName(c.status)}};
}

CandidateRecord CandidateFromJsonValue(const json& j) {
  CandidateRecord c;
  c.candidate_id = j.at("candidate_id").get<std::string>();
  c.original = ExampleFromJson(j.at("original"));
  c.paraphrase = corpus::MakeUtterance(j.at("paraphrase").at("id").get<std::string>(),
                                       j.at("paraphrase").at("text").get<std::string>());
  c.source = j.at("source").get<std::string>();
  c.original_pred = PredictionFromJson(j.at("original_pred"));
  c.paraphrase_pred = PredictionFromJson(j.at("paraphrase_pred"));
  const auto status = ParseStatus(j.value("status", "pending"));
  if (!status) Fail(ErrorCode::kParse, "unknown candidate status");
  c.status = *status;
  return c;
}

std::int64_t SystemNowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

const char* StatusName(Status status) {
  switch (status) {
    case Status::kPending: return "pending";
    case Status::kAnnotated: return "annotated";
    case Status::kAdjudication: return "adjudication";
    case Status::kFinal: return "final";
    case Status::kRejected: return "rejected";
  }
  return "unknown";
}

std::optional<Status> ParseStatus(const std::string& name) {
  for (Status s : {Status::kPending, Status::kAnnotated, Status::kAdjudication,
                   Status::kFinal, Status::kRejected}) {
    if (name == StatusName(s)) return s;
  }
  return std::nullopt;
}

bool IsAllowedTransition(Status from, Status to) {
  switch (from) {
    case Status::kPending: return to == Status::kAnnotated;
    case Status::kAnnotated: return to == Status::kFinal || to == Status::kAdjudication;
    case Status::kAdjudication: return to == Status::kFinal || to == Status::kRejected;
    case Status::kFinal:
    case Status::kRejected: return false;
  }
  return false;
}

const char* DecisionKindName(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::kValid: return "valid";
    case DecisionKind::kMeaningless: return "meaningless";
    case DecisionKind::kAmbiguous: return "ambiguous";
  }
  return "unknown";
}

std::optional<DecisionKind> ParseDecisionKind(const std::string& name) {
  for (DecisionKind k : {DecisionKind::kValid, DecisionKind::kMeaningless,
                         DecisionKind::kAmbiguous}) {
    if (name == DecisionKindName(k)) return k;
  }
  return std::nullopt;
}

bool Decision::Agrees(const Decision& other) const {
  if (kind != other.kind) return false;
  if (kind != DecisionKind::kValid) return true;
  return tagger::ExactMatch(annotation, other.annotation);
}

PredictionRecord PredictionRecord::From(const tagger::Prediction& p) {
  return {p.intent, p.intent_logits, p.slot_tags, p.slots};
}

BuildResult BuildCandidates(const Predictor& predict,
                            const std::vector<corpus::LabeledExample>& originals,
                            const std::vector<paraphraser::ParaphraseSet>& sets) {
  BuildResult out;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < originals.size(); ++i) by_id[originals[i].utterance.id] = i;
  std::map<std::string, tagger::Prediction> original_preds;
  std::set<std::string> used_ids;
  for (const auto& set : sets) {
    const auto it = by_id.find(set.original_id);
    if (it == by_id.end()) {
      out.warnings.push_back("paraphrase set for unknown original '" + set.original_id +
                             "' skipped");
      continue;
    }
    if (!set.error.empty()) {
      out.warnings.push_back("paraphrase set for '" + set.original_id + "' (" + set.source +
                             ") carries error: " + set.error);
      continue;
    }
    const corpus::LabeledExample& original = originals[it->second];
    auto op = original_preds.find(set.original_id);
    if (op == original_preds.end()) {
      op = original_preds.emplace(set.original_id, predict(original.utterance)).first;
    }
    for (std::size_t b = 0; b < set.beams.size(); ++b) {
      if (corpus::Tokenize(set.beams[b].text).empty()) continue;
      std::string id = set.original_id + "~" + set.source + "~" + std::to_string(b);
      for (int n = 2; !used_ids.insert(id).second; ++n) {
        id = set.original_id + "~" + set.source + "~" + std::to_string(b) + "~" +
             std::to_string(n);
      }
      CandidateRecord c;
      c.candidate_id = id;
      c.paraphrase = corpus::MakeUtterance(id, set.beams[b].text);
      const tagger::Prediction pp = predict(c.paraphrase);
      if (pp.intent == op->second.intent) {
        used_ids.erase(id);
        continue;
      }
      c.original = original;
      c.source = set.source;
      c.original_pred = PredictionRecord::From(op->second);
      c.paraphrase_pred = PredictionRecord::From(pp);
      out.candidates.push_back(std::move(c));
    }
  }
  return out;
}

std::string CandidateToJson(const CandidateRecord& record) {
  return CandidateJson(record).dump();
}

CandidateRecord CandidateFromJson(const std::string& json_text) {
  try {
    return CandidateFromJsonValue(json::parse(json_text));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("candidate record: ") + e.what());
  }
}

std::string DecisionToJson(const Decision& decision) { return DecisionJson(decision).dump(); }

Decision DecisionFromJson(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kValidation, std::string("decision: ") + e.what());
  }
  return DecisionFromJsonValue(j);
}

// ---------------------------------------------------------------------------
// Store.

Store::Store(std::string path, StoreOptions options)
    : path_(std::move(path)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = SystemNowMs;
  if (options_.lease_ms <= 0) Fail(ErrorCode::kPrecondition, "lease_ms must be positive");
}

std::unique_ptr<Store> Store::Open(const std::string& path, StoreOptions options) {
  std::unique_ptr<Store> store(new Store(path, std::move(options)));
  if (!path.empty()) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    if (std::filesystem::exists(path)) store->Replay();
  }
  return store;
}

std::int64_t Store::Now() const { return options_.clock(); }

void Store::Append(const std::string& line) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) Fail(ErrorCode::kIo, "cannot append to event log " + path_);
  out << line << "\n";
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "failed writing event log " + path_);
}

void Store::Replay() {
  std::ifstream in(path_);
  if (!in) Fail(ErrorCode::kIo, "cannot open event log " + path_);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path_ + ":" + std::to_string(i + 1);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      // A torn final line is what an interrupted append leaves behind.
      if (i + 1 == lines.size()) break;
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
    try {
      const std::string event = j.at("event").get<std::string>();
      if (event == "label_space") {
        ApplyLabels(corpus::LabelSpace(j.at("intents").get<std::vector<std::string>>(),
                                       j.at("slot_labels").get<std::vector<std::string>>()));
      } else if (event == "candidate_created") {
        ApplyCandidate(CandidateFromJsonValue(j.at("candidate")));
      } else if (event == "annotation_added") {
        ApplyAnnotation({j.at("candidate_id").get<std::string>(),
                         j.at("annotator_id").get<std::string>(),
                         DecisionFromJsonValue(j.at("decision")),
                         j.at("timestamp_ms").get<std::int64_t>()});
      } else if (event == "adjudicated") {
        ApplyAdjudication({j.at("candidate_id").get<std::string>(),
                           j.at("adjudicator_id").get<std::string>(),
                           DecisionFromJsonValue(j.at("decision")),
                           j.at("timestamp_ms").get<std::int64_t>()});
      } else if (event != "exported") {
        Fail(ErrorCode::kParse, "unknown event '" + event + "'");
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
}

void Store::ApplyLabels(const corpus::LabelSpace& labels) { labels_ = labels; }

void Store::SetLabelSpace(const corpus::LabelSpace& labels) {
  std::unique_lock lock(mutex_);
  Append(json{{"event", "label_space"},
              {"intents", labels.intents()},
              {"slot_labels", labels.slot_labels()}}
             .dump());
  ApplyLabels(labels);
}

corpus::LabelSpace Store::label_space() const {
  std::shared_lock lock(mutex_);
  return labels_;
}

void Store::ApplyCandidate(const CandidateRecord& record) {
  Entry e;
  e.record = record;
  index_[record.candidate_id] = entries_.size();
  entries_.push_back(std::move(e));
}

void Store::AddCandidates(const std::vector<CandidateRecord>& candidates) {
  std::unique_lock lock(mutex_);
  std::set<std::string> batch;
  for (const auto& c : candidates) {
    if (index_.count(c.candidate_id) > 0 || !batch.insert(c.candidate_id).second) {
      Fail(ErrorCode::kConflict, "candidate '" + c.candidate_id + "' already exists");
    }
    if (c.status != Status::kPending) {
      Fail(ErrorCode::kPrecondition, "new candidate '" + c.candidate_id + "' is not pending");
    }
    if (c.original_pred.intent == c.paraphrase_pred.intent) {
      Fail(ErrorCode::kPrecondition,
           "candidate '" + c.candidate_id + "' does not flip the predicted intent");
    }
  }
  for (const auto& c : candidates) {
    Append(json{{"event", "candidate_created"}, {"candidate", CandidateJson(c)}}.dump());
    ApplyCandidate(c);
  }
}

void Store::CheckDecision(const Entry& entry, const Decision& decision) const {
  if (decision.kind != DecisionKind::kValid) return;
  const auto& a = decision.annotation;
  if (!labels_.intents().empty() && !labels_.IntentIndex(a.intent)) {
    Fail(ErrorCode::kValidation, "decision.intent: unknown intent '" + a.intent + "'");
  }
  for (std::size_t i = 0; i < a.slots.size(); ++i) {
    const std::string field = "decision.slots[" + std::to_string(i) + "]";
    if (!labels_.slot_labels().empty() && !labels_.SlotIndex(a.slots[i].label)) {
      Fail(ErrorCode::kValidation, field + ".label: unknown slot label '" +
                                       a.slots[i].label + "'");
    }
    const int n = static_cast<int>(entry.record.paraphrase.tokens.size());
    if (a.slots[i].start < 0 || a.slots[i].start > a.slots[i].end) {
      Fail(ErrorCode::kValidation, field + ".start: must satisfy 0 <= start <= end");
    }
    if (a.slots[i].end >= n) {
      Fail(ErrorCode::kValidation, field + ".end: must be < token count " + std::to_string(n));
    }
  }
  auto sorted = a.slots;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.start < y.start; });
  try {
    corpus::ValidateSpans(sorted, entry.record.paraphrase.tokens.size());
  } catch (const Error& e) {
    Fail(ErrorCode::kValidation, std::string("decision.slots: ") + e.what());
  }
}

Status Store::ApplyAnnotation(const AnnotationRecord& r) {
  const auto it = index_.find(r.candidate_id);
  if (it == index_.end()) Fail(ErrorCode::kNotFound, "unknown candidate '" + r.candidate_id + "'");
  Entry& e = entries_[it->second];
  for (const auto& a : e.annotations) {
    if (a.annotator_id == r.annotator_id) {
      Fail(ErrorCode::kConflict, "annotator '" + r.annotator_id + "' already annotated '" +
                                     r.candidate_id + "'");
    }
  }
  if (e.record.status != Status::kPending && e.record.status != Status::kAnnotated) {
    Fail(ErrorCode::kState, "candidate '" + r.candidate_id + "' is " +
                                StatusName(e.record.status) + " and takes no annotations");
  }
  CheckDecision(e, r.decision);
  e.annotations.push_back(r);
  std::erase_if(e.leases, [&](const Lease& l) { return l.holder == r.annotator_id; });
  if (e.annotations.size() == 1) {
    e.record.status = Status::kAnnotated;
  } else if (e.annotations[0].decision.Agrees(e.annotations[1].decision)) {
    e.record.status = Status::kFinal;
    e.final_decision = e.annotations[0].decision;
  } else {
    e.record.status = Status::kAdjudication;
  }
  return e.record.status;
}

Status Store::RecordAnnotation(const AnnotationRecord& record) {
  std::unique_lock lock(mutex_);
  const auto it = index_.find(record.candidate_id);
  if (it == index_.end()) {
    Fail(ErrorCode::kNotFound, "unknown candidate '" + record.candidate_id + "'");
  }
  Entry& e = entries_[it->second];
  for (const auto& a : e.annotations) {
    if (a.annotator_id == record.annotator_id) {
      Fail(ErrorCode::kConflict, "annotator '" + record.annotator_id +
                                     "' already annotated '" + record.candidate_id + "'");
    }
  }
  if (e.record.status != Status::kPending && e.record.status != Status::kAnnotated) {
    Fail(ErrorCode::kState, "candidate '" + record.candidate_id + "' is " +
                                StatusName(e.record.status) + " and takes no annotations");
  }
  const std::int64_t now = Now();
  DropExpiredLeases(e, now);
  const bool holds = std::any_of(e.leases.begin(), e.leases.end(), [&](const Lease& l) {
    return l.holder == record.annotator_id;
  });
  if (!holds && e.annotations.size() + e.leases.size() >= kAnnotationsPerCandidate) {
    Fail(ErrorCode::kConflict,
         "candidate '" + record.candidate_id + "' is leased to other annotators");
  }
  CheckDecision(e, record.decision);
  AnnotationRecord stamped = record;
  if (stamped.timestamp_ms == 0) stamped.timestamp_ms = now;
  Append(json{{"event", "annotation_added"},
              {"candidate_id", stamped.candidate_id},
              {"annotator_id", stamped.annotator_id},
              {"decision", DecisionJson(stamped.decision)},
              {"timestamp_ms", stamped.timestamp_ms}}
             .dump());
  return ApplyAnnotation(stamped);
}

Status Store::ApplyAdjudication(const AdjudicationRecord& r) {
  const auto it = index_.find(r.candidate_id);
  if (it == index_.end()) Fail(ErrorCode::kNotFound, "unknown candidate '" + r.candidate_id + "'");
  Entry& e = entries_[it->second];
  if (e.record.status != Status::kAdjudication) {
    Fail(ErrorCode::kState, "candidate '" + r.candidate_id + "' is " +
                                StatusName(e.record.status) + ", not awaiting adjudication");
  }
  for (const auto& a : e.annotations) {
    if (a.annotator_id == r.adjudicator_id) {
      Fail(ErrorCode::kConflict, "adjudicator '" + r.adjudicator_id +
                                     "' annotated this candidate");
    }
  }
  CheckDecision(e, r.decision);
  e.adjudication = r;
  e.leases.clear();
  if (r.decision.kind == DecisionKind::kValid) {
    e.record.status = Status::kFinal;
    e.final_decision = r.decision;
  } else {
    e.record.status = Status::kRejected;
    e.final_decision = r.decision;
  }
  return e.record.status;
}

Status Store::Resolve(const AdjudicationRecord& record) {
  std::unique_lock lock(mutex_);
  const auto it = index_.find(record.candidate_id);
  if (it == index_.end()) {
    Fail(ErrorCode::kNotFound, "unknown candidate '" + record.candidate_id + "'");
  }
  Entry& e = entries_[it->second];
  if (e.record.status != Status::kAdjudication) {
    Fail(ErrorCode::kState, "candidate '" + record.candidate_id + "' is " +
                                StatusName(e.record.status) + ", not awaiting adjudication");
  }
  for (const auto& a : e.annotations) {
    if (a.annotator_id == record.adjudicator_id) {
      Fail(ErrorCode::kConflict,
           "adjudicator '" + record.adjudicator_id + "' annotated this candidate");
    }
  }
  const std::int64_t now = Now();
  DropExpiredLeases(e, now);
  if (!e.leases.empty() && e.leases.front().holder != record.adjudicator_id) {
    Fail(ErrorCode::kConflict,
         "candidate '" + record.candidate_id + "' is leased to another adjudicator");
  }
  CheckDecision(e, record.decision);
  AdjudicationRecord stamped = record;
  if (stamped.timestamp_ms == 0) stamped.timestamp_ms = now;
  Append(json{{"event", "adjudicated"},
              {"candidate_id", stamped.candidate_id},
              {"adjudicator_id", stamped.adjudicator_id},
              {"decision", DecisionJson(stamped.decision)},
              {"timestamp_ms", stamped.timestamp_ms}}
             .dump());
  return ApplyAdjudication(stamped);
}

std::vector<corpus::LabeledExample> Store::Export() {
  std::unique_lock lock(mutex_);
  std::vector<corpus::LabeledExample> out;
  for (const Entry& e : entries_) {
    if (e.record.status != Status::kFinal || !e.final_decision ||
        e.final_decision->kind != DecisionKind::kValid) {
      continue;
    }
    corpus::LabeledExample ex;
    ex.utterance = e.record.paraphrase;
    ex.utterance.id = e.record.candidate_id;
    ex.annotation = e.final_decision->annotation;
    ex.origin = corpus::Origin::kAdversarial;
    ex.parent_id = e.record.original.utterance.id;
    ex.source = e.record.source;
    out.push_back(std::move(ex));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.source < b.source; });
  Append(json{{"event", "exported"}, {"count", out.size()}, {"timestamp_ms", Now()}}.dump());
  return out;
}

void Store::DropExpiredLeases(Entry& entry, std::int64_t now) {
  std::erase_if(entry.leases, [&](const Lease& l) { return l.expires_ms <= now; });
}

CandidateView Store::ViewOf(const Entry& entry, std::int64_t expires) const {
  CandidateView v;
  v.candidate_id = entry.record.candidate_id;
  v.paraphrase_text = entry.record.paraphrase.text;
  v.tokens = entry.record.paraphrase.tokens;
  if (options_.show_original) v.original_text = entry.record.original.utterance.text;
  v.lease_expires_ms = expires;
  return v;
}

std::optional<CandidateView> Store::NextCandidate(const std::string& annotator_id) {
  std::unique_lock lock(mutex_);
  const std::int64_t now = Now();
  // A lease this annotator already holds is handed out again first.
  for (Entry& e : entries_) {
    if (e.record.status != Status::kPending && e.record.status != Status::kAnnotated) continue;
    DropExpiredLeases(e, now);
    for (Lease& l : e.leases) {
      if (l.holder == annotator_id) {
        l.expires_ms = now + options_.lease_ms;
        return ViewOf(e, l.expires_ms);
      }
    }
  }
  for (Entry& e : entries_) {
    if (e.record.status != Status::kPending && e.record.status != Status::kAnnotated) continue;
    const bool done = std::any_of(e.annotations.begin(), e.annotations.end(),
                                  [&](const auto& a) { return a.annotator_id == annotator_id; });
    if (done) continue;
    if (e.annotations.size() + e.leases.size() >= kAnnotationsPerCandidate) continue;
    e.leases.push_back({annotator_id, now + options_.lease_ms});
    return ViewOf(e, now + options_.lease_ms);
  }
  return std::nullopt;
}

std::optional<AdjudicationView> Store::NextAdjudication(const std::string& adjudicator_id) {
  std::unique_lock lock(mutex_);
  const std::int64_t now = Now();
  Entry* pick = nullptr;
  for (Entry& e : entries_) {
    if (e.record.status != Status::kAdjudication) continue;
    const bool annotated = std::any_of(e.annotations.begin(), e.annotations.end(), [&](const auto& a) {
      return a.annotator_id == adjudicator_id;
    });
    if (annotated) continue;
    DropExpiredLeases(e, now);
    if (!e.leases.empty() && e.leases.front().holder == adjudicator_id) {
      pick = &e;
      break;
    }
    if (e.leases.empty() && pick == nullptr) pick = &e;
  }
  if (pick == nullptr) return std::nullopt;
  pick->leases = {{adjudicator_id, now + options_.lease_ms}};
  AdjudicationView v;
  v.candidate = ViewOf(*pick, now + options_.lease_ms);
  for (const auto& a : pick->annotations) v.decisions.push_back(a.decision);
  return v;
}

Progress Store::GetProgress() const {
  std::shared_lock lock(mutex_);
  Progress p;
  for (const Entry& e : entries_) {
    const std::string status = StatusName(e.record.status);
    ++p.by_status[status];
    ++p.by_source[e.record.source][status];
    ++p.total;
  }
  return p;
}

std::optional<CandidateRecord> Store::Find(const std::string& candidate_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(candidate_id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].record;
}

std::vector<AnnotationRecord> Store::Annotations(const std::string& candidate_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(candidate_id);
  if (it == index_.end()) return {};
  return entries_[it->second].annotations;
}

std::optional<AdjudicationRecord> Store::Adjudication(const std::string& candidate_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(candidate_id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].adjudication;
}

std::size_t Store::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace advnlu::advset
