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

#ifndef ADVNLU_ADVSET_STORE_HPP_
#define ADVNLU_ADVSET_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "advnlu/corpus/types.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"
#include "advnlu/tagger/model.hpp"

namespace advnlu::advset {

enum class Status { kPending, kAnnotated, kAdjudication, kFinal, kRejected };

const char* StatusName(Status status);
std::optional<Status> ParseStatus(const std::string& name);

// The only transitions the store performs.
bool IsAllowedTransition(Status from, Status to);

enum class DecisionKind { kValid, kMeaningless, kAmbiguous };

const char* DecisionKindName(DecisionKind kind);
std::optional<DecisionKind> ParseDecisionKind(const std::string& name);

struct Decision {
  DecisionKind kind = DecisionKind::kValid;
  corpus::Annotation annotation;  // meaningful only when kind == kValid

  // Same class, and for valid decisions the same intent and span set.
  bool Agrees(const Decision& other) const;
};

// Audit copy of a model prediction (slot logits are not retained).
struct PredictionRecord {
  std::string intent;
  std::vector<float> intent_logits;
  corpus::TagSequence slot_tags;
  std::vector<corpus::SlotSpan> slots;

  static PredictionRecord From(const tagger::Prediction& prediction);
};

struct CandidateRecord {
  std::string candidate_id;
  corpus::LabeledExample original;
  corpus::Utterance paraphrase;
  std::string source;
  PredictionRecord original_pred;
  PredictionRecord paraphrase_pred;
  Status status = Status::kPending;
};

struct AnnotationRecord {
  std::string candidate_id;
  std::string annotator_id;
  Decision decision;
  std::int64_t timestamp_ms = 0;
};

struct AdjudicationRecord {
  std::string candidate_id;
  std::string adjudicator_id;
  Decision decision;
  std::int64_t timestamp_ms = 0;
};

using Predictor = std::function<tagger::Prediction(const corpus::Utterance&)>;

struct BuildResult {
  std::vector<CandidateRecord> candidates;
  std::vector<std::string> warnings;
};

// One pending candidate per (original, beam) whose predicted intent differs
// from the prediction on the original. Sets naming an unknown original, and
// error records, are skipped with a warning.
BuildResult BuildCandidates(const Predictor& predict,
                            const std::vector<corpus::LabeledExample>& originals,
                            const std::vector<paraphraser::ParaphraseSet>& sets);

// What an annotator sees: never predictions, never other decisions.
struct CandidateView {
  std::string candidate_id;
  std::string paraphrase_text;
  std::vector<std::string> tokens;
  std::optional<std::string> original_text;
  std::int64_t lease_expires_ms = 0;
};

// What an adjudicator sees: the paraphrase and both submitted decisions.
struct AdjudicationView {
  CandidateView candidate;
  std::vector<Decision> decisions;
};

struct Progress {
  std::map<std::string, std::size_t> by_status;
  std::map<std::string, std::map<std::string, std::size_t>> by_source;
  std::size_t total = 0;
};

struct StoreOptions {
  std::int64_t lease_ms = 30 * 60 * 1000;
  bool show_original = true;
  std::function<std::int64_t()> clock;  // defaults to the system clock
};

// Annotation store over an append-only event log. All mutations are
// serialized and appended before they take effect in memory; opening a store
// replays the log.
class Store {
 public:
  // An empty path keeps the store in memory only.
  static std::unique_ptr<Store> Open(const std::string& path, StoreOptions options = {});

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void SetLabelSpace(const corpus::LabelSpace& labels);
  corpus::LabelSpace label_space() const;

  // Throws kConflict on a duplicate candidate id and kPrecondition when a
  // record is not pending or violates the flip predicate.
  void AddCandidates(const std::vector<CandidateRecord>& candidates);

  // Throws kNotFound, kConflict (second annotation by the same annotator, or
  // every annotation slot leased to others) or kValidation (decision does
  // not fit the label space or the paraphrase tokens).
  Status RecordAnnotation(const AnnotationRecord& record);

  // Throws kNotFound, kState (candidate not awaiting adjudication) or
  // kConflict (adjudicator is one of the two annotators).
  Status Resolve(const AdjudicationRecord& record);

  // Final valid candidates, grouped by source descriptor, with the human
  // annotation as gold. Appends an "exported" event.
  std::vector<corpus::LabeledExample> Export();

  std::optional<CandidateView> NextCandidate(const std::string& annotator_id);
  std::optional<AdjudicationView> NextAdjudication(const std::string& adjudicator_id);

  Progress GetProgress() const;
  std::optional<CandidateRecord> Find(const std::string& candidate_id) const;
  std::vector<AnnotationRecord> Annotations(const std::string& candidate_id) const;
  std::optional<AdjudicationRecord> Adjudication(const std::string& candidate_id) const;
  std::size_t size() const;

 private:
  struct Lease {
    std::string holder;
    std::int64_t expires_ms = 0;
  };
  struct Entry {
    CandidateRecord record;
    std::vector<AnnotationRecord> annotations;
    std::optional<AdjudicationRecord> adjudication;
    std::optional<Decision> final_decision;
    std::vector<Lease> leases;
  };

  Store(std::string path, StoreOptions options);

  std::int64_t Now() const;
  void Append(const std::string& line);
  void Replay();
  void ApplyLabels(const corpus::LabelSpace& labels);
  void ApplyCandidate(const CandidateRecord& record);
  Status ApplyAnnotation(const AnnotationRecord& record);
  Status ApplyAdjudication(const AdjudicationRecord& record);
  void CheckDecision(const Entry& entry, const Decision& decision) const;
  void DropExpiredLeases(Entry& entry, std::int64_t now);
  CandidateView ViewOf(const Entry& entry, std::int64_t expires) const;

  std::string path_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  corpus::LabelSpace labels_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

std::string CandidateToJson(const CandidateRecord& record);
CandidateRecord CandidateFromJson(const std::string& json_text);
std::string DecisionToJson(const Decision& decision);
// Throws kValidation with the offending field on malformed input.
Decision DecisionFromJson(const std::string& json_text);

}  // namespace advnlu::advset

#endif  // ADVNLU_ADVSET_STORE_HPP_
