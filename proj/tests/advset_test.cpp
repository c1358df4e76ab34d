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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "advnlu/advset/store.hpp"
#include "advnlu/error.hpp"

namespace advnlu::advset {
namespace {

namespace fs = std::filesystem;

template <typename F>
void ExpectCode(F&& f, ErrorCode code, const std::string& fragment = "") {
  try {
    f();
    ADD_FAILURE() << "expected " << ErrorCodeName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    if (!fragment.empty()) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  }
}

corpus::LabelSpace Labels() {
  return corpus::LabelSpace({"alarm/cancel_alarm", "alarm/snooze_alarm", "weather/find"},
                            {"alarm_name", "datetime", "location"});
}

CandidateRecord MakeCandidate(const std::string& id, const std::string& source = "bt-es",
                              const std::string& text = "pause the gym alarm") {
  CandidateRecord c;
  c.candidate_id = id;
  c.original.utterance = corpus::MakeUtterance("orig-" + id, "cancel the gym alarm");
  c.original.annotation = {"alarm/cancel_alarm", {{"alarm_name", 2, 2}}};
  c.paraphrase = corpus::MakeUtterance(id, text);
  c.source = source;
  c.original_pred.intent = "alarm/cancel_alarm";
  c.paraphrase_pred.intent = "alarm/snooze_alarm";
  return c;
}

Decision Valid(const std::string& intent, std::vector<corpus::SlotSpan> slots = {}) {
  return {DecisionKind::kValid, {intent, std::move(slots)}};
}
Decision Meaningless() { return {DecisionKind::kMeaningless, {}}; }
Decision Ambiguous() { return {DecisionKind::kAmbiguous, {}}; }

const Decision kSnooze = Valid("alarm/snooze_alarm", {{"alarm_name", 2, 2}});

std::unique_ptr<Store> MemoryStore(std::size_t n, std::int64_t* now = nullptr) {
  StoreOptions options;
  if (now != nullptr) options.clock = [now] { return *now; };
  auto store = Store::Open("", options);
  store->SetLabelSpace(Labels());
  std::vector<CandidateRecord> cands;
  for (std::size_t i = 0; i < n; ++i) cands.push_back(MakeCandidate("c" + std::to_string(i)));
  store->AddCandidates(cands);
  return store;
}

void Agree(Store& store, const std::string& id, const Decision& d = kSnooze) {
  store.RecordAnnotation({id, "ann-a", d, 0});
  store.RecordAnnotation({id, "ann-b", d, 0});
}

// ---------------------------------------------------------------------------
// Candidate building and the flip filter.

tagger::Prediction Pred(const std::string& intent) {
  tagger::Prediction p;
  p.intent = intent;
  return p;
}

TEST(BuildCandidates, KeepsOnlyIntentFlips) {
  corpus::LabeledExample orig;
  orig.utterance = corpus::MakeUtterance("t1", "what's the weather in paris");
  orig.annotation = {"weather/find", {{"location", 4, 4}}};
  paraphraser::ParaphraseSet set{"t1", "bt-es",
                                 {{"set an alarm in paris", 0, false},
                                  {"the weather in paris", -1, false},
                                  {"weather in paris city", -2, false}},
                                 ""};
  const Predictor predict = [](const corpus::Utterance& u) {
    tagger::Prediction p = Pred(u.tokens.front() == "set" ? "alarm/set" : "weather/find");
    // Slot predictions differ on the third beam but the filter ignores them.
    if (u.tokens.back() == "city") p.slots = {{"location", 2, 3}};
    return p;
  };
  const BuildResult r = BuildCandidates(predict, {orig}, {set});
  ASSERT_EQ(r.candidates.size(), 1u);
  const CandidateRecord& c = r.candidates[0];
  EXPECT_EQ(c.paraphrase.text, "set an alarm in paris");
  EXPECT_EQ(c.original_pred.intent, "weather/find");
  EXPECT_EQ(c.paraphrase_pred.intent, "alarm/set");
  EXPECT_EQ(c.status, Status::kPending);
  EXPECT_EQ(c.source, "bt-es");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(BuildCandidates, ZeroParaphrasesGiveZeroCandidates) {
  corpus::LabeledExample orig;
  orig.utterance = corpus::MakeUtterance("t1", "snooze");
  const Predictor predict = [](const corpus::Utterance&) { return Pred("x"); };
  EXPECT_TRUE(BuildCandidates(predict, {orig}, {}).candidates.empty());
  EXPECT_TRUE(BuildCandidates(predict, {orig}, {{"t1", "bt", {}, ""}}).candidates.empty());
}

TEST(BuildCandidates, UnknownOriginalAndErrorSetsWarn) {
  corpus::LabeledExample orig;
  orig.utterance = corpus::MakeUtterance("t1", "snooze");
  int calls = 0;
  const Predictor predict = [&](const corpus::Utterance& u) {
    ++calls;
    return Pred(u.text);
  };
  const BuildResult r = BuildCandidates(
      predict, {orig},
      {{"nope", "bt", {{"a b", 0, false}}, ""}, {"t1", "bt", {}, "adapter timed out"}});
  EXPECT_TRUE(r.candidates.empty());
  ASSERT_EQ(r.warnings.size(), 2u);
  EXPECT_NE(r.warnings[0].find("nope"), std::string::npos);
  EXPECT_NE(r.warnings[1].find("adapter timed out"), std::string::npos);
  EXPECT_EQ(calls, 0);
}

// Property: for random originals, beams and a deterministic predictor, the
// retained candidates are exactly the non-blank beams whose predicted intent
// differs from the original's, in input order, with unique ids.
TEST(BuildCandidates, FlipFilterMatchesOracle) {
  const std::vector<std::string> words = {"set", "cancel", "alarm", "weather", "in",
                                          "paris", "now", "the"};
  const Predictor predict = [](const corpus::Utterance& u) {
    std::size_t h = 0;
    for (const auto& t : u.tokens) h = h * 31 + t.size() + static_cast<std::size_t>(t[0]);
    return Pred("intent" + std::to_string(h % 3));
  };
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1200; ++trial) {
    std::vector<corpus::LabeledExample> originals;
    std::vector<paraphraser::ParaphraseSet> sets;
    const int n_orig = 1 + static_cast<int>(rng() % 4);
    for (int o = 0; o < n_orig; ++o) {
      corpus::LabeledExample ex;
      std::string text;
      for (int w = 0, n = 1 + static_cast<int>(rng() % 4); w < n; ++w) {
        text += (w ? " " : "") + words[rng() % words.size()];
      }
      ex.utterance = corpus::MakeUtterance("o" + std::to_string(o), text);
      originals.push_back(ex);
    }
    std::vector<std::pair<std::string, std::string>> expected;  // (original id, text)
    for (int s = 0, n_sets = static_cast<int>(rng() % 4); s < n_sets; ++s) {
      paraphraser::ParaphraseSet set;
      set.original_id = "o" + std::to_string(rng() % (n_orig + 1));  // may be unknown
      set.source = rng() % 2 ? "bt-es" : "seq2seq";
      for (int b = 0, n_beams = static_cast<int>(rng() % 5); b < n_beams; ++b) {
        std::string text;
        for (int w = 0, n = static_cast<int>(rng() % 4); w < n; ++w) {
          text += (w ? " " : "") + words[rng() % words.size()];
        }
        set.beams.push_back({text, -static_cast<double>(b), false});
      }
      const auto it = std::find_if(originals.begin(), originals.end(), [&](const auto& o) {
        return o.utterance.id == set.original_id;
      });
      if (it != originals.end()) {
        const std::string orig_intent = predict(it->utterance).intent;
        for (const auto& beam : set.beams) {
          if (corpus::Tokenize(beam.text).empty()) continue;
          if (predict(corpus::MakeUtterance("x", beam.text)).intent != orig_intent) {
            expected.emplace_back(set.original_id, beam.text);
          }
        }
      }
      sets.push_back(std::move(set));
    }
    const BuildResult r = BuildCandidates(predict, originals, sets);
    ASSERT_EQ(r.candidates.size(), expected.size()) << "trial " << trial;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& c = r.candidates[i];
      EXPECT_EQ(c.original.utterance.id, expected[i].first);
      EXPECT_EQ(c.paraphrase.text, expected[i].second);
      EXPECT_NE(c.original_pred.intent, c.paraphrase_pred.intent);
      EXPECT_EQ(c.paraphrase_pred.intent, predict(c.paraphrase).intent);
      EXPECT_TRUE(ids.insert(c.candidate_id).second);
    }
    // Every retained candidate is accepted by the store's own flip check.
    auto store = Store::Open("");
    ASSERT_NO_THROW(store->AddCandidates(r.candidates));
  }
}

TEST(Store, RejectsCandidatesViolatingTheFlipPredicate) {
  auto store = Store::Open("");
  CandidateRecord c = MakeCandidate("c0");
  c.paraphrase_pred.intent = c.original_pred.intent;
  ExpectCode([&] { store->AddCandidates({c}); }, ErrorCode::kPrecondition);
  store->AddCandidates({MakeCandidate("c0")});
  ExpectCode([&] { store->AddCandidates({MakeCandidate("c0")}); }, ErrorCode::kConflict);
}

// ---------------------------------------------------------------------------
// Annotation and adjudication.

TEST(RecordAnnotation, AgreementFinalizes) {
  auto store = MemoryStore(1);
  EXPECT_EQ(store->RecordAnnotation({"c0", "ann-a", kSnooze, 0}), Status::kAnnotated);
  EXPECT_EQ(store->RecordAnnotation({"c0", "ann-b", kSnooze, 0}), Status::kFinal);
  EXPECT_FALSE(store->Adjudication("c0").has_value());
}

TEST(RecordAnnotation, AgreementIgnoresSpanOrder) {
  auto store = MemoryStore(1, nullptr);
  const Decision a = Valid("weather/find", {{"location", 0, 0}, {"datetime", 2, 3}});
  const Decision b = Valid("weather/find", {{"datetime", 2, 3}, {"location", 0, 0}});
  store->RecordAnnotation({"c0", "ann-a", a, 0});
  EXPECT_EQ(store->RecordAnnotation({"c0", "ann-b", b, 0}), Status::kFinal);
}

TEST(RecordAnnotation, DisagreementGoesToAdjudication) {
  auto store = MemoryStore(3);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  EXPECT_EQ(store->RecordAnnotation({"c0", "ann-b", Meaningless(), 0}), Status::kAdjudication);
  // Near misses on spans also disagree.
  store->RecordAnnotation({"c1", "ann-a", kSnooze, 0});
  EXPECT_EQ(store->RecordAnnotation(
                {"c1", "ann-b", Valid("alarm/snooze_alarm", {{"alarm_name", 1, 2}}), 0}),
            Status::kAdjudication);
  // Two flags of the same class agree.
  store->RecordAnnotation({"c2", "ann-a", Ambiguous(), 0});
  EXPECT_EQ(store->RecordAnnotation({"c2", "ann-b", Ambiguous(), 0}), Status::kFinal);
}

TEST(RecordAnnotation, Errors) {
  auto store = MemoryStore(1);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  ExpectCode([&] { store->RecordAnnotation({"c0", "ann-a", kSnooze, 0}); },
             ErrorCode::kConflict);
  ExpectCode([&] { store->RecordAnnotation({"zz", "ann-a", kSnooze, 0}); },
             ErrorCode::kNotFound);
  ExpectCode([&] {
    store->RecordAnnotation({"c0", "ann-b", Valid("alarm/snooze_alarm", {{"alarm_name", 2, 4}}), 0});
  }, ErrorCode::kValidation, ".end");
  ExpectCode([&] { store->RecordAnnotation({"c0", "ann-b", Valid("music/play"), 0}); },
             ErrorCode::kValidation, "intent");
  ExpectCode([&] {
    store->RecordAnnotation({"c0", "ann-b", Valid("alarm/snooze_alarm", {{"song", 0, 0}}), 0});
  }, ErrorCode::kValidation, "label");
  ExpectCode([&] {
    store->RecordAnnotation({"c0", "ann-b",
                             Valid("alarm/snooze_alarm",
                                   {{"alarm_name", 1, 2}, {"datetime", 2, 3}}), 0});
  }, ErrorCode::kValidation, "slots");
  // Rejected submissions leave no trace.
  EXPECT_EQ(store->Annotations("c0").size(), 1u);
  Agree(*MemoryStore(1), "c0");
}

TEST(RecordAnnotation, ThirdAnnotationIsAStateError) {
  auto store = MemoryStore(1);
  Agree(*store, "c0");
  ExpectCode([&] { store->RecordAnnotation({"c0", "ann-c", kSnooze, 0}); },
             ErrorCode::kState);
}

TEST(Resolve, ValidBecomesFinalWithThatAnnotation) {
  auto store = MemoryStore(1);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  store->RecordAnnotation({"c0", "ann-b", Meaningless(), 0});
  const Decision pause = Valid("alarm/cancel_alarm", {{"alarm_name", 2, 2}});
  EXPECT_EQ(store->Resolve({"c0", "adj", pause, 0}), Status::kFinal);
  const auto out = store->Export();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].annotation.intent, "alarm/cancel_alarm");
}

TEST(Resolve, FlagIsRejected) {
  auto store = MemoryStore(1);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  store->RecordAnnotation({"c0", "ann-b", Meaningless(), 0});
  EXPECT_EQ(store->Resolve({"c0", "adj", Ambiguous(), 0}), Status::kRejected);
  EXPECT_TRUE(store->Export().empty());
}

TEST(Resolve, Errors) {
  auto store = MemoryStore(2);
  Agree(*store, "c0");
  ExpectCode([&] { store->Resolve({"c0", "adj", kSnooze, 0}); }, ErrorCode::kState);
  ExpectCode([&] { store->Resolve({"c1", "adj", kSnooze, 0}); }, ErrorCode::kState);
  ExpectCode([&] { store->Resolve({"zz", "adj", kSnooze, 0}); }, ErrorCode::kNotFound);
  store->RecordAnnotation({"c1", "ann-a", kSnooze, 0});
  store->RecordAnnotation({"c1", "ann-b", Ambiguous(), 0});
  ExpectCode([&] { store->Resolve({"c1", "ann-a", kSnooze, 0}); }, ErrorCode::kConflict);
  EXPECT_EQ(store->Resolve({"c1", "adj", kSnooze, 0}), Status::kFinal);
  ExpectCode([&] { store->Resolve({"c1", "adj2", kSnooze, 0}); }, ErrorCode::kState);
}

// ---------------------------------------------------------------------------
// Export and progress.

TEST(Export, CountsOnlyFinalValid) {
  auto store = Store::Open("");
  store->SetLabelSpace(Labels());
  std::vector<CandidateRecord> cands;
  for (int i = 0; i < 15; ++i) {
    cands.push_back(MakeCandidate("c" + std::to_string(i), i % 2 ? "bt-es" : "seq2seq"));
  }
  store->AddCandidates(cands);
  for (int i = 0; i < 10; ++i) Agree(*store, "c" + std::to_string(i));
  for (int i = 10; i < 13; ++i) {
    const std::string id = "c" + std::to_string(i);
    store->RecordAnnotation({id, "ann-a", kSnooze, 0});
    store->RecordAnnotation({id, "ann-b", Meaningless(), 0});
    store->Resolve({id, "adj", Meaningless(), 0});
  }
  const auto first = store->Export();
  EXPECT_EQ(first.size(), 10u);
  const auto second = store->Export();
  ASSERT_EQ(second.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].utterance.id, second[i].utterance.id);
    EXPECT_EQ(first[i].utterance.text, second[i].utterance.text);
    EXPECT_EQ(first[i].source, second[i].source);
  }
  // Grouped by source, gold is the human annotation, traceable to the original.
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end(),
                             [](const auto& a, const auto& b) { return a.source < b.source; }));
  for (const auto& ex : first) {
    EXPECT_EQ(ex.origin, corpus::Origin::kAdversarial);
    EXPECT_EQ(ex.annotation.intent, "alarm/snooze_alarm");
    EXPECT_EQ(ex.parent_id, "orig-" + ex.utterance.id);
  }
}

TEST(Export, AgreedFlagsAreNotExported) {
  auto store = MemoryStore(2);
  Agree(*store, "c0", Meaningless());
  Agree(*store, "c1", Ambiguous());
  EXPECT_TRUE(store->Export().empty());
}

TEST(Progress, FreshStoreIsAllPending) {
  auto store = MemoryStore(5);
  const Progress p = store->GetProgress();
  EXPECT_EQ(p.by_status, (std::map<std::string, std::size_t>{{"pending", 5}}));
  EXPECT_EQ(p.total, 5u);
}

TEST(Progress, AfterOneAgreement) {
  auto store = MemoryStore(5);
  Agree(*store, "c2");
  const Progress p = store->GetProgress();
  EXPECT_EQ(p.by_status, (std::map<std::string, std::size_t>{{"final", 1}, {"pending", 4}}));
  EXPECT_EQ(p.by_source.at("bt-es").at("final"), 1u);
}

// ---------------------------------------------------------------------------
// Leases and blindness.

TEST(Leases, TwoAnnotatorsShareACandidateButNotASlot) {
  std::int64_t now = 1000;
  auto store = MemoryStore(2, &now);
  const auto a = store->NextCandidate("ann-a");
  const auto b = store->NextCandidate("ann-b");
  const auto c = store->NextCandidate("ann-c");
  ASSERT_TRUE(a && b && c);
  EXPECT_EQ(a->candidate_id, "c0");
  EXPECT_EQ(b->candidate_id, "c0");
  EXPECT_EQ(c->candidate_id, "c1");
  // Polling again returns the lease already held.
  EXPECT_EQ(store->NextCandidate("ann-a")->candidate_id, "c0");
  // Both slots of c0 are leased, so a third annotator cannot submit to it.
  ExpectCode([&] { store->RecordAnnotation({"c0", "ann-c", kSnooze, 0}); },
             ErrorCode::kConflict);
  // Expired leases return to the pool.
  now += 30 * 60 * 1000 + 1;
  EXPECT_NO_THROW(store->RecordAnnotation({"c0", "ann-c", kSnooze, 0}));
}

TEST(Leases, AnnotatorWhoAnnotatedEverythingGetsNone) {
  auto store = MemoryStore(2);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  store->RecordAnnotation({"c1", "ann-a", kSnooze, 0});
  EXPECT_FALSE(store->NextCandidate("ann-a").has_value());
  EXPECT_TRUE(store->NextCandidate("ann-b").has_value());
}

TEST(Blindness, SecondAnnotatorSeesNoEarlierDecision) {
  auto store = MemoryStore(1);
  const auto before = store->NextCandidate("ann-b");
  store->RecordAnnotation({"c0", "ann-a", Meaningless(), 0});
  const auto after = store->NextCandidate("ann-b");
  ASSERT_TRUE(before && after);
  EXPECT_EQ(before->candidate_id, after->candidate_id);
  EXPECT_EQ(before->paraphrase_text, after->paraphrase_text);
  EXPECT_EQ(before->tokens, after->tokens);
  EXPECT_EQ(before->original_text, after->original_text);
  EXPECT_EQ(store->GetProgress().by_status.at("annotated"), 1u);
  // Nothing awaits adjudication until both annotators submit.
  EXPECT_FALSE(store->NextAdjudication("adj").has_value());
}

TEST(Blindness, OriginalTextCanBeHidden) {
  StoreOptions options;
  options.show_original = false;
  auto store = Store::Open("", options);
  store->AddCandidates({MakeCandidate("c0")});
  const auto view = store->NextCandidate("ann-a");
  ASSERT_TRUE(view);
  EXPECT_FALSE(view->original_text.has_value());
  EXPECT_EQ(*MemoryStore(1)->NextCandidate("ann-a")->original_text, "cancel the gym alarm");
}

TEST(Adjudication, QueueSkipsOwnAnnotationsAndShowsBothDecisions) {
  auto store = MemoryStore(1);
  store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  store->RecordAnnotation({"c0", "ann-b", Meaningless(), 0});
  EXPECT_FALSE(store->NextAdjudication("ann-a").has_value());
  const auto view = store->NextAdjudication("adj");
  ASSERT_TRUE(view);
  EXPECT_EQ(view->candidate.candidate_id, "c0");
  ASSERT_EQ(view->decisions.size(), 2u);
  EXPECT_EQ(view->decisions[1].kind, DecisionKind::kMeaningless);
  EXPECT_FALSE(store->NextAdjudication("adj2").has_value());
}

// ---------------------------------------------------------------------------
// Persistence.

class StoreLog : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("advnlu_advset_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    path_ = (dir_ / "events.jsonl").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  std::string path_;
};

TEST_F(StoreLog, ReplayRestoresState) {
  {
    auto store = Store::Open(path_);
    store->SetLabelSpace(Labels());
    store->AddCandidates({MakeCandidate("c0"), MakeCandidate("c1", "seq2seq"),
                          MakeCandidate("c2")});
    Agree(*store, "c0");
    store->RecordAnnotation({"c1", "ann-a", kSnooze, 0});
    store->RecordAnnotation({"c1", "ann-b", Ambiguous(), 0});
    store->Resolve({"c1", "adj", Meaningless(), 0});
    store->Export();
  }
  auto store = Store::Open(path_);
  EXPECT_EQ(store->size(), 3u);
  EXPECT_EQ(store->label_space().intents(), Labels().intents());
  EXPECT_EQ(store->Find("c0")->status, Status::kFinal);
  EXPECT_EQ(store->Find("c1")->status, Status::kRejected);
  EXPECT_EQ(store->Find("c2")->status, Status::kPending);
  EXPECT_EQ(store->Annotations("c1").size(), 2u);
  EXPECT_EQ(store->Adjudication("c1")->adjudicator_id, "adj");
  EXPECT_EQ(store->Export().size(), 1u);
  EXPECT_EQ(store->Find("c0")->paraphrase_pred.intent, "alarm/snooze_alarm");
}

TEST_F(StoreLog, TruncatedTailIsIgnored) {
  {
    auto store = Store::Open(path_);
    store->AddCandidates({MakeCandidate("c0")});
    store->RecordAnnotation({"c0", "ann-a", kSnooze, 0});
  }
  {
    std::ofstream out(path_, std::ios::app);
    out << R"({"event":"annotation_added","candidate_id":"c0","annot)";
  }
  auto store = Store::Open(path_);
  EXPECT_EQ(store->Find("c0")->status, Status::kAnnotated);
}

TEST_F(StoreLog, CorruptMiddleLineFails) {
  fs::create_directories(dir_);
  {
    std::ofstream out(path_);
    out << "not json\n" << R"({"event":"exported","count":0})" << "\n";
  }
  ExpectCode([&] { Store::Open(path_); }, ErrorCode::kParse, ":1");
}

// ---------------------------------------------------------------------------
// Status DAG property.

// Independent model of the lifecycle used as the oracle.
struct ModelCandidate {
  std::vector<std::pair<std::string, Decision>> annotations;
  bool adjudicated = false;
  Status status = Status::kPending;
};

TEST_F(StoreLog, RandomOperationSequencesFollowTheDag) {
  const std::vector<std::string> people = {"p0", "p1", "p2", "p3"};
  const std::vector<Decision> decisions = {
      kSnooze, Valid("alarm/snooze_alarm"), Valid("weather/find", {{"location", 0, 0}}),
      Meaningless(), Ambiguous()};
  std::mt19937_64 rng(77);
  int transitions = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool persist = trial % 10 == 0;
    if (persist) fs::remove_all(dir_);
    auto store = Store::Open(persist ? path_ : "");
    store->SetLabelSpace(Labels());
    const int n = 1 + static_cast<int>(rng() % 3);
    std::vector<CandidateRecord> cands;
    for (int i = 0; i < n; ++i) cands.push_back(MakeCandidate("c" + std::to_string(i)));
    store->AddCandidates(cands);
    std::vector<ModelCandidate> model(n);
    for (int step = 0, steps = static_cast<int>(rng() % 12); step < steps; ++step) {
      const int ci = static_cast<int>(rng() % n);
      const std::string id = "c" + std::to_string(ci);
      const std::string who = people[rng() % people.size()];
      const Decision& d = decisions[rng() % decisions.size()];
      ModelCandidate& m = model[ci];
      const Status before = store->Find(id)->status;
      ASSERT_EQ(before, m.status);
      if (rng() % 3 != 0) {
        const bool dup = std::any_of(m.annotations.begin(), m.annotations.end(),
                                     [&](const auto& a) { return a.first == who; });
        const bool open = m.status == Status::kPending || m.status == Status::kAnnotated;
        try {
          store->RecordAnnotation({id, who, d, 0});
          ASSERT_TRUE(open && !dup);
          m.annotations.emplace_back(who, d);
          if (m.annotations.size() == 1) {
            m.status = Status::kAnnotated;
          } else {
            m.status = m.annotations[0].second.Agrees(m.annotations[1].second)
                           ? Status::kFinal
                           : Status::kAdjudication;
          }
        } catch (const Error& e) {
          ASSERT_FALSE(open && !dup) << e.what();
          ASSERT_EQ(e.code(), dup ? ErrorCode::kConflict : ErrorCode::kState);
        }
      } else {
        const bool annotated = std::any_of(m.annotations.begin(), m.annotations.end(),
                                           [&](const auto& a) { return a.first == who; });
        try {
          store->Resolve({id, who, d, 0});
          ASSERT_TRUE(m.status == Status::kAdjudication && !annotated);
          m.adjudicated = true;
          m.status = d.kind == DecisionKind::kValid ? Status::kFinal : Status::kRejected;
        } catch (const Error& e) {
          ASSERT_FALSE(m.status == Status::kAdjudication && !annotated) << e.what();
          ASSERT_EQ(e.code(), m.status == Status::kAdjudication ? ErrorCode::kConflict
                                                                : ErrorCode::kState);
        }
      }
      const Status after = store->Find(id)->status;
      ASSERT_EQ(after, m.status);
      if (after != before) {
        ASSERT_TRUE(IsAllowedTransition(before, after))
            << StatusName(before) << " -> " << StatusName(after);
        ++transitions;
      }
    }
    std::size_t expected_export = 0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "c" + std::to_string(i);
      const ModelCandidate& m = model[i];
      const auto anns = store->Annotations(id);
      ASSERT_EQ(anns.size(), m.annotations.size());
      // Audit chain: an adjudication exists iff the two annotations disagree.
      const bool disagree = anns.size() == 2 && !anns[0].decision.Agrees(anns[1].decision);
      ASSERT_EQ(store->Adjudication(id).has_value(), m.adjudicated);
      if (m.adjudicated) {
        ASSERT_TRUE(disagree);
      }
      if (m.status == Status::kFinal) {
        const Decision& final_d =
            m.adjudicated ? store->Adjudication(id)->decision : anns[0].decision;
        if (final_d.kind == DecisionKind::kValid) ++expected_export;
      }
    }
    ASSERT_EQ(store->Export().size(), expected_export);
    if (persist) {
      auto reopened = Store::Open(path_);
      for (int i = 0; i < n; ++i) {
        ASSERT_EQ(reopened->Find("c" + std::to_string(i))->status, model[i].status);
      }
      ASSERT_EQ(reopened->Export().size(), expected_export);
    }
  }
  EXPECT_GT(transitions, 1000);
}

TEST(IsAllowedTransition, MatchesTheDag) {
  const std::set<std::pair<Status, Status>> allowed = {
      {Status::kPending, Status::kAnnotated},
      {Status::kAnnotated, Status::kFinal},
      {Status::kAnnotated, Status::kAdjudication},
      {Status::kAdjudication, Status::kFinal},
      {Status::kAdjudication, Status::kRejected}};
  const Status all[] = {Status::kPending, Status::kAnnotated, Status::kAdjudication,
                        Status::kFinal, Status::kRejected};
  for (Status a : all) {
    for (Status b : all) EXPECT_EQ(IsAllowedTransition(a, b), allowed.count({a, b}) > 0);
    EXPECT_EQ(ParseStatus(StatusName(a)), a);
  }
}

// ---------------------------------------------------------------------------
// JSON.

TEST(DecisionJson, RoundTripAndFieldErrors) {
  const Decision d = Valid("weather/find", {{"location", 3, 4}});
  const Decision back = DecisionFromJson(DecisionToJson(d));
  EXPECT_TRUE(back.Agrees(d));
  EXPECT_EQ(DecisionFromJson(R"({"kind":"meaningless"})").kind, DecisionKind::kMeaningless);
  ExpectCode([] { DecisionFromJson(R"({"kind":"maybe"})"); }, ErrorCode::kValidation, "kind");
  ExpectCode([] { DecisionFromJson(R"({"kind":"valid"})"); }, ErrorCode::kValidation,
             "intent");
  ExpectCode([] { DecisionFromJson(R"({"kind":"valid","intent":"x","slots":[{"label":"a"}]})"); },
             ErrorCode::kValidation, "slots[0]");
  ExpectCode([] { DecisionFromJson("{"); }, ErrorCode::kValidation);
}

TEST(CandidateJson, RoundTrip) {
  CandidateRecord c = MakeCandidate("c9", "seq2seq");
  c.original_pred.intent_logits = {0.5f, -1.25f};
  c.paraphrase_pred.slot_tags = {"O", "O", "B-alarm_name", "O"};
  c.paraphrase_pred.slots = {{"alarm_name", 2, 2}};
  const CandidateRecord back = CandidateFromJson(CandidateToJson(c));
  EXPECT_EQ(back.candidate_id, "c9");
  EXPECT_EQ(back.source, "seq2seq");
  EXPECT_EQ(back.paraphrase.tokens, c.paraphrase.tokens);
  EXPECT_EQ(back.original.annotation.slots, c.original.annotation.slots);
  EXPECT_EQ(back.original_pred.intent_logits, c.original_pred.intent_logits);
  EXPECT_EQ(back.paraphrase_pred.slot_tags, c.paraphrase_pred.slot_tags);
  EXPECT_EQ(back.paraphrase_pred.slots, c.paraphrase_pred.slots);
  ExpectCode([] { CandidateFromJson("[]"); }, ErrorCode::kParse);
}

}  // namespace
}  // namespace advnlu::advset
