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
#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "advnlu/corpus/synthetic.hpp"
#include "advnlu/error.hpp"
#include "advnlu/paraphraser/adapter.hpp"
#include "advnlu/paraphraser/autoencoder.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"
#include "advnlu/paraphraser/rule_paraphraser.hpp"
#include "advnlu/tensor/grad_check.hpp"

namespace advnlu::paraphraser {
namespace {

std::vector<Beam> Beams(const std::vector<std::string>& texts) {
  std::vector<Beam> out;
  for (const auto& t : texts) out.push_back({t, 0.0, false});
  return out;
}

std::vector<std::string> Texts(const std::vector<Beam>& beams) {
  std::vector<std::string> out;
  for (const auto& b : beams) out.push_back(b.text);
  return out;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

TEST(Dedupe, DropsReferenceAndInternalDuplicates) {
  EXPECT_EQ(Texts(Dedupe(Beams({"Foo Bar", "foo bar", "foo baz"}), {"foo bar"})),
            std::vector<std::string>{"foo baz"});
}

TEST(Dedupe, EmptyReferenceOnlyRemovesInternalDuplicates) {
  EXPECT_EQ(Texts(Dedupe(Beams({"A b", "a B", "c"}), {})),
            (std::vector<std::string>{"A b", "c"}));
}

TEST(Dedupe, AllBeamsInReference) {
  EXPECT_TRUE(Dedupe(Beams({"x", "Y"}), {"x", "y"}).empty());
}

// Oracle: quadratic scan that keeps a beam iff its lowercase form is neither
// in the reference nor equal to the lowercase form of any earlier beam.
TEST(DedupeProperty, MatchesQuadraticOracle) {
  std::mt19937 rng(11);
  const std::vector<std::string> pool = {"a", "A", "b", "B b", "b B", "c d", "C D", "e"};
  for (int trial = 0; trial < 1500; ++trial) {
    std::vector<std::string> texts;
    const int n = static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) texts.push_back(pool[rng() % pool.size()]);
    std::set<std::string> reference;
    for (const auto& p : pool) {
      if (rng() % 4 == 0) reference.insert(Lower(p));
    }
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      bool keep = reference.count(Lower(texts[i])) == 0;
      for (std::size_t j = 0; j < i && keep; ++j) keep = Lower(texts[j]) != Lower(texts[i]);
      if (keep) expected.push_back(texts[i]);
    }
    ASSERT_EQ(Texts(Dedupe(Beams(texts), reference)), expected) << "trial " << trial;
  }
}

TEST(FilterBeams, WhitespaceVariantOfOriginalIsDropped) {
  EXPECT_EQ(Texts(FilterBeams(Beams({"When  is sunset ", "when is dusk", "  "}), "when is sunset", 3)),
            std::vector<std::string>{"when is dusk"});
}

TEST(FilterBeamsProperty, CapAndInvariantsHold) {
  std::mt19937 rng(5);
  const std::vector<std::string> pool = {"when is sunset", "When Is Sunset", "when is dusk",
                                         "WHEN IS DUSK", "sundown time", "  ", "dusk"};
  for (int trial = 0; trial < 1200; ++trial) {
    std::vector<std::string> texts;
    const int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) texts.push_back(pool[rng() % pool.size()]);
    const std::size_t k = 1 + rng() % 5;
    ParaphraseSet set;
    set.beams = FilterBeams(Beams(texts), "when is sunset", k);
    ASSERT_TRUE(IsWellFormed(set, "when is sunset", k)) << "trial " << trial;
    // The kept beams are a prefix of the oracle-deduplicated list.
    std::vector<std::string> oracle;
    for (const auto& t : texts) {
      if (t.find_first_not_of(' ') == std::string::npos) continue;
      if (Lower(t) == "when is sunset") continue;
      bool dup = false;
      for (const auto& o : oracle) dup = dup || Lower(o) == Lower(t);
      if (!dup) oracle.push_back(t);
    }
    if (oracle.size() > k) oracle.resize(k);
    ASSERT_EQ(Texts(set.beams), oracle) << "trial " << trial;
  }
}

TEST(ParaphraseCache, RoundTripsAndToleratesTruncatedTail) {
  const auto dir = std::filesystem::temp_directory_path() / "advnlu_cache_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "cache.jsonl").string();
  ParaphraseSet a{"u1", "bt-es", {{"hola world", -0.5, false}}, ""};
  ParaphraseSet b{"u2", "seq2seq", {}, "adapter timed out"};
  AppendCache(path, {a});
  AppendCache(path, {b});
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"id\": \"u3\", \"sou";
  }
  const auto back = ReadCache(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], a);
  EXPECT_EQ(back[1], b);
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Back-translation adapter.

std::vector<corpus::Utterance> Utterances(const std::vector<std::string>& texts) {
  std::vector<corpus::Utterance> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back(corpus::MakeUtterance("u" + std::to_string(i), texts[i]));
  }
  return out;
}

AdapterOptions Adapter(std::vector<std::string> args, std::size_t k = 5) {
  AdapterOptions o;
  o.argv = {FAKE_ADAPTER};
  o.argv.insert(o.argv.end(), args.begin(), args.end());
  o.source = "bt-es";
  o.k = k;
  o.timeout_ms = 2000;
  return o;
}

TEST(Backtranslate, EchoAdapterYieldsNoBeams) {
  const auto sets = Backtranslate(Utterances({"when is sunset", "set an alarm"}),
                                  Adapter({"echo"}));
  ASSERT_EQ(sets.size(), 2u);
  for (const auto& s : sets) {
    EXPECT_TRUE(s.error.empty());
    EXPECT_TRUE(s.beams.empty());
    EXPECT_EQ(s.source, "bt-es");
  }
  EXPECT_EQ(sets[1].original_id, "u1");
}

TEST(Backtranslate, KeepsParaphrasesAndExcludesOriginal) {
  const std::string original = "Can I get the 10 day forecast?";
  const auto sets = Backtranslate(
      Utterances({original}),
      Adapter({"list", "Can I get the 10 days forecast?", "can i get the 10 day forecast?",
               "Could I get the 10 day forecast?"}));
  EXPECT_EQ(Texts(sets[0].beams),
            (std::vector<std::string>{"Can I get the 10 days forecast?",
                                      "Could I get the 10 day forecast?"}));
}

TEST(Backtranslate, CapsAtK) {
  const auto sets = Backtranslate(Utterances({"snooze for 5 minutes"}), Adapter({"over"}, 5));
  ASSERT_EQ(sets[0].beams.size(), 5u);
  EXPECT_EQ(sets[0].beams[0].text, "para 0 snooze for 5 minutes");
  EXPECT_EQ(sets[0].beams[4].text, "para 4 snooze for 5 minutes");
}

TEST(Backtranslate, MalformedLinesBecomePerUtteranceErrors) {
  AdapterOptions o = Adapter({"malformed"});
  o.max_in_flight = 1;
  const auto sets = Backtranslate(Utterances({"a b", "c d", "e f", "g h"}), o);
  ASSERT_EQ(sets.size(), 4u);
  EXPECT_TRUE(sets[0].error.empty());
  EXPECT_FALSE(sets[1].error.empty());
  EXPECT_TRUE(sets[1].beams.empty());
  EXPECT_TRUE(sets[2].error.empty());
  EXPECT_FALSE(sets[3].error.empty());
  EXPECT_EQ(Texts(sets[2].beams), std::vector<std::string>{"e f please"});
}

TEST(Backtranslate, CrashingAdapterIsRestarted) {
  AdapterOptions o = Adapter({"crash", "2"});
  o.max_in_flight = 1;
  const auto sets = Backtranslate(Utterances({"a", "b", "c", "d", "e"}), o);
  ASSERT_EQ(sets.size(), 5u);
  EXPECT_TRUE(sets[0].error.empty());
  EXPECT_TRUE(sets[1].error.empty());
  EXPECT_FALSE(sets[2].error.empty());
  EXPECT_TRUE(sets[3].error.empty());
  EXPECT_TRUE(sets[4].error.empty());
}

TEST(Backtranslate, TimeoutIsIsolated) {
  AdapterOptions o = Adapter({"hang"});
  o.max_in_flight = 1;
  o.timeout_ms = 300;
  const auto sets = Backtranslate(Utterances({"ok one", "hang here", "ok two"}), o);
  EXPECT_TRUE(sets[0].error.empty());
  EXPECT_EQ(sets[1].error, "adapter timed out");
  EXPECT_TRUE(sets[2].error.empty());
  EXPECT_EQ(Texts(sets[2].beams), std::vector<std::string>{"ok two please"});
}

TEST(Backtranslate, MissingProgramFailsEveryUtterance) {
  AdapterOptions o;
  o.argv = {"/nonexistent/advnlu-adapter"};
  o.timeout_ms = 1000;
  const auto sets = Backtranslate(Utterances({"a", "b"}), o);
  for (const auto& s : sets) EXPECT_FALSE(s.error.empty());
}

TEST(BacktranslateProperty, AdversarialResponsesYieldWellFormedSets) {
  std::vector<std::string> texts;
  for (int i = 0; i < 1000; ++i) {
    texts.push_back(i % 3 == 0 ? "Alpha beta" : "gamma " + std::to_string(i % 17));
  }
  const auto utterances = Utterances(texts);
  for (std::size_t k : {1u, 3u, 5u}) {
    AdapterOptions o = Adapter({"random"}, k);
    o.max_in_flight = 16;
    const auto sets = Backtranslate(utterances, o);
    ASSERT_EQ(sets.size(), utterances.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
      ASSERT_TRUE(sets[i].error.empty());
      ASSERT_EQ(sets[i].original_id, utterances[i].id);
      ASSERT_TRUE(IsWellFormed(sets[i], utterances[i].text, k)) << i;
    }
  }
}

TEST(SplitCommand, HonorsQuotes) {
  EXPECT_EQ(SplitCommand("python3 'my adapter.py' --lang \"es\""),
            (std::vector<std::string>{"python3", "my adapter.py", "--lang", "es"}));
  EXPECT_THROW(SplitCommand("a 'b"), Error);
}

// ---------------------------------------------------------------------------
// Rule paraphraser.

TEST(RuleParaphrase, AppliesSynonymRule) {
  const std::vector<corpus::TransformRule> rules = {
      {corpus::TransformKind::kSynonym, {"dusk"}, {{"sunset"}}, false}};
  const auto set = RuleParaphrase(corpus::MakeUtterance("u", "when is dusk"), rules, 1, 5);
  EXPECT_EQ(Texts(set.beams), std::vector<std::string>{"when is sunset"});
  EXPECT_EQ(set.source, "rulebased");
}

TEST(RuleParaphrase, NoApplicableRule) {
  const std::vector<corpus::TransformRule> rules = {
      {corpus::TransformKind::kSynonym, {"dusk"}, {{"sunset"}}, false}};
  EXPECT_TRUE(RuleParaphrase(corpus::MakeUtterance("u", "set an alarm"), rules, 1, 5)
                  .beams.empty());
  EXPECT_THROW(RuleParaphrase(corpus::MakeUtterance("u", "x"), {}, 1, 5), Error);
}

TEST(RuleParaphrase, DeterministicPerSeedAndCapped) {
  const auto rules = corpus::DefaultGrammar().rules;
  const auto u = corpus::MakeUtterance("u", "cancel my alarm for 7 am");
  const auto a = RuleParaphrase(u, rules, 42, 4);
  const auto b = RuleParaphrase(u, rules, 42, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.beams.size(), 4u);
  EXPECT_TRUE(IsWellFormed(a, u.text, 4));
  for (std::size_t i = 1; i < a.beams.size(); ++i) {
    EXPECT_LE(a.beams[i].score, a.beams[i - 1].score);
  }
}

// ---------------------------------------------------------------------------
// Sequence autoencoder.

const std::vector<std::string> kToyCorpus = {
    "when is sunset",          "set an alarm for 7 am",   "what's the weather in paris",
    "snooze for 5 minutes",    "cancel my gym alarm",     "show my alarms",
    "wake me up at noon",      "rain in london tomorrow", "list all my alarms",
    "when does the sun go down"};

std::vector<corpus::Utterance> ToyUtterances() { return Utterances(kToyCorpus); }

AutoencoderConfig ToyConfig() {
  AutoencoderConfig c;
  c.hidden_size = 48;
  c.embedding_dim = 24;
  c.epochs = 120;
  c.batch_size = 2;
  c.learning_rate = 0.01;
  c.seed = 3;
  return c;
}

class ToyAutoencoder : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    result_ = new AutoencoderResult(TrainAutoencoder(ToyUtterances(), ToyConfig()));
  }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static AutoencoderResult* result_;
};

AutoencoderResult* ToyAutoencoder::result_ = nullptr;

TEST_F(ToyAutoencoder, MemorizesToyCorpus) {
  int exact = 0;
  for (const auto& u : ToyUtterances()) {
    if (result_->model.Detokenize(GreedyDecode(result_->model, u)) == u.normalized()) ++exact;
  }
  EXPECT_GE(exact, 9);
}

TEST_F(ToyAutoencoder, LossNonIncreasingEarly) {
  const auto& l = result_->epoch_losses;
  ASSERT_GE(l.size(), 3u);
  EXPECT_LE(l[1], l[0]);
  EXPECT_LE(l[2], l[1]);
}

TEST_F(ToyAutoencoder, ZeroNoiseMemorizedBeamIsDropped) {
  const auto u = ToyUtterances()[0];
  ASSERT_EQ(result_->model.Detokenize(GreedyDecode(result_->model, u)), u.normalized());
  const auto set = PerturbDecode(result_->model, u, 0.0, 1, 9);
  EXPECT_TRUE(set.beams.empty());
}

TEST_F(ToyAutoencoder, WidthOneBeamEqualsGreedy) {
  for (const auto& u : ToyUtterances()) {
    for (double sigma : {0.0, 0.5}) {
      std::vector<float> h, c;
      result_->model.Encode(u, h, c);
      std::mt19937_64 rng(17);
      std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
      if (sigma > 0) {
        for (float& v : h) v += static_cast<float>(noise(rng));
      }
      const std::size_t max_len = result_->model.MaxDecodeLen(u);
      const Hypothesis g = result_->model.Greedy(h, c, max_len);
      const auto beams = result_->model.Beam(h, c, 1, max_len);
      ASSERT_EQ(beams.size(), 1u);
      EXPECT_EQ(beams[0].ids, g.ids);
      EXPECT_EQ(beams[0].truncated, g.truncated);
      EXPECT_DOUBLE_EQ(beams[0].logprob, g.logprob);
    }
  }
}

TEST_F(ToyAutoencoder, BeamScoresNonIncreasingAndSeeded) {
  for (const auto& u : ToyUtterances()) {
    const auto a = PerturbDecode(result_->model, u, 0.8, 5, 4);
    const auto b = PerturbDecode(result_->model, u, 0.8, 5, 4);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(IsWellFormed(a, u.text, 5));
    for (std::size_t i = 1; i < a.beams.size(); ++i) {
      EXPECT_LE(a.beams[i].score, a.beams[i - 1].score);
    }
  }
}

TEST_F(ToyAutoencoder, ZeroNoiseIsPure) {
  const auto u = ToyUtterances()[4];
  EXPECT_EQ(PerturbDecode(result_->model, u, 0.0, 3, 1),
            PerturbDecode(result_->model, u, 0.0, 3, 999));
}

TEST_F(ToyAutoencoder, TruncatesAtMaxLength) {
  std::vector<float> h, c;
  result_->model.Encode(ToyUtterances()[1], h, c);
  const Hypothesis g = result_->model.Greedy(h, c, 2);
  EXPECT_TRUE(g.truncated);
  EXPECT_EQ(g.ids.size(), 2u);
  for (const auto& hyp : result_->model.Beam(h, c, 3, 2)) {
    EXPECT_TRUE(hyp.truncated);
  }
}

TEST_F(ToyAutoencoder, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "advnlu_ae_test";
  std::filesystem::remove_all(dir);
  result_->model.Save(dir.string());
  const Seq2SeqModel loaded = Seq2SeqModel::Load(dir.string());
  for (const auto& u : ToyUtterances()) {
    EXPECT_EQ(GreedyDecode(loaded, u).ids, GreedyDecode(result_->model, u).ids);
  }
  std::filesystem::remove_all(dir);
}

TEST(Autoencoder, FixedSeedGivesIdenticalParameters) {
  AutoencoderConfig c = ToyConfig();
  c.epochs = 3;
  auto a = TrainAutoencoder(ToyUtterances(), c);
  auto b = TrainAutoencoder(ToyUtterances(), c);
  auto pa = a.model.mutable_net().Params();
  auto pb = b.model.mutable_net().Params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_TRUE(std::equal(pa[i].second->values().begin(), pa[i].second->values().end(),
                           pb[i].second->values().begin()))
        << pa[i].first;
  }
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
}

TEST(Autoencoder, ReconstructionGradientMatchesFiniteDifferences) {
  Seq2SeqNet<double> net(9, 3, 4);
  tensor::Rng rng(2);
  for (auto& [name, t] : net.Params()) tensor::InitUniform(*t, 0.5, rng);
  auto params = net.Params();
  for (auto& [name, t] : params) t->EnableGrad();
  const std::vector<std::int32_t> ids = {4, 7, 5, 8};
  const auto r = tensor::GradCheck<double>(
      [&](bool backward) { return ReconstructionLoss<double>(net, ids, backward); }, params,
      1e-5);
  // Whole-model composite: gradients near 1e-7 leave round-off near 1e-4.
  EXPECT_LT(r.max_relative_error, 1e-3)
      << r.worst_parameter << "[" << r.worst_index << "] " << r.worst_analytic << " vs "
      << r.worst_numeric;
}

TEST(Autoencoder, RejectsEmptyCorpus) {
  EXPECT_THROW(TrainAutoencoder({}, ToyConfig()), Error);
}

}  // namespace
}  // namespace advnlu::paraphraser
