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

// Acceptance suite. Prints one PASS, FAIL or SKIP line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advnlu/advset/store.hpp"
#include "advnlu/corpus/bio.hpp"
#include "advnlu/corpus/synthetic.hpp"
#include "advnlu/error.hpp"
#include "advnlu/pairing/pairing.hpp"
#include "advnlu/paraphraser/autoencoder.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"
#include "advnlu/pipeline/pipeline.hpp"
#include "advnlu/report/report.hpp"
#include "advnlu/tagger/train.hpp"
#include "advnlu/tensor/grad_check.hpp"
#include "advnlu/tensor/lstm.hpp"
#include "advnlu/tensor/ops.hpp"

namespace advnlu {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using corpus::Annotation;
using corpus::SlotSpan;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kPass;
  std::string detail;
};

// Collects failure messages; the criterion passes when none were recorded.
class Checker {
 public:
  void Expect(bool ok, const std::string& message) {
    if (!ok && failures_.size() < 5) failures_.push_back(message);
    if (!ok) ++failed_;
  }
  Verdict Finish(const std::string& summary) const {
    if (failed_ == 0) return {Outcome::kPass, summary};
    std::string detail = std::to_string(failed_) + " failed check(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) detail += (i ? "; " : "") + failures_[i];
    return {Outcome::kFail, detail};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Non-overlapping random spans over `len` tokens.
std::vector<SlotSpan> RandomSpans(std::mt19937_64& rng, int len,
                                  const std::vector<std::string>& labels) {
  std::vector<SlotSpan> out;
  int pos = static_cast<int>(rng() % 2);
  while (pos < len) {
    const int end = std::min(len - 1, pos + static_cast<int>(rng() % 3));
    out.push_back({labels[rng() % labels.size()], pos, end});
    pos = end + 1 + static_cast<int>(rng() % 3);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient fidelity.

template <typename T>
tensor::Tensor<T> Random(tensor::Shape shape, tensor::Rng& rng, double scale = 1.0) {
  tensor::Tensor<T> t(std::move(shape));
  tensor::InitUniform(t, scale, rng);
  return t;
}

corpus::LabeledExample Example(const std::string& id, const std::string& text,
                               const std::string& intent, std::vector<SlotSpan> slots) {
  corpus::LabeledExample ex;
  ex.utterance = corpus::MakeUtterance(id, text);
  ex.annotation = {intent, std::move(slots)};
  return ex;
}

Verdict GradientFidelity() {
  using tensor::GradCheck;
  using tensor::LossFn;
  using tensor::Tensor;
  const auto start = std::chrono::steady_clock::now();
  Checker check;
  std::map<std::string, double> worst;
  const auto op = [&](const std::string& name, const tensor::GradCheckResult& r, double tol) {
    worst[name] = std::max(worst[name], r.max_relative_error);
    check.Expect(r.max_relative_error <= tol,
                 name + " " + Fmt("%.2e", r.max_relative_error) + " at " + r.worst_parameter);
  };

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    tensor::Rng rng(seed);
    Tensor<double> x = Random<double>({2, 3}, rng), w = Random<double>({3, 4}, rng),
                   b = Random<double>({4}, rng);
    const Tensor<double> r = Random<double>({2, 4}, rng);
    op("affine",
       GradCheck<double>(
           [&](bool backward) {
             const auto y = tensor::Affine(x, w, b);
             double s = 0;
             for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
             if (backward) tensor::AffineBackward(x, w, b, r);
             return s;
           },
           {{"x", &x}, {"w", &w}, {"b", &b}}, 1e-5),
       1e-4);

    Tensor<double> table = Random<double>({5, 3}, rng);
    const std::vector<std::int32_t> ids = {1, 4, 1, 0};
    const Tensor<double> re = Random<double>({4, 3}, rng);
    op("embedding",
       GradCheck<double>(
           [&](bool backward) {
             const auto e = tensor::EmbeddingLookup<double>(table, ids);
             double s = 0;
             for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * e[i] * re[i];
             if (backward) {
               Tensor<double> d(e.shape());
               for (std::size_t i = 0; i < e.size(); ++i) d[i] = 2 * e[i] * re[i];
               tensor::EmbeddingBackward<double>(table, ids, d);
             }
             return s;
           },
           {{"table", &table}}, 1e-5),
       1e-4);

    Tensor<double> logits = Random<double>({6}, rng, 3.0);
    op("softmax_cross_entropy",
       GradCheck<double>(
           [&](bool backward) {
             return tensor::SoftmaxCrossEntropy<double>(
                 logits.values(), seed % 6, backward ? logits.grad() : std::span<double>());
           },
           {{"logits", &logits}}, 1e-5),
       1e-4);

    Tensor<double> a = Random<double>({7}, rng), c = Random<double>({7}, rng);
    op("mse",
       GradCheck<double>(
           [&](bool backward) {
             if (backward) tensor::MseBackward<double>(a.values(), c.values(), 1.0, a.grad(), c.grad());
             return tensor::Mse<double>(a.values(), c.values());
           },
           {{"a", &a}, {"b", &c}}, 1e-5),
       1e-4);

    Tensor<double> v = Random<double>({8}, rng);
    const auto mask = tensor::DropoutMask<double>(8, 0.4, rng);
    const Tensor<double> rv = Random<double>({8}, rng);
    op("dropout",
       GradCheck<double>(
           [&](bool backward) {
             std::vector<double> y(v.values().begin(), v.values().end());
             tensor::ApplyMask<double>(y, mask);
             double s = 0;
             for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * rv[i];
             if (backward) {
               for (std::size_t i = 0; i < y.size(); ++i) v.grad()[i] += mask[i] * rv[i];
             }
             return s;
           },
           {{"v", &v}}, 1e-5),
       1e-4);

    std::vector<tensor::BiLstmLayer<double>> layers = {tensor::BiLstmLayer<double>(2, 3),
                                                       tensor::BiLstmLayer<double>(6, 3)};
    tensor::ParamList<double> params;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].fwd.AppendTo(params, "l" + std::to_string(l) + ".fwd");
      layers[l].bwd.AppendTo(params, "l" + std::to_string(l) + ".bwd");
    }
    for (auto& [name, t] : params) tensor::InitUniform(*t, 0.5, rng);
    Tensor<double> emb = Random<double>({4, 2}, rng);
    params.emplace_back("emb", &emb);
    const Tensor<double> rl = Random<double>({4, 6}, rng);
    op("bilstm",
       GradCheck<double>(
           [&](bool backward) {
             tensor::BiLstmCache<double> cache;
             const auto out =
                 tensor::BiLstmEncode<double>(emb, layers, 0.0, false, nullptr, &cache);
             double s = 0;
             for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * rl[i];
             if (backward) {
               const auto d_emb = tensor::BiLstmBackward<double>(layers, cache, rl);
               for (std::size_t i = 0; i < emb.size(); ++i) emb.grad()[i] += d_emb[i];
             }
             return s;
           },
           params, 1e-3),
       1e-4);
  }

  // Composite loss over task, 0.1-weighted augmentation, clean pairing and
  // adversarial pairing terms.
  const std::vector<corpus::LabeledExample> clean = {
      Example("c1", "wake me at 7", "alarm", {{"time", 3, 3}}),
      Example("c2", "wake me at 9", "alarm", {{"time", 3, 3}}),
      Example("c3", "rain in oslo", "weather", {{"place", 2, 2}}),
  };
  const auto aug = Example("a1", "please wake me at 7", "alarm", {{"time", 4, 4}});
  const auto para = Example("p1", "rouse me at 9", "alarm", {{"time", 3, 3}});
  const auto para2 = Example("p2", "get me up at 9 now", "alarm", {{"time", 4, 4}});
  std::vector<corpus::LabeledExample> all = clean;
  all.insert(all.end(), {aug, para, para2});
  const corpus::Vocab vocab = corpus::Vocab::Build(all, 1);
  const corpus::LabelSpace labels = corpus::LabelSpace::FromExamples(clean);
  tagger::TaggerNet<double> net(vocab.size(), 3, 4, 2, labels.intents().size(),
                                labels.tags().size(), 0.0);
  tensor::Rng rng(7);
  net.Init(rng, 0.5);
  tagger::TrainBatch batch;
  for (const auto& ex : clean) {
    batch.items.push_back(tagger::MakeTrainItem(vocab, labels, ex, 1.0, true, 1));
  }
  batch.items.push_back(tagger::MakeTrainItem(vocab, labels, aug, 0.1, false, 2));
  batch.items.push_back(tagger::MakeTrainItem(vocab, labels, para, 0.0, false, 3));
  batch.items.push_back(tagger::MakeTrainItem(vocab, labels, para2, 0.0, false, 4));
  batch.units = 4;
  batch.adv_groups = {{1, {4, 5}}};
  pairing::PairingConfig pc;
  pc.clean = true;
  pc.adversarial = true;
  pc.lambda_sf = 0.5;
  pc.lambda_a = 0.5;
  auto params = net.Params();
  for (auto& [name, t] : params) t->EnableGrad();
  const auto value = tagger::BatchLoss<double>(net, batch, pc, false, false);
  check.Expect(value.clean_pairs > 0 && value.adv_pairs == 3, "composite batch lacks pairs");
  const auto composite = tensor::GradCheck<double>(
      [&](bool backward) {
        return tagger::BatchLoss<double>(net, batch, pc, false, backward).total;
      },
      params, 1e-5);
  op("composite", composite, 1e-3);

  const double elapsed = Seconds(start);
  check.Expect(elapsed < 60, Fmt("runtime %.1fs", elapsed));
  std::string summary;
  for (const auto& [name, err] : worst) summary += name + " " + Fmt("%.1e", err) + ", ";
  return check.Finish(summary + Fmt("%.1fs", elapsed));
}

// ---------------------------------------------------------------------------
// Loss-oracle equivalence. The oracle enumerates pairs directly from the
// definition without the library's grouping or alignment helpers.

constexpr std::size_t kIntents = 4;
constexpr std::size_t kTags = 5;

struct Sentence {
  std::vector<double> intent;
  std::vector<double> slots;  // len x kTags
  std::vector<SlotSpan> entities;
  std::string intent_label;
  int len = 0;
};

Sentence RandomSentence(std::mt19937_64& rng) {
  static const std::vector<std::string> labels = {"datetime", "location", "duration"};
  std::uniform_real_distribution<double> u(-2, 2);
  Sentence s;
  s.len = 1 + static_cast<int>(rng() % 6);
  s.intent.resize(kIntents);
  for (double& v : s.intent) v = u(rng);
  s.slots.resize(static_cast<std::size_t>(s.len) * kTags);
  for (double& v : s.slots) v = u(rng);
  s.entities = RandomSpans(rng, s.len, labels);
  s.intent_label = rng() % 2 ? "alarm/set" : "weather/find";
  return s;
}

std::vector<pairing::SentenceLogits<double>> Views(const std::vector<Sentence>& batch) {
  std::vector<pairing::SentenceLogits<double>> out;
  for (const auto& s : batch) out.push_back({s.intent, s.slots, kTags, &s.entities});
  return out;
}

double OracleMse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

std::vector<double> OracleEntity(const Sentence& s, const SlotSpan& e) {
  std::vector<double> out(kTags, 0.0);
  for (int t = e.start; t <= e.end; ++t) {
    for (std::size_t j = 0; j < kTags; ++j) out[j] += s.slots[t * kTags + j];
  }
  for (double& v : out) v /= (e.end - e.start + 1);
  return out;
}

double OracleTerm(const Sentence& a, const Sentence& b) {
  double term = OracleMse(a.intent, b.intent);
  std::map<std::string, std::vector<SlotSpan>> la, lb;
  for (const auto& e : a.entities) la[e.label].push_back(e);
  for (const auto& e : b.entities) lb[e.label].push_back(e);
  for (auto& [label, xs] : la) {
    auto& ys = lb[label];
    const auto by_start = [](const SlotSpan& x, const SlotSpan& y) { return x.start < y.start; };
    std::sort(xs.begin(), xs.end(), by_start);
    std::sort(ys.begin(), ys.end(), by_start);
    for (std::size_t k = 0; k < std::min(xs.size(), ys.size()); ++k) {
      term += OracleMse(OracleEntity(a, xs[k]), OracleEntity(b, ys[k]));
    }
  }
  return term;
}

std::pair<std::string, std::multiset<std::string>> OracleKey(const Sentence& s) {
  std::multiset<std::string> labels;
  for (const auto& e : s.entities) labels.insert(e.label);
  return {s.intent_label, labels};
}

Verdict LossOracles() {
  const auto start = std::chrono::steady_clock::now();
  Checker check;
  double max_diff = 0;
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Sentence> batch;
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      Sentence s = RandomSentence(rng);
      if (i > 0 && rng() % 2) {
        const Sentence& src = batch[rng() % batch.size()];
        s.intent_label = src.intent_label;
        s.entities = src.entities;
        s.len = src.len;
        s.slots.resize(static_cast<std::size_t>(s.len) * kTags, 0.5);
      }
      batch.push_back(std::move(s));
    }
    pairing::PairingConfig c;
    c.clean = true;
    c.lambda_sf = 0.05 + static_cast<double>(rng() % 100) / 50.0;
    c.pair_cap = 1000;
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (OracleKey(batch[i]) != OracleKey(batch[j])) continue;
        sum += OracleTerm(batch[i], batch[j]);
        ++pairs;
      }
    }
    const double oracle = pairs == 0 ? 0.0 : c.lambda_sf / static_cast<double>(pairs) * sum;
    std::vector<Annotation> annotations;
    for (const auto& s : batch) annotations.push_back({s.intent_label, s.entities});
    const auto views = Views(batch);
    const auto v = pairing::CleanPairLoss<double>(
        views, pairing::GroupByAnnotation(annotations), c, rng());
    max_diff = std::max(max_diff, std::abs(v.loss - oracle));
    check.Expect(v.pairs == pairs && std::abs(v.loss - oracle) <= 1e-6,
                 "clean trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Sentence> batch;
    std::vector<pairing::AdvGroup> groups;
    const std::size_t originals = 1 + rng() % 3;
    for (std::size_t o = 0; o < originals && batch.size() < 8; ++o) {
      pairing::AdvGroup g;
      g.original = batch.size();
      batch.push_back(RandomSentence(rng));
      const std::size_t k = std::min<std::size_t>(rng() % 4, 8 - batch.size());
      for (std::size_t p = 0; p < k; ++p) {
        g.paraphrases.push_back(batch.size());
        batch.push_back(RandomSentence(rng));
      }
      groups.push_back(g);
    }
    pairing::PairingConfig c;
    c.adversarial = true;
    c.lambda_a = 0.01 * static_cast<double>(1 + rng() % 50);
    c.include_para_para = trial % 3 != 0;
    double sum = 0;
    std::size_t pairs = 0;
    for (const auto& g : groups) {
      std::vector<std::size_t> members = {g.original};
      members.insert(members.end(), g.paraphrases.begin(), g.paraphrases.end());
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          if (a != 0 && !c.include_para_para) continue;
          sum += OracleTerm(batch[members[a]], batch[members[b]]);
          ++pairs;
        }
      }
    }
    const double oracle = pairs == 0 ? 0.0 : c.lambda_a / static_cast<double>(pairs) * sum;
    const auto views = Views(batch);
    const auto v = pairing::AdvPairLoss<double>(views, groups, c);
    max_diff = std::max(max_diff, std::abs(v.loss - oracle));
    check.Expect(v.pairs == pairs && std::abs(v.loss - oracle) <= 1e-6,
                 "adversarial trial " + std::to_string(trial));
  }
  const double elapsed = Seconds(start);
  check.Expect(elapsed < 60, Fmt("runtime %.1fs", elapsed));
  return check.Finish(Fmt("400 instances, max |diff| %.1e, %.2fs", max_diff, elapsed));
}

// ---------------------------------------------------------------------------
// Metric oracle.

Verdict MetricOracle() {
  Checker check;
  std::mt19937_64 rng(99);
  const std::vector<std::string> intents = {"a", "b", "c"};
  const std::vector<std::string> labels = {"x", "y"};
  const auto random_slots = [&] {
    std::vector<SlotSpan> out;
    const int n = static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      const int start = static_cast<int>(rng() % 4);
      out.push_back({labels[rng() % 2], start, start + static_cast<int>(rng() % 2)});
    }
    return out;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<tagger::Prediction> preds(n);
    std::vector<Annotation> golds(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      golds[i] = {intents[rng() % 3], random_slots()};
      preds[i].intent = rng() % 4 ? golds[i].intent : intents[rng() % 3];
      preds[i].slots = rng() % 3 ? golds[i].slots : random_slots();
      if (rng() % 5 == 0) std::reverse(preds[i].slots.begin(), preds[i].slots.end());
      const std::multiset<SlotSpan> ps(preds[i].slots.begin(), preds[i].slots.end());
      const std::multiset<SlotSpan> gs(golds[i].slots.begin(), golds[i].slots.end());
      if (preds[i].intent == golds[i].intent && ps == gs) ++correct;
    }
    check.Expect(tagger::ExactMatchAccuracy(preds, golds) ==
                     static_cast<double>(correct) / static_cast<double>(n),
                 "set " + std::to_string(trial));
  }
  const double avg = report::AdversarialAverage({28.4, 34.2, 21.4, 32.8});
  check.Expect(std::abs(avg - 29.2) < 1e-9, Fmt("average %.6f != 29.2", avg));
  return check.Finish(Fmt("1000 sets exact, table average %.1f", avg));
}

// ---------------------------------------------------------------------------
// Pipeline rules.

std::vector<paraphraser::Beam> Beams(const std::vector<std::string>& texts) {
  std::vector<paraphraser::Beam> out;
  for (const auto& t : texts) out.push_back({t, 0.0, false});
  return out;
}

std::vector<std::string> Texts(const std::vector<paraphraser::Beam>& beams) {
  std::vector<std::string> out;
  for (const auto& b : beams) out.push_back(b.text);
  return out;
}

tagger::Prediction IntentOnly(const std::string& intent) {
  tagger::Prediction p;
  p.intent = intent;
  return p;
}

std::size_t DedupeSuite(Checker& check) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pool = {"wake me", "Wake Me", "WAKE ME", "rain today",
                                         "Rain today", "snooze", "set alarm", "Set Alarm"};
  std::size_t cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    const std::string original = pool[rng() % pool.size()];
    std::vector<std::string> training;
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
      training.push_back(pool[rng() % pool.size()]);
    }
    std::vector<std::string> texts;
    for (int i = 0, n = static_cast<int>(rng() % 8); i < n; ++i) {
      texts.push_back(pool[rng() % pool.size()]);
    }
    std::set<std::string> reference = {Lower(original)};
    for (const auto& t : training) reference.insert(Lower(t));
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      bool keep = Lower(texts[i]) != Lower(original);
      for (const auto& t : training) keep = keep && Lower(t) != Lower(texts[i]);
      for (std::size_t j = 0; j < i && keep; ++j) keep = Lower(texts[j]) != Lower(texts[i]);
      if (keep) expected.push_back(texts[i]);
    }
    check.Expect(Texts(paraphraser::Dedupe(Beams(texts), reference)) == expected,
                 "dedupe trial " + std::to_string(trial));
  }
  return cases;
}

std::size_t KCapSuite(Checker& check) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> pool = {"when is sunset", "When Is Sunset", "when is dusk",
                                         "WHEN IS DUSK", "sundown time", "  ", "dusk",
                                         "when  is   sunset"};
  std::size_t cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    std::vector<std::string> texts;
    for (int i = 0, n = static_cast<int>(rng() % 10); i < n; ++i) {
      texts.push_back(pool[rng() % pool.size()]);
    }
    const std::size_t k = 1 + rng() % 5;
    paraphraser::ParaphraseSet set;
    set.beams = paraphraser::FilterBeams(Beams(texts), "when is sunset", k);
    std::vector<std::string> oracle;
    for (const auto& t : texts) {
      if (corpus::Tokenize(t).empty()) continue;
      if (Lower(corpus::JoinTokens(corpus::Tokenize(t))) == "when is sunset") continue;
      bool dup = false;
      for (const auto& o : oracle) dup = dup || Lower(o) == Lower(t);
      if (!dup) oracle.push_back(t);
    }
    if (oracle.size() > k) oracle.resize(k);
    check.Expect(set.beams.size() <= k && paraphraser::IsWellFormed(set, "when is sunset", k) &&
                     Texts(set.beams) == oracle,
                 "k-cap trial " + std::to_string(trial));
  }
  return cases;
}

std::size_t FlipSuite(Checker& check) {
  const std::vector<std::string> words = {"set", "cancel", "alarm", "weather", "in",
                                          "paris", "now", "the"};
  // Slot predictions vary independently so an intent-only filter is observable.
  const advset::Predictor predict = [](const corpus::Utterance& u) {
    std::size_t h = 0;
    for (const auto& t : u.tokens) h = h * 31 + t.size() + static_cast<std::size_t>(t[0]);
    tagger::Prediction p = IntentOnly("intent" + std::to_string(h % 3));
    if (h % 5 == 0) p.slots = {{"datetime", 0, 0}};
    return p;
  };
  std::mt19937_64 rng(2024);
  std::size_t cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    std::vector<corpus::LabeledExample> originals;
    std::vector<paraphraser::ParaphraseSet> sets;
    const int n_orig = 1 + static_cast<int>(rng() % 4);
    for (int o = 0; o < n_orig; ++o) {
      std::string text;
      for (int w = 0, n = 1 + static_cast<int>(rng() % 4); w < n; ++w) {
        text += (w ? " " : "") + words[rng() % words.size()];
      }
      corpus::LabeledExample ex;
      ex.utterance = corpus::MakeUtterance("o" + std::to_string(o), text);
      originals.push_back(ex);
    }
    std::vector<std::pair<std::string, std::string>> expected;
    for (int s = 0, n_sets = static_cast<int>(rng() % 4); s < n_sets; ++s) {
      paraphraser::ParaphraseSet set;
      set.original_id = "o" + std::to_string(rng() % (n_orig + 1));
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
    const auto r = advset::BuildCandidates(predict, originals, sets);
    bool ok = r.candidates.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
      ok = r.candidates[i].original.utterance.id == expected[i].first &&
           r.candidates[i].paraphrase.text == expected[i].second;
    }
    check.Expect(ok, "flip trial " + std::to_string(trial));
  }
  return cases;
}

std::size_t BioSuite(Checker& check) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> labels = {"datetime", "location", "duration", "alarm_name"};
  const std::vector<std::string> tags = {"O", "B-datetime", "I-datetime", "B-location",
                                         "I-location"};
  std::size_t cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Annotation a{"i", RandomSpans(rng, n, labels)};
    const auto bio = corpus::SpansToBio(a, static_cast<std::size_t>(n));
    check.Expect(bio.size() == static_cast<std::size_t>(n) && corpus::BioToSpans(bio) == a.slots &&
                     corpus::RepairBio(bio) == bio,
                 "bio round trip trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    corpus::TagSequence seq(1 + rng() % 10);
    for (auto& t : seq) t = tags[rng() % tags.size()];
    const auto spans = corpus::BioToSpans(seq);
    bool ok = corpus::SpansToBio({"i", spans}, seq.size()) == corpus::RepairBio(seq);
    try {
      corpus::ValidateSpans(spans, seq.size());
    } catch (const Error&) {
      ok = false;
    }
    check.Expect(ok, "bio repair trial " + std::to_string(trial));
  }
  return cases;
}

advset::CandidateRecord Candidate(const std::string& id) {
  advset::CandidateRecord c;
  c.candidate_id = id;
  c.original.utterance = corpus::MakeUtterance("orig-" + id, "cancel the gym alarm");
  c.original.annotation = {"alarm/cancel_alarm", {{"alarm_name", 2, 2}}};
  c.paraphrase = corpus::MakeUtterance(id, "pause the gym alarm");
  c.source = "bt-es";
  c.original_pred.intent = "alarm/cancel_alarm";
  c.paraphrase_pred.intent = "alarm/snooze_alarm";
  return c;
}

std::size_t DagSuite(Checker& check) {
  using advset::DecisionKind;
  using advset::Status;
  const std::vector<advset::Decision> decisions = {
      {DecisionKind::kValid, {"alarm/snooze_alarm", {{"alarm_name", 2, 2}}}},
      {DecisionKind::kValid, {"alarm/cancel_alarm", {}}},
      {DecisionKind::kMeaningless, {}},
      {DecisionKind::kAmbiguous, {}}};
  const std::vector<std::string> people = {"ann-a", "ann-b", "ann-c", "ann-d"};
  const fs::path log = fs::temp_directory_path() / "advnlu_acceptance_dag.log";
  std::mt19937_64 rng(17);
  std::size_t cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++cases) {
    const bool persistent = trial % 50 == 0;
    fs::remove(log);
    auto store = advset::Store::Open(persistent ? log.string() : "");
    store->SetLabelSpace(corpus::LabelSpace(
        {"alarm/cancel_alarm", "alarm/snooze_alarm"}, {"alarm_name"}));
    const std::vector<std::string> ids = {"c0", "c1", "c2"};
    store->AddCandidates({Candidate(ids[0]), Candidate(ids[1]), Candidate(ids[2])});
    std::map<std::string, Status> seen;
    for (const auto& id : ids) seen[id] = Status::kPending;
    bool ok = true;
    for (int step = 0; step < 12; ++step) {
      const std::string& id = ids[rng() % ids.size()];
      const std::string& who = people[rng() % people.size()];
      const auto& decision = decisions[rng() % decisions.size()];
      try {
        if (rng() % 3 == 0) {
          store->Resolve({id, who, decision, step});
        } else {
          store->RecordAnnotation({id, who, decision, step});
        }
      } catch (const Error&) {
      }
      for (const auto& cid : ids) {
        const Status now = store->Find(cid)->status;
        if (now != seen[cid] && !advset::IsAllowedTransition(seen[cid], now)) ok = false;
        seen[cid] = now;
      }
    }
    if (persistent) {
      auto replayed = advset::Store::Open(log.string());
      for (const auto& cid : ids) ok = ok && replayed->Find(cid)->status == seen[cid];
    }
    for (const auto& [id, status] : seen) {
      const bool finished = status == Status::kFinal || status == Status::kRejected;
      for (Status next : {Status::kPending, Status::kAnnotated, Status::kAdjudication,
                          Status::kFinal, Status::kRejected}) {
        ok = ok && !(finished && advset::IsAllowedTransition(status, next));
      }
    }
    check.Expect(ok, "status DAG trial " + std::to_string(trial));
  }
  fs::remove(log);
  return cases;
}

Verdict PipelineRules() {
  Checker check;
  const std::size_t dedupe = DedupeSuite(check);
  const std::size_t flip = FlipSuite(check);
  const std::size_t kcap = KCapSuite(check);
  const std::size_t bio = BioSuite(check);
  const std::size_t dag = DagSuite(check);
  return check.Finish("dedupe " + std::to_string(dedupe) + ", flip " + std::to_string(flip) +
                      ", k-cap " + std::to_string(kcap) + ", BIO " + std::to_string(bio) +
                      ", DAG " + std::to_string(dag) + " cases");
}

// ---------------------------------------------------------------------------
// Directional replication on the synthetic corpus, run through the same
// stages the command-line tool exposes.

std::string RunStage(const std::string& stage, const json& request) {
  return pipeline::RunStage(stage, request.dump(), [](const std::string&) {});
}

struct DirectionalScores {
  double clean = 0, perturbed = 0;
};

std::map<std::string, DirectionalScores> DirectionalSeed(const fs::path& root,
                                                         std::uint64_t seed) {
  const fs::path dir = root / ("seed-" + std::to_string(seed));
  fs::remove_all(dir);
  const std::string data = (dir / "data").string();
  RunStage("synth", {{"out_dir", data}, {"seed", seed}});
  const json tagger = {{"hidden_size", 32}, {"embedding_dim", 32}, {"epochs", 10}, {"seed", seed}};
  const json base_request = {{"train", data + "/train.tsv"}, {"dev", data + "/dev.tsv"},
                             {"tagger", tagger}};
  json request = base_request;
  request["out_dir"] = (dir / "base").string();
  RunStage("train", request);
  const std::string cache = (dir / "rule.jsonl").string();
  RunStage("paraphrase", {{"input", data + "/train.tsv"}, {"method", "rule"}, {"k", 3},
                          {"seed", seed}, {"cache", cache}});
  const std::string augmented = (dir / "rule.tsv").string();
  RunStage("augment", {{"model", (dir / "base/model").string()}, {"train", data + "/train.tsv"},
                       {"cache", {cache}}, {"weight", 0.1}, {"output", augmented}});
  request = base_request;
  request["augmented"] = {augmented};
  request["out_dir"] = (dir / "aug").string();
  RunStage("train", request);
  request = base_request;
  request["paraphrases"] = {augmented};
  request["pairing"] = {{"mode", "alp"}, {"lambda_a", 0.01}};
  request["out_dir"] = (dir / "alp").string();
  RunStage("train", request);
  RunStage("eval", {{"models", {{{"name", "baseline"}, {"dirs", {(dir / "base/model").string()}}},
                                {{"name", "aug"}, {"dirs", {(dir / "aug/model").string()}}},
                                {{"name", "alp"}, {"dirs", {(dir / "alp/model").string()}}}}},
                    {"clean", {{"name", "clean"}, {"path", data + "/test.tsv"}}},
                    {"adversarial", {{{"name", "perturbed"}, {"path", data + "/perturbed.tsv"}}}},
                    {"out_dir", (dir / "eval").string()}});
  const auto r = report::ReportFromJsonl(ReadFile(dir / "eval/report.jsonl"));
  std::map<std::string, DirectionalScores> out;
  for (const auto& row : r.rows) out[row.model] = {row.clean.accuracy, row.adversarial_average};
  return out;
}

Verdict Directional(const fs::path& root) {
  const auto start = std::chrono::steady_clock::now();
  Checker check;
  std::map<std::string, DirectionalScores> mean;
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string per_seed;
  for (std::uint64_t seed : seeds) {
    const auto scores = DirectionalSeed(root, seed);
    per_seed += Fmt("seed %.0f: ", static_cast<double>(seed));
    for (const char* name : {"baseline", "aug", "alp"}) {
      const auto& s = scores.at(name);
      mean[name].clean += s.clean / static_cast<double>(seeds.size());
      mean[name].perturbed += s.perturbed / static_cast<double>(seeds.size());
      per_seed += std::string(name) + Fmt(" %.1f/%.1f ", s.clean, s.perturbed);
    }
  }
  const auto& base = mean["baseline"];
  const auto& aug = mean["aug"];
  const auto& alp = mean["alp"];
  check.Expect(base.clean >= 95.0, Fmt("baseline clean %.1f < 95", base.clean));
  check.Expect(aug.perturbed - base.perturbed >= 5.0,
               Fmt("augmentation gain %.1f < 5", aug.perturbed - base.perturbed));
  check.Expect(alp.perturbed - base.perturbed >= 5.0,
               Fmt("ALP gain %.1f < 5", alp.perturbed - base.perturbed));
  check.Expect(base.clean - aug.clean <= 2.0, Fmt("augmentation clean drop %.1f > 2",
                                                  base.clean - aug.clean));
  check.Expect(base.clean - alp.clean <= 4.0, Fmt("ALP clean drop %.1f > 4",
                                                  base.clean - alp.clean));
  const double elapsed = Seconds(start);
  check.Expect(elapsed < 600, Fmt("runtime %.0fs >= 600s", elapsed));
  std::printf("  directional per seed (clean/perturbed EM): %s\n", per_seed.c_str());
  return check.Finish(
      Fmt("3-seed mean clean/perturbed EM: baseline %.1f/%.1f, ", base.clean, base.perturbed) +
      Fmt("aug %.1f/%.1f, ", aug.clean, aug.perturbed) +
      Fmt("ALP %.1f/%.1f, ", alp.clean, alp.perturbed) + Fmt("%.0fs", elapsed));
}

// ---------------------------------------------------------------------------
// Autoencoder sanity.

Verdict AutoencoderSanity() {
  const std::vector<std::string> corpus_text = {
      "when is sunset",          "set an alarm for 7 am",   "what's the weather in paris",
      "snooze for 5 minutes",    "cancel my gym alarm",     "show my alarms",
      "wake me up at noon",      "rain in london tomorrow", "list all my alarms",
      "when does the sun go down"};
  std::vector<corpus::Utterance> utterances;
  for (std::size_t i = 0; i < corpus_text.size(); ++i) {
    utterances.push_back(corpus::MakeUtterance("toy-" + std::to_string(i), corpus_text[i]));
  }
  paraphraser::AutoencoderConfig config;
  config.hidden_size = 48;
  config.embedding_dim = 24;
  config.epochs = 120;
  config.batch_size = 2;
  config.learning_rate = 0.01;
  config.seed = 3;
  const auto trained = paraphraser::TrainAutoencoder(utterances, config);
  std::size_t reproduced = 0, with_beam = 0;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    if (trained.model.Detokenize(paraphraser::GreedyDecode(trained.model, u)) ==
        u.normalized()) {
      ++reproduced;
    }
    if (!paraphraser::PerturbDecode(trained.model, u, 0.5, 5, 100 + i).beams.empty()) {
      ++with_beam;
    }
  }
  Checker check;
  check.Expect(reproduced >= 9, Fmt("sigma=0 reproduced %.0f/10", static_cast<double>(reproduced)));
  check.Expect(with_beam * 2 >= utterances.size(),
               Fmt("sigma=0.5 k=5 gave beams for %.0f/10", static_cast<double>(with_beam)));
  return check.Finish(Fmt("sigma=0 reproduces %.0f/10; sigma=0.5 k=5 yields beams for %.0f/10",
                          static_cast<double>(reproduced), static_cast<double>(with_beam)));
}

// ---------------------------------------------------------------------------
// Determinism.

Verdict Determinism(const fs::path& root) {
  Checker check;
  std::vector<std::string> reports, models;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / ("determinism-" + std::to_string(run));
    fs::remove_all(dir);
    const std::string data = (dir / "data").string();
    RunStage("synth", {{"out_dir", data}, {"seed", 9}, {"n_train", 300}, {"n_dev", 50},
                       {"n_test", 100}});
    const json tagger = {{"hidden_size", 12}, {"embedding_dim", 12}, {"epochs", 2}, {"seed", 9}};
    RunStage("train", {{"train", data + "/train.tsv"}, {"dev", data + "/dev.tsv"},
                       {"tagger", tagger}, {"out_dir", (dir / "base").string()}});
    RunStage("paraphrase", {{"input", data + "/train.tsv"}, {"method", "rule"},
                            {"seed", 9}, {"cache", (dir / "rule.jsonl").string()}});
    RunStage("augment", {{"model", (dir / "base/model").string()},
                         {"train", data + "/train.tsv"},
                         {"cache", {(dir / "rule.jsonl").string()}},
                         {"output", (dir / "rule.tsv").string()}});
    RunStage("train", {{"train", data + "/train.tsv"}, {"dev", data + "/dev.tsv"},
                       {"paraphrases", {(dir / "rule.tsv").string()}},
                       {"augmented", {(dir / "rule.tsv").string()}},
                       {"pairing", {{"mode", "alp+clean"}}}, {"ensemble", 2},
                       {"tagger", tagger}, {"out_dir", (dir / "alp").string()}});
    RunStage("eval",
             {{"models",
               {{{"name", "baseline"}, {"dirs", {(dir / "base/model").string()}}},
                {{"name", "alp"},
                 {"dirs", {(dir / "alp/model-1").string(), (dir / "alp/model-2").string()}}}}},
              {"clean", {{"name", "clean"}, {"path", data + "/test.tsv"}}},
              {"adversarial", {{{"name", "perturbed"}, {"path", data + "/perturbed.tsv"}}}},
              {"out_dir", (dir / "eval").string()}});
    reports.push_back(ReadFile(dir / "eval/report.jsonl") + ReadFile(dir / "eval/report.txt"));
    std::string weights;
    for (const char* m : {"base/model", "alp/model-1", "alp/model-2"}) {
      for (const auto& entry : fs::directory_iterator(dir / m)) {
        if (entry.path().filename() != "meta.json") weights += ReadFile(entry.path());
      }
    }
    models.push_back(weights);
  }
  check.Expect(!reports[0].empty() && reports[0] == reports[1], "reports differ");
  check.Expect(!models[0].empty() && models[0] == models[1], "checkpoints differ");
  return check.Finish("two identical runs: reports and checkpoints bit-identical (" +
                      std::to_string(reports[0].size()) + " report bytes)");
}

// ---------------------------------------------------------------------------
// Public data (optional). ADVNLU_PUBLIC_DATA names a directory holding
// train, dev and test splits as .tsv (canonical) or .conll (columns).

Verdict PublicData(const fs::path& root) {
  const char* env = std::getenv("ADVNLU_PUBLIC_DATA");
  if (env == nullptr || *env == '\0') return {Outcome::kSkip, "ADVNLU_PUBLIC_DATA not set"};
  const fs::path in(env);
  Checker check;
  const std::map<std::string, double> nominal = {{"train", 25000}, {"dev", 3000}, {"test", 7000}};
  std::map<std::string, std::string> ingested;
  std::size_t intents = 0, slots = 0;
  for (const auto& [split, size] : nominal) {
    fs::path source;
    for (const char* ext : {".tsv", ".conll"}) {
      if (fs::exists(in / (split + ext))) source = in / (split + ext);
    }
    if (source.empty()) return {Outcome::kFail, "missing " + split + " split in " + in.string()};
    ingested[split] = (root / "public" / (split + ".tsv")).string();
    json request = {{"input", source.string()}, {"output", ingested[split]}};
    if (split != "train") request["label_space"] = ingested["train"];
    const json summary = json::parse(RunStage("ingest", request));
    const double n = summary["examples"].get<double>();
    check.Expect(std::abs(n - size) <= 0.1 * size, split + Fmt(" has %.0f examples", n));
    if (split == "train") {
      intents = summary["intents"].size();
      slots = summary["slot_labels"].size();
    }
  }
  check.Expect(intents == 11 && slots == 7,
               Fmt("%.0f intents, %.0f slot labels", static_cast<double>(intents),
                   static_cast<double>(slots)));
  const fs::path run = root / "public" / "baseline";
  fs::remove_all(run);
  RunStage("train", {{"train", ingested["train"]}, {"dev", ingested["dev"]},
                     {"out_dir", run.string()}});
  RunStage("eval", {{"models", {{{"name", "baseline"}, {"dirs", {(run / "model").string()}}}}},
                    {"clean", {{"name", "test"}, {"path", ingested["test"]}}},
                    {"out_dir", (run / "eval").string()}});
  const auto r = report::ReportFromJsonl(ReadFile(run / "eval/report.jsonl"));
  const double clean = r.rows.at(0).clean.accuracy;
  check.Expect(std::abs(clean - 87.1) <= 2.5, Fmt("clean EM %.1f outside 87.1 +/- 2.5", clean));
  return check.Finish(Fmt("clean EM %.1f, %.0f intents, %.0f slot labels", clean,
                          static_cast<double>(intents), static_cast<double>(slots)));
}

}  // namespace
}  // namespace advnlu

int main() {
  using advnlu::Outcome;
  using advnlu::Verdict;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "advnlu_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient-fidelity", advnlu::GradientFidelity},
      {"loss-oracle-equivalence", advnlu::LossOracles},
      {"metric-oracle", advnlu::MetricOracle},
      {"pipeline-rules", advnlu::PipelineRules},
      {"directional-synthetic", [&] { return advnlu::Directional(root); }},
      {"autoencoder-sanity", advnlu::AutoencoderSanity},
      {"determinism", [&] { return advnlu::Determinism(root); }},
      {"public-data", [&] { return advnlu::PublicData(root); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {Outcome::kFail, std::string("error: ") + e.what()};
    }
    const char* label = v.outcome == Outcome::kPass   ? "PASS"
                        : v.outcome == Outcome::kSkip ? "SKIP"
                                                      : "FAIL";
    if (v.outcome == Outcome::kFail) ++failed;
    std::printf("%s %s: %s\n", label, name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(root);
  return failed == 0 ? 0 : 1;
}
