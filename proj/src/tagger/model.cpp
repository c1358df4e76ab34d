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

#include "advnlu/tagger/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/corpus/bio.hpp"
#include "advnlu/error.hpp"
#include "advnlu/tensor/checkpoint.hpp"

namespace advnlu::tagger {
namespace {

using json = nlohmann::json;

TaggerNet<float> BuildNet(const TaggerConfig& c, const corpus::Vocab& vocab,
                          const corpus::LabelSpace& labels) {
  return TaggerNet<float>(vocab.size(), c.embedding_dim, c.hidden_size, c.num_layers,
                          labels.intents().size(), labels.tags().size(), c.dropout);
}

// Winner of a vote: most votes, then larger summed logit, then lower index.
std::size_t VoteWinner(const std::vector<int>& votes, const std::vector<double>& sums) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && sums[c] > sums[best])) {
      best = c;
    }
  }
  return best;
}

// Scores whose argmax equals VoteWinner: votes dominate, summed logits order
// within equal vote counts, and the winner receives a strict margin so that
// exact ties resolve the same way under the lowest-index argmax.
std::vector<float> VoteScores(const std::vector<int>& votes,
                              const std::vector<double>& sums, std::size_t winner) {
  double span = 1.0;
  for (double s : sums) span = std::max(span, 2.0 * std::abs(s) + 1.0);
  std::vector<float> out(votes.size());
  for (std::size_t c = 0; c < votes.size(); ++c) {
    out[c] = static_cast<float>(votes[c] * span + sums[c]);
  }
  out[winner] = std::nextafter(
      *std::max_element(out.begin(), out.end()), std::numeric_limits<float>::infinity());
  return out;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Prediction DecodeLogits(const corpus::LabelSpace& labels,
                        std::span<const float> intent_logits,
                        const std::vector<std::vector<float>>& slot_logits) {
  if (intent_logits.size() != labels.intents().size()) {
    Fail(ErrorCode::kDimension, "intent logits do not match the label space");
  }
  Prediction p;
  p.intent_logits.assign(intent_logits.begin(), intent_logits.end());
  p.intent = labels.intents()[tensor::ArgMax(intent_logits)];
  p.slot_logits = slot_logits;
  corpus::TagSequence raw;
  raw.reserve(slot_logits.size());
  for (const auto& row : slot_logits) {
    if (row.size() != labels.tags().size()) {
      Fail(ErrorCode::kDimension, "slot logits do not match the tag set");
    }
    raw.push_back(labels.tags()[tensor::ArgMax(std::span<const float>(row))]);
  }
  p.slot_tags = corpus::RepairBio(raw);
  p.slots = corpus::BioToSpans(p.slot_tags);
  return p;
}

TaggerModel::TaggerModel(TaggerConfig config, corpus::Vocab vocab,
                         corpus::LabelSpace labels)
    : config_(std::move(config)), vocab_(std::move(vocab)), labels_(std::move(labels)) {
  ValidateTaggerConfig(config_);
  if (labels_.intents().empty()) {
    Fail(ErrorCode::kPrecondition, "label space has no intents");
  }
  net_ = BuildNet(config_, vocab_, labels_);
  tensor::Rng rng(config_.seed);
  net_.Init(rng, config_.init_scale);
}

std::vector<std::int32_t> TaggerModel::Encode(const corpus::Utterance& utterance) const {
  return vocab_.Encode(utterance.tokens);
}

TaggerForward<float> TaggerModel::Logits(const corpus::Utterance& utterance) const {
  const auto ids = Encode(utterance);
  return Forward<float>(net_, ids, /*training=*/false, nullptr);
}

Prediction TaggerModel::Predict(const corpus::Utterance& utterance) const {
  const TaggerForward<float> f = Logits(utterance);
  std::vector<std::vector<float>> rows(f.slot_logits.rows());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto r = f.slot_logits.row(t);
    rows[t].assign(r.begin(), r.end());
  }
  return DecodeLogits(labels_, f.intent_logits.values(), rows);
}

void TaggerModel::Save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const std::string config_json = TaggerConfigToJson(config_);
  TaggerNet<float> copy = net_;
  tensor::SaveCheckpoint((std::filesystem::path(dir) / "params.ckpt").string(),
                         config_json, copy.Params());
  json meta = {
      {"format", "advnlu-tagger"},
      {"version", 1},
      {"config", json::parse(config_json)},
      {"intents", labels_.intents()},
      {"slot_labels", labels_.slot_labels()},
      {"vocab", vocab_.tokens()},
  };
  const auto meta_path = std::filesystem::path(dir) / "meta.json";
  std::ofstream out(meta_path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + meta_path.string());
  out << meta.dump(1) << "\n";
  if (!out) Fail(ErrorCode::kIo, "failed writing " + meta_path.string());
}

TaggerModel TaggerModel::Load(const std::string& dir) {
  const auto meta_path = std::filesystem::path(dir) / "meta.json";
  if (!std::filesystem::exists(meta_path)) Fail(ErrorCode::kNotFound, "no model at " + dir);
  json meta;
  try {
    meta = json::parse(ReadText(meta_path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, meta_path.string() + ": " + e.what());
  }
  if (meta.value("format", "") != "advnlu-tagger") {
    Fail(ErrorCode::kParse, meta_path.string() + " is not a tagger model");
  }
  TaggerConfig config;
  corpus::LabelSpace labels;
  std::vector<std::string> vocab_tokens;
  try {
    config = TaggerConfigFromJson(meta.at("config").dump());
    labels = corpus::LabelSpace(meta.at("intents").get<std::vector<std::string>>(),
                                meta.at("slot_labels").get<std::vector<std::string>>());
    vocab_tokens = meta.at("vocab").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, meta_path.string() + ": " + e.what());
  }
  TaggerModel model(config, corpus::Vocab(std::move(vocab_tokens)), std::move(labels));
  const tensor::Checkpoint ckpt =
      tensor::ReadCheckpoint((std::filesystem::path(dir) / "params.ckpt").string());
  if (TaggerConfigFromJson(ckpt.config_json).hidden_size != config.hidden_size) {
    Fail(ErrorCode::kParse, "checkpoint config disagrees with meta.json");
  }
  tensor::LoadCheckpointInto(ckpt, model.net_.Params());
  return model;
}

bool ExactMatch(const corpus::Annotation& predicted, const corpus::Annotation& gold) {
  if (predicted.intent != gold.intent) return false;
  auto a = predicted.slots, b = gold.slots;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

double ExactMatchAccuracy(const std::vector<Prediction>& predictions,
                          const std::vector<corpus::Annotation>& golds) {
  if (predictions.size() != golds.size()) {
    Fail(ErrorCode::kPrecondition, "prediction and gold counts differ");
  }
  if (golds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (ExactMatch(predictions[i].annotation(), golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

Prediction EnsemblePredict(std::span<const TaggerModel* const> models,
                           const corpus::Utterance& utterance) {
  if (models.empty()) Fail(ErrorCode::kPrecondition, "ensemble has no members");
  const corpus::LabelSpace& labels = models.front()->labels();
  for (const TaggerModel* m : models) {
    if (!(m->labels() == labels)) {
      Fail(ErrorCode::kPrecondition, "ensemble members disagree on the label space");
    }
  }
  if (models.size() == 1) return models.front()->Predict(utterance);

  const std::size_t n_intents = labels.intents().size();
  const std::size_t n_tags = labels.tags().size();
  const std::size_t len = utterance.tokens.size();
  std::vector<int> intent_votes(n_intents, 0);
  std::vector<double> intent_sums(n_intents, 0.0);
  std::vector<std::vector<int>> tag_votes(len, std::vector<int>(n_tags, 0));
  std::vector<std::vector<double>> tag_sums(len, std::vector<double>(n_tags, 0.0));
  for (const TaggerModel* m : models) {
    const TaggerForward<float> f = m->Logits(utterance);
    const auto il = f.intent_logits.values();
    ++intent_votes[tensor::ArgMax(std::span<const float>(il))];
    for (std::size_t c = 0; c < n_intents; ++c) intent_sums[c] += il[c];
    for (std::size_t t = 0; t < len; ++t) {
      const auto row = f.slot_logits.row(t);
      ++tag_votes[t][tensor::ArgMax(std::span<const float>(row))];
      for (std::size_t j = 0; j < n_tags; ++j) tag_sums[t][j] += row[j];
    }
  }
  const std::vector<float> intent_scores =
      VoteScores(intent_votes, intent_sums, VoteWinner(intent_votes, intent_sums));
  std::vector<std::vector<float>> slot_scores(len);
  for (std::size_t t = 0; t < len; ++t) {
    slot_scores[t] = VoteScores(tag_votes[t], tag_sums[t],
                                VoteWinner(tag_votes[t], tag_sums[t]));
  }
  return DecodeLogits(labels, intent_scores, slot_scores);
}

corpus::Annotation SelfTrainTag(const TaggerModel& model,
                                const corpus::Utterance& paraphrase,
                                const corpus::LabeledExample& original) {
  if (!model.labels().IntentIndex(original.annotation.intent)) {
    Fail(ErrorCode::kValidation,
         "intent '" + original.annotation.intent + "' is not in the model label space");
  }
  const Prediction p = model.Predict(paraphrase);
  return {original.annotation.intent, p.slots};
}

}  // namespace advnlu::tagger
