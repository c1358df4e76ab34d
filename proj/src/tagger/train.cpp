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

#include "advnlu/tagger/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/corpus/bio.hpp"
#include "advnlu/corpus/dataset.hpp"
#include "advnlu/error.hpp"
#include "advnlu/tensor/optim.hpp"

namespace advnlu::tagger {
namespace {

// A clean sentence with its attached items, or a lone augmented sentence.
// Indices refer to the flat item table built once per run.
struct Unit {
  std::vector<std::size_t> items;
  std::optional<std::size_t> original;  // item acting as ALP original
  std::vector<std::size_t> paraphrases;
};

struct ItemTemplate {
  TrainItem item;  // dropout_seed filled per epoch
  std::size_t stable_index = 0;
};

TrainBatch AssembleBatch(const std::vector<ItemTemplate>& table,
                         const std::vector<Unit>& units,
                         std::span<const std::size_t> order, std::uint64_t seed,
                         std::uint64_t pair_seed, std::size_t epoch,
                         std::size_t batch_index) {
  TrainBatch batch;
  batch.units = order.size();
  batch.pair_seed = MixSeed(pair_seed, epoch, batch_index);
  std::map<std::size_t, std::size_t> position;
  for (std::size_t u : order) {
    for (std::size_t idx : units[u].items) {
      position[idx] = batch.items.size();
      TrainItem item = table[idx].item;
      item.dropout_seed = MixSeed(seed, epoch, table[idx].stable_index + 1);
      batch.items.push_back(std::move(item));
    }
    if (units[u].original && !units[u].paraphrases.empty()) {
      pairing::AdvGroup g;
      g.original = position.at(*units[u].original);
      for (std::size_t p : units[u].paraphrases) g.paraphrases.push_back(position.at(p));
      batch.adv_groups.push_back(std::move(g));
    }
  }
  return batch;
}

double DevExactMatch(const TaggerModel& model,
                     const std::vector<corpus::LabeledExample>& dev) {
  std::vector<Prediction> preds;
  std::vector<corpus::Annotation> golds;
  preds.reserve(dev.size());
  for (const auto& ex : dev) {
    preds.push_back(model.Predict(ex.utterance));
    golds.push_back(ex.annotation);
  }
  return ExactMatchAccuracy(preds, golds);
}

}  // namespace

TrainItem MakeTrainItem(const corpus::Vocab& vocab, const corpus::LabelSpace& labels,
                        const corpus::LabeledExample& example, double task_weight,
                        bool clean, std::uint64_t dropout_seed) {
  TrainItem item;
  item.ids = vocab.Encode(example.utterance.tokens);
  if (item.ids.empty()) {
    Fail(ErrorCode::kPrecondition, "example '" + example.utterance.id + "' has no tokens");
  }
  const auto intent = labels.IntentIndex(example.annotation.intent);
  if (!intent) {
    Fail(ErrorCode::kValidation, "example '" + example.utterance.id +
                                     "' has unknown intent '" +
                                     example.annotation.intent + "'");
  }
  item.intent = *intent;
  for (const std::string& tag :
       corpus::SpansToBio(example.annotation, example.utterance.tokens.size())) {
    const auto idx = labels.TagIndex(tag);
    if (!idx) {
      Fail(ErrorCode::kValidation,
           "example '" + example.utterance.id + "' has unknown tag '" + tag + "'");
    }
    item.tags.push_back(*idx);
  }
  item.annotation = example.annotation;
  item.task_weight = task_weight;
  item.clean = clean;
  item.dropout_seed = dropout_seed;
  return item;
}

std::string EpochRecordToJson(const EpochRecord& r) {
  nlohmann::json j = {
      {"epoch", r.epoch},
      {"batches", r.batches},
      {"loss", r.loss},
      {"clean_task", r.clean_task},
      {"augmented_task", r.augmented_task},
      {"clean_pair", r.clean_pair},
      {"adv_pair", r.adv_pair},
      {"clean_pairs", r.clean_pairs},
      {"adv_pairs", r.adv_pairs},
      {"dev_exact_match", r.has_dev ? nlohmann::json(r.dev_exact_match) : nlohmann::json()},
      {"seconds", r.seconds},
  };
  return j.dump();
}

TrainResult Train(const TrainData& data, const TaggerConfig& config,
                  const pairing::PairingConfig& pairing,
                  const EpochCallback& on_epoch) {
  ValidateTaggerConfig(config);
  pairing::ValidatePairingConfig(pairing);
  if (data.clean.empty()) Fail(ErrorCode::kPrecondition, "no clean training data");

  const corpus::LabelSpace labels = corpus::LabelSpace::FromExamples(data.clean);
  corpus::CheckLabels(data.augmented, labels);
  corpus::CheckLabels(data.paraphrases, labels);
  std::vector<corpus::LabeledExample> vocab_source = data.clean;
  vocab_source.insert(vocab_source.end(), data.augmented.begin(), data.augmented.end());
  vocab_source.insert(vocab_source.end(), data.paraphrases.begin(), data.paraphrases.end());
  corpus::Vocab vocab = corpus::Vocab::Build(vocab_source, config.min_count);

  TrainResult result{TaggerModel(config, std::move(vocab), labels), {}, 0};
  TaggerModel& model = result.model;

  // Item table: clean first, then augmented, then pairing-only paraphrases,
  // so clean items keep their dropout streams whatever else is supplied.
  std::vector<ItemTemplate> table;
  std::vector<Unit> units;
  std::map<std::string, std::size_t> clean_unit;
  for (const auto& ex : data.clean) {
    clean_unit[ex.utterance.id] = units.size();
    Unit u;
    u.items.push_back(table.size());
    u.original = table.size();
    table.push_back({MakeTrainItem(model.vocab(), labels, ex, ex.weight, true, 0),
                     table.size()});
    units.push_back(std::move(u));
  }
  std::map<std::string, std::size_t> item_by_id;
  for (const auto& ex : data.augmented) {
    const std::size_t idx = table.size();
    table.push_back({MakeTrainItem(model.vocab(), labels, ex, ex.weight, false, 0), idx});
    item_by_id[ex.utterance.id] = idx;
    const auto it = clean_unit.find(ex.parent_id);
    if (it != clean_unit.end()) {
      units[it->second].items.push_back(idx);
    } else {
      units.push_back(Unit{{idx}, std::nullopt, {}});
    }
  }
  std::size_t linked = 0;
  if (pairing.adversarial) {
    for (const auto& ex : data.paraphrases) {
      const auto it = clean_unit.find(ex.parent_id);
      if (it == clean_unit.end()) continue;
      std::size_t idx;
      const auto existing = item_by_id.find(ex.utterance.id);
      if (existing != item_by_id.end()) {
        idx = existing->second;
        table[idx].item.annotation = ex.annotation;
      } else {
        idx = table.size();
        table.push_back({MakeTrainItem(model.vocab(), labels, ex, 0.0, false, 0), idx});
        units[it->second].items.push_back(idx);
      }
      units[it->second].paraphrases.push_back(idx);
      ++linked;
    }
    if (linked == 0) {
      Fail(ErrorCode::kPrecondition,
           "adversarial pairing is enabled but no paraphrase links to a clean example");
    }
  }

  TaggerNet<float>& net = model.mutable_net();
  tensor::ParamList<float> params = net.Params();
  for (auto& [name, t] : params) t->EnableGrad();
  tensor::OptimState optim =
      tensor::MakeOptimState(config.optimizer, config.learning_rate, config.weight_decay);

  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  TaggerNet<float> best_net = net;
  double best_dev = -1.0;
  const std::uint64_t pair_seed = MixSeed(config.seed, pairing.seed, 0x5041495253ULL);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    tensor::Rng shuffle_rng(MixSeed(config.seed, epoch, 0x53485546ULL));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const TrainBatch batch = AssembleBatch(
          table, units, std::span<const std::size_t>(order).subspan(begin, end - begin),
          config.seed, pair_seed, epoch, rec.batches);
      tensor::ZeroGrads(params);
      const BatchLossValue v =
          BatchLoss<float>(net, batch, pairing, /*training=*/true, /*backward=*/true);
      if (!std::isfinite(v.total)) {
        Fail(ErrorCode::kTraining, "non-finite loss at epoch " + std::to_string(epoch) +
                                       " batch " + std::to_string(rec.batches + 1));
      }
      tensor::ClipGradNorm(params, config.clip_norm);
      tensor::OptimizerStep(params, optim);
      rec.loss += v.total;
      rec.clean_task += v.clean_task;
      rec.augmented_task += v.augmented_task;
      rec.clean_pair += v.clean_pair;
      rec.adv_pair += v.adv_pair;
      rec.clean_pairs += v.clean_pairs;
      rec.adv_pairs += v.adv_pairs;
      ++rec.batches;
    }
    const double nb = static_cast<double>(rec.batches);
    rec.loss /= nb;
    rec.clean_task /= nb;
    rec.augmented_task /= nb;
    rec.clean_pair /= nb;
    rec.adv_pair /= nb;
    if (!data.dev.empty()) {
      rec.has_dev = true;
      rec.dev_exact_match = DevExactMatch(model, data.dev);
    }
    const bool better = !config.select_on_dev || !rec.has_dev || rec.dev_exact_match >= best_dev;
    if (better) {
      best_dev = rec.dev_exact_match;
      best_net = net;
      result.best_epoch = epoch;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  net = std::move(best_net);
  for (auto& [name, t] : net.Params()) t->DropGrad();
  return result;
}

}  // namespace advnlu::tagger
