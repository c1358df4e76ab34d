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

#include "advnlu/pipeline/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/advset/store.hpp"
#include "advnlu/corpus/dataset.hpp"
#include "advnlu/corpus/synthetic.hpp"
#include "advnlu/pairing/pairing.hpp"
#include "advnlu/paraphraser/adapter.hpp"
#include "advnlu/paraphraser/autoencoder.hpp"
#include "advnlu/paraphraser/paraphrase_set.hpp"
#include "advnlu/paraphraser/rule_paraphraser.hpp"
#include "advnlu/report/report.hpp"
#include "advnlu/tagger/model.hpp"
#include "advnlu/tagger/train.hpp"

namespace advnlu::pipeline {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr std::size_t kParaphraseChunk = 64;

// Typed access to a request object that records every field it resolves,
// so the frozen copy carries defaults and leftovers can be rejected.
class Request {
 public:
  Request(std::string stage, json in) : stage_(std::move(stage)), in_(std::move(in)) {
    if (!in_.is_object()) Fail(ErrorCode::kUsage, stage_ + ": request must be a JSON object");
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    T value = std::move(fallback);
    if (in_.contains(key) && !in_[key].is_null()) value = Convert<T>(key, in_[key]);
    resolved_[key] = value;
    return value;
  }

  template <typename T>
  T Require(const std::string& key) {
    if (!in_.contains(key) || in_[key].is_null()) {
      Fail(ErrorCode::kUsage, stage_ + ": missing required field '" + key + "'");
    }
    T value = Convert<T>(key, in_[key]);
    resolved_[key] = value;
    return value;
  }

  json Object(const std::string& key) {
    json value = json::object();
    if (in_.contains(key) && !in_[key].is_null()) value = in_[key];
    if (!value.is_object()) Fail(ErrorCode::kUsage, stage_ + ": '" + key + "' must be an object");
    return value;
  }

  void Set(const std::string& key, json value) { resolved_[key] = std::move(value); }

  void Done() const {
    for (const auto& [key, value] : in_.items()) {
      if (!resolved_.contains(key)) {
        Fail(ErrorCode::kUsage, stage_ + ": unknown field '" + key + "'");
      }
    }
  }

  const json& resolved() const { return resolved_; }
  const std::string& stage() const { return stage_; }

 private:
  template <typename T>
  T Convert(const std::string& key, const json& value) const {
    try {
      return value.get<T>();
    } catch (const json::exception&) {
      Fail(ErrorCode::kUsage, stage_ + ": field '" + key + "' has the wrong type");
    }
  }

  std::string stage_;
  json in_;
  json resolved_ = json::object();
};

void Emit(const Logger& log, const std::string& line) {
  if (log) log(line);
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void WriteText(const fs::path& path, const std::string& text) {
  EnsureParent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "failed writing " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Freeze(const fs::path& path, const Request& req) {
  json frozen = req.resolved();
  frozen["stage"] = req.stage();
  WriteText(path, frozen.dump(2) + "\n");
}

fs::path SidecarConfig(const std::string& output) { return fs::path(output + ".config.json"); }

std::vector<corpus::LabeledExample> LoadExamples(const std::string& path) {
  if (!fs::exists(path)) Fail(ErrorCode::kNotFound, "dataset not found: " + path);
  corpus::ParseOptions options;
  options.id_prefix = fs::path(path).stem().string();
  return corpus::LoadDataset(path, options).examples;
}

std::vector<corpus::LabeledExample> LoadAll(const std::vector<std::string>& paths) {
  std::vector<corpus::LabeledExample> out;
  for (const auto& p : paths) {
    auto part = LoadExamples(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<paraphraser::ParaphraseSet> LoadCaches(const std::vector<std::string>& paths) {
  std::vector<paraphraser::ParaphraseSet> out;
  for (const auto& p : paths) {
    if (!fs::exists(p)) Fail(ErrorCode::kNotFound, "paraphrase cache not found: " + p);
    auto part = paraphraser::ReadCache(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

pairing::PairingConfig ParsePairing(const json& in, json& resolved) {
  const std::set<std::string> known = {"mode", "lambda_sf", "lambda_a", "pair_cap",
                                       "include_para_para", "seed"};
  for (const auto& [key, value] : in.items()) {
    if (!known.count(key)) Fail(ErrorCode::kUsage, "train: unknown pairing field '" + key + "'");
  }
  pairing::PairingConfig pc;
  const std::string mode = in.value("mode", std::string("none"));
  if (mode == "none") {
  } else if (mode == "clean") {
    pc.clean = true;
  } else if (mode == "alp") {
    pc.adversarial = true;
  } else if (mode == "alp+clean" || mode == "clean+alp") {
    pc.clean = pc.adversarial = true;
  } else {
    Fail(ErrorCode::kUsage, "train: pairing mode must be none, clean, alp or alp+clean");
  }
  try {
    pc.lambda_sf = in.value("lambda_sf", pc.lambda_sf);
    pc.lambda_a = in.value("lambda_a", pc.lambda_a);
    pc.pair_cap = in.value("pair_cap", pc.pair_cap);
    pc.include_para_para = in.value("include_para_para", pc.include_para_para);
    pc.seed = in.value("seed", pc.seed);
  } catch (const json::exception&) {
    Fail(ErrorCode::kUsage, "train: pairing field has the wrong type");
  }
  pairing::ValidatePairingConfig(pc);
  resolved = {{"mode", mode},
              {"lambda_sf", pc.lambda_sf},
              {"lambda_a", pc.lambda_a},
              {"pair_cap", pc.pair_cap},
              {"include_para_para", pc.include_para_para},
              {"seed", pc.seed}};
  return pc;
}

std::vector<tagger::TaggerModel> LoadModels(const std::vector<std::string>& dirs) {
  if (dirs.empty()) Fail(ErrorCode::kUsage, "at least one model directory is required");
  std::vector<tagger::TaggerModel> models;
  for (const auto& d : dirs) models.push_back(tagger::TaggerModel::Load(d));
  return models;
}

std::vector<const tagger::TaggerModel*> Pointers(const std::vector<tagger::TaggerModel>& models) {
  std::vector<const tagger::TaggerModel*> out;
  for (const auto& m : models) out.push_back(&m);
  return out;
}

// ---------------------------------------------------------------------------

json Ingest(Request& req, const Logger& log) {
  const auto input = req.Require<std::string>("input");
  const auto output = req.Require<std::string>("output");
  const std::string ext = fs::path(input).extension().string();
  const auto format = req.Get<std::string>(
      "format", ext == ".conll" || ext == ".cols" ? "columns" : "canonical");
  const auto bound_by = req.Get<std::string>("label_space", "");
  req.Done();
  corpus::ParseOptions options;
  options.id_prefix = fs::path(input).stem().string();
  std::optional<corpus::LabelSpace> space;
  if (!bound_by.empty()) {
    space = corpus::LabelSpace::FromExamples(LoadExamples(bound_by));
    options.label_space = &*space;
  }
  corpus::ParsedDataset parsed;
  if (format == "canonical") {
    parsed = corpus::LoadDataset(input, options);
  } else if (format == "columns") {
    std::ifstream in(input);
    if (!in) Fail(ErrorCode::kNotFound, "cannot open " + input);
    parsed = corpus::ParseColumnDataset(in, options);
  } else {
    Fail(ErrorCode::kUsage, "ingest: format must be canonical or columns");
  }
  if (parsed.no_training_data) Emit(log, "warning: " + input + " holds no records");
  EnsureParent(output);
  corpus::SaveDataset(output, parsed.examples);
  Freeze(SidecarConfig(output), req);
  return {{"examples", parsed.examples.size()},
          {"intents", parsed.label_space.intents()},
          {"slot_labels", parsed.label_space.slot_labels()},
          {"output", output}};
}

json Synth(Request& req, const Logger& log) {
  const auto out_dir = fs::path(req.Require<std::string>("out_dir"));
  const auto seed = req.Get<std::uint64_t>("seed", 1);
  const auto n_train = req.Get<std::size_t>("n_train", 2000);
  const auto n_dev = req.Get<std::size_t>("n_dev", 300);
  const auto n_test = req.Get<std::size_t>("n_test", 500);
  const auto grammar_path = req.Get<std::string>("grammar", "");
  req.Done();
  const corpus::SyntheticGrammar grammar =
      grammar_path.empty() ? corpus::DefaultGrammar() : corpus::LoadGrammar(grammar_path);
  const corpus::SyntheticCorpus c =
      corpus::GenerateSynthetic(grammar, seed, n_train, n_dev, n_test);
  fs::create_directories(out_dir);
  corpus::SaveDataset((out_dir / "train.tsv").string(), c.train);
  corpus::SaveDataset((out_dir / "dev.tsv").string(), c.dev);
  corpus::SaveDataset((out_dir / "test.tsv").string(), c.test);
  corpus::SaveDataset((out_dir / "perturbed.tsv").string(), c.perturbed);
  WriteText(out_dir / "grammar.json", corpus::GrammarToJson(grammar) + "\n");
  Freeze(out_dir / "config.json", req);
  Emit(log, "wrote synthetic corpus to " + out_dir.string());
  return {{"train", c.train.size()},
          {"dev", c.dev.size()},
          {"test", c.test.size()},
          {"perturbed", c.perturbed.size()},
          {"out_dir", out_dir.string()}};
}

json Train(Request& req, const Logger& log) {
  const auto train_path = req.Require<std::string>("train");
  const auto dev_path = req.Get<std::string>("dev", "");
  const auto augmented = req.Get<std::vector<std::string>>("augmented", {});
  const auto paraphrases = req.Get<std::vector<std::string>>("paraphrases", {});
  const json tagger_in = req.Object("tagger");
  tagger::TaggerConfig config = tagger::TaggerConfigFromJson(tagger_in.dump());
  req.Set("tagger", json::parse(tagger::TaggerConfigToJson(config)));
  json pairing_resolved;
  const pairing::PairingConfig pc = ParsePairing(req.Object("pairing"), pairing_resolved);
  req.Set("pairing", pairing_resolved);
  const auto ensemble = req.Get<std::size_t>("ensemble", 1);
  const auto out_dir = fs::path(req.Require<std::string>("out_dir"));
  const bool resume = req.Get<bool>("resume", false);
  req.Done();
  if (ensemble == 0) Fail(ErrorCode::kUsage, "train: ensemble must be >= 1");
  if (pc.adversarial && paraphrases.empty()) {
    Fail(ErrorCode::kUsage, "train: alp pairing needs paraphrase datasets");
  }
  if (fs::exists(out_dir / "config.json") && !resume) {
    Fail(ErrorCode::kPrecondition,
         "train: " + out_dir.string() + " already holds a run; pass resume to continue");
  }

  tagger::TrainData data;
  data.clean = LoadExamples(train_path);
  if (!dev_path.empty()) data.dev = LoadExamples(dev_path);
  data.augmented = LoadAll(augmented);
  data.paraphrases = LoadAll(paraphrases);
  for (auto& ex : data.paraphrases) ex.origin = corpus::Origin::kAugmented;
  fs::create_directories(out_dir);
  Freeze(out_dir / "config.json", req);

  json models = json::array();
  std::string history;
  for (std::size_t i = 0; i < ensemble; ++i) {
    const fs::path model_dir =
        ensemble == 1 ? out_dir / "model" : out_dir / ("model-" + std::to_string(i + 1));
    models.push_back(model_dir.string());
    if (resume && fs::exists(model_dir / "meta.json")) {
      Emit(log, "resume: keeping " + model_dir.string());
      continue;
    }
    tagger::TaggerConfig member = config;
    member.seed = config.seed + i;
    const tagger::TrainResult r =
        tagger::Train(data, member, pc, [&](const tagger::EpochRecord& rec) {
          json line = json::parse(tagger::EpochRecordToJson(rec));
          line["model"] = model_dir.filename().string();
          history += line.dump() + "\n";
          std::string msg = model_dir.filename().string() + " epoch " +
                            std::to_string(rec.epoch) + " loss " + std::to_string(rec.loss);
          if (rec.has_dev) msg += " dev_em " + std::to_string(rec.dev_exact_match);
          Emit(log, msg);
        });
    r.model.Save(model_dir.string());
  }
  if (!history.empty()) {
    std::ofstream out(out_dir / "history.jsonl", std::ios::app);
    out << history;
  }
  return {{"models", models}, {"out_dir", out_dir.string()}};
}

std::vector<paraphraser::ParaphraseSet> RunParaphraser(
    const std::string& method, const std::vector<corpus::Utterance>& batch,
    const std::string& source, std::size_t k, std::uint64_t seed, std::size_t offset,
    const corpus::SyntheticGrammar* grammar, const paraphraser::AdapterOptions* adapter,
    const paraphraser::Seq2SeqModel* seq2seq, double sigma) {
  std::vector<paraphraser::ParaphraseSet> out;
  if (method == "adapter") {
    out = paraphraser::Backtranslate(batch, *adapter);
  } else {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const std::uint64_t item_seed = tagger::MixSeed(seed, offset + i, 0x50415241);
      out.push_back(method == "rule"
                        ? paraphraser::RuleParaphrase(batch[i], grammar->rules, item_seed, k)
                        : paraphraser::PerturbDecode(*seq2seq, batch[i], sigma, k, item_seed));
    }
  }
  for (auto& set : out) set.source = source;
  return out;
}

json Paraphrase(Request& req, const Logger& log) {
  const auto input = req.Require<std::string>("input");
  const auto method = req.Require<std::string>("method");
  if (method != "rule" && method != "adapter" && method != "seq2seq") {
    Fail(ErrorCode::kUsage, "paraphrase: method must be rule, adapter or seq2seq");
  }
  const std::string default_source =
      method == "rule" ? paraphraser::kRuleSource
                       : (method == "seq2seq" ? paraphraser::kSeq2SeqSource : "bt");
  const auto source = req.Get<std::string>("source", default_source);
  const auto k = req.Get<std::size_t>("k", 5);
  const auto seed = req.Get<std::uint64_t>("seed", 1);
  const auto cache = req.Require<std::string>("cache");
  const bool resume = req.Get<bool>("resume", false);
  const auto grammar_path = req.Get<std::string>("grammar", "");
  const json adapter_in = req.Object("adapter");
  const json seq_in = req.Object("seq2seq");

  std::optional<corpus::SyntheticGrammar> grammar;
  std::optional<paraphraser::AdapterOptions> adapter;
  std::optional<paraphraser::Seq2SeqModel> seq2seq;
  double sigma = 0.0;
  if (method == "rule") {
    grammar = grammar_path.empty() ? corpus::DefaultGrammar() : corpus::LoadGrammar(grammar_path);
  }
  if (method == "adapter") {
    paraphraser::AdapterOptions o;
    const std::string command = adapter_in.value("command", std::string());
    if (command.empty()) Fail(ErrorCode::kUsage, "paraphrase: adapter.command is required");
    o.argv = paraphraser::SplitCommand(command);
    o.source = source;
    o.k = k;
    o.timeout_ms = adapter_in.value("timeout_ms", o.timeout_ms);
    o.max_in_flight = adapter_in.value("max_in_flight", o.max_in_flight);
    req.Set("adapter", {{"command", command},
                        {"timeout_ms", o.timeout_ms},
                        {"max_in_flight", o.max_in_flight}});
    adapter = std::move(o);
  } else {
    req.Set("adapter", adapter_in);
  }
  if (method == "seq2seq") {
    const std::string model_dir = seq_in.value("model", std::string());
    const std::string corpus_path = seq_in.value("train", std::string());
    const json cfg_in = seq_in.value("config", json::object());
    paraphraser::AutoencoderConfig cfg = paraphraser::AutoencoderConfigFromJson(cfg_in.dump());
    sigma = seq_in.value("sigma", cfg.noise_sigma);
    if (model_dir.empty()) Fail(ErrorCode::kUsage, "paraphrase: seq2seq.model is required");
    req.Set("seq2seq", {{"model", model_dir},
                        {"train", corpus_path},
                        {"config", json::parse(paraphraser::AutoencoderConfigToJson(cfg))},
                        {"sigma", sigma}});
    if (fs::exists(fs::path(model_dir) / "meta.json")) {
      seq2seq = paraphraser::Seq2SeqModel::Load(model_dir);
    } else {
      if (corpus_path.empty()) {
        Fail(ErrorCode::kNotFound, "seq2seq model " + model_dir + " missing and no training corpus");
      }
      std::vector<corpus::Utterance> sentences;
      for (const auto& ex : LoadExamples(corpus_path)) sentences.push_back(ex.utterance);
      Emit(log, "training sequence autoencoder on " + std::to_string(sentences.size()) +
                    " sentences");
      auto result = paraphraser::TrainAutoencoder(sentences, cfg, [&](std::size_t e, double l) {
        Emit(log, "autoencoder epoch " + std::to_string(e) + " loss " + std::to_string(l));
      });
      result.model.Save(model_dir);
      seq2seq = std::move(result.model);
    }
  } else {
    req.Set("seq2seq", seq_in);
  }
  req.Done();

  if (fs::exists(cache) && !resume) {
    Fail(ErrorCode::kPrecondition, "paraphrase: cache " + cache + " exists; pass resume to extend it");
  }
  std::set<std::string> done;
  if (fs::exists(cache)) {
    for (const auto& set : paraphraser::ReadCache(cache)) {
      if (set.source == source) done.insert(set.original_id);
    }
  }
  const auto examples = LoadExamples(input);
  std::vector<corpus::Utterance> todo;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (done.count(examples[i].utterance.id)) continue;
    todo.push_back(examples[i].utterance);
    positions.push_back(i);
  }
  Freeze(SidecarConfig(cache), req);
  std::size_t errors = 0, beams = 0;
  for (std::size_t start = 0; start < todo.size(); start += kParaphraseChunk) {
    const std::size_t end = std::min(todo.size(), start + kParaphraseChunk);
    const std::vector<corpus::Utterance> batch(todo.begin() + start, todo.begin() + end);
    const auto sets =
        RunParaphraser(method, batch, source, k, seed, positions[start],
                       grammar ? &*grammar : nullptr, adapter ? &*adapter : nullptr,
                       seq2seq ? &*seq2seq : nullptr, sigma);
    for (const auto& s : sets) {
      errors += s.error.empty() ? 0 : 1;
      beams += s.beams.size();
    }
    paraphraser::AppendCache(cache, sets);
    Emit(log, "paraphrased " + std::to_string(end) + "/" + std::to_string(todo.size()));
  }
  return {{"processed", todo.size()},
          {"skipped", done.size()},
          {"beams", beams},
          {"errors", errors},
          {"cache", cache}};
}

json Augment(Request& req, const Logger& log) {
  const auto model_dir = req.Require<std::string>("model");
  const auto train_path = req.Require<std::string>("train");
  const auto caches = req.Require<std::vector<std::string>>("cache");
  const auto weight = req.Get<double>("weight", 0.1);
  const auto output = req.Require<std::string>("output");
  req.Done();
  if (!(weight > 0)) Fail(ErrorCode::kUsage, "augment: weight must be positive");
  const tagger::TaggerModel model = tagger::TaggerModel::Load(model_dir);
  const auto train = LoadExamples(train_path);
  std::map<std::string, const corpus::LabeledExample*> by_id;
  std::set<std::string> seen;
  for (const auto& ex : train) {
    by_id[ex.utterance.id] = &ex;
    seen.insert(corpus::Lowercase(ex.utterance.text));
  }
  std::vector<corpus::LabeledExample> out;
  std::size_t duplicates = 0, error_sets = 0, unknown = 0;
  for (const auto& set : LoadCaches(caches)) {
    if (!set.error.empty()) {
      ++error_sets;
      continue;
    }
    const auto it = by_id.find(set.original_id);
    if (it == by_id.end()) {
      ++unknown;
      continue;
    }
    const auto kept = paraphraser::Dedupe(set.beams, seen);
    duplicates += set.beams.size() - kept.size();
    for (std::size_t b = 0; b < kept.size(); ++b) {
      if (corpus::Tokenize(kept[b].text).empty()) continue;
      seen.insert(corpus::Lowercase(kept[b].text));
      corpus::LabeledExample ex;
      ex.utterance = corpus::MakeUtterance(
          set.original_id + "~" + set.source + "~" + std::to_string(out.size()), kept[b].text);
      ex.annotation = tagger::SelfTrainTag(model, ex.utterance, *it->second);
      ex.origin = corpus::Origin::kAugmented;
      ex.weight = weight;
      ex.parent_id = set.original_id;
      ex.source = set.source;
      out.push_back(std::move(ex));
    }
  }
  if (unknown > 0) {
    Emit(log, "warning: " + std::to_string(unknown) + " paraphrase sets name unknown originals");
  }
  EnsureParent(output);
  corpus::SaveDataset(output, out);
  Freeze(SidecarConfig(output), req);
  return {{"written", out.size()},
          {"duplicates", duplicates},
          {"error_sets", error_sets},
          {"unknown_originals", unknown},
          {"output", output}};
}

json AdvsetBuild(Request& req, const Logger& log) {
  const auto model_dirs = req.Require<std::vector<std::string>>("models");
  const auto test_path = req.Require<std::string>("test");
  const auto caches = req.Require<std::vector<std::string>>("cache");
  const auto store_path = req.Require<std::string>("store");
  req.Done();
  const auto models = LoadModels(model_dirs);
  const auto pointers = Pointers(models);
  const advset::Predictor predict = [&](const corpus::Utterance& u) {
    return pointers.size() == 1 ? pointers.front()->Predict(u)
                                : tagger::EnsemblePredict(pointers, u);
  };
  const auto originals = LoadExamples(test_path);
  auto sets = LoadCaches(caches);
  std::map<std::string, std::string> original_text;
  for (const auto& ex : originals) original_text[ex.utterance.id] = ex.utterance.text;
  for (auto& set : sets) {
    const auto it = original_text.find(set.original_id);
    if (it != original_text.end()) set.beams = paraphraser::Dedupe(set.beams, {corpus::Lowercase(it->second)});
  }
  advset::BuildResult built = advset::BuildCandidates(predict, originals, sets);
  for (const auto& w : built.warnings) Emit(log, "warning: " + w);
  EnsureParent(store_path);
  auto store = advset::Store::Open(store_path);
  if (store->label_space().intents().empty()) store->SetLabelSpace(models.front().labels());
  std::vector<advset::CandidateRecord> fresh;
  std::size_t existing = 0;
  for (auto& c : built.candidates) {
    if (store->Find(c.candidate_id)) {
      ++existing;
    } else {
      fresh.push_back(std::move(c));
    }
  }
  store->AddCandidates(fresh);
  Freeze(SidecarConfig(store_path), req);
  return {{"added", fresh.size()},
          {"already_present", existing},
          {"warnings", built.warnings},
          {"store", store_path}};
}

json AdvsetExport(Request& req, const Logger&) {
  const auto store_path = req.Require<std::string>("store");
  const auto output = req.Require<std::string>("output");
  req.Done();
  if (!fs::exists(store_path)) Fail(ErrorCode::kNotFound, "store not found: " + store_path);
  auto store = advset::Store::Open(store_path);
  const auto examples = store->Export();
  EnsureParent(output);
  corpus::SaveDataset(output, examples);
  Freeze(SidecarConfig(output), req);
  std::map<std::string, std::size_t> by_source;
  for (const auto& ex : examples) ++by_source[ex.source];
  return {{"exported", examples.size()}, {"by_source", by_source}, {"output", output}};
}

json Eval(Request& req, const Logger& log) {
  const json models_in = req.Require<json>("models");
  const json clean_in = req.Require<json>("clean");
  const json adv_in = req.Get<json>("adversarial", json::array());
  const auto out_dir = fs::path(req.Require<std::string>("out_dir"));
  req.Done();
  if (!models_in.is_array() || models_in.empty()) {
    Fail(ErrorCode::kUsage, "eval: models must be a non-empty array");
  }
  std::vector<std::vector<tagger::TaggerModel>> loaded;
  std::vector<std::string> names;
  for (const auto& m : models_in) {
    try {
      names.push_back(m.at("name").get<std::string>());
      loaded.push_back(LoadModels(m.at("dirs").get<std::vector<std::string>>()));
    } catch (const json::exception&) {
      Fail(ErrorCode::kUsage, "eval: each model needs a name and dirs");
    }
  }
  std::vector<report::ModelVariant> variants;
  for (std::size_t i = 0; i < loaded.size(); ++i) variants.push_back({names[i], Pointers(loaded[i])});
  const auto load_set = [](const json& j) {
    try {
      return report::EvalSet{j.at("name").get<std::string>(),
                             LoadExamples(j.at("path").get<std::string>())};
    } catch (const json::exception&) {
      Fail(ErrorCode::kUsage, "eval: each set needs a name and path");
    }
  };
  const report::EvalSet clean = load_set(clean_in);
  std::vector<report::EvalSet> adversarial;
  for (const auto& a : adv_in) adversarial.push_back(load_set(a));
  report::EvalReport r = report::MakeReport(variants, clean, adversarial);
  r.metadata["clean_set"] = clean.name;
  r.metadata["stage"] = "eval";
  fs::create_directories(out_dir);
  const std::string table = report::FormatTable(r);
  WriteText(out_dir / "report.txt", table);
  WriteText(out_dir / "report.jsonl", report::ReportToJsonl(r));
  Freeze(out_dir / "config.json", req);
  Emit(log, table);
  return {{"table", table}, {"out_dir", out_dir.string()}};
}

json Report(Request& req, const Logger& log) {
  const auto inputs = req.Require<std::vector<std::string>>("inputs");
  const auto output = req.Get<std::string>("output", "");
  req.Done();
  if (inputs.empty()) Fail(ErrorCode::kUsage, "report: at least one input is required");
  report::EvalReport merged;
  for (const auto& path : inputs) {
    report::EvalReport part = report::ReportFromJsonl(ReadText(path));
    for (auto& row : part.rows) merged.rows.push_back(std::move(row));
    for (const auto& [k, v] : part.metadata) merged.metadata.emplace(k, v);
  }
  report::RecomputeAverages(merged);
  const std::string table = report::FormatTable(merged);
  if (!output.empty()) {
    WriteText(output, table);
    WriteText(output + ".jsonl", report::ReportToJsonl(merged));
    Freeze(SidecarConfig(output), req);
  }
  Emit(log, table);
  json rows = json::array();
  for (const auto& row : merged.rows) {
    rows.push_back({{"model", row.model},
                    {"clean", row.clean.accuracy},
                    {"adversarial_average", row.adversarial_average}});
  }
  return {{"table", table}, {"rows", rows}};
}

using StageFn = json (*)(Request&, const Logger&);

const std::vector<std::pair<std::string, StageFn>>& Stages() {
  static const std::vector<std::pair<std::string, StageFn>> stages = {
      {"ingest", Ingest},         {"synth", Synth},
      {"train", Train},           {"paraphrase", Paraphrase},
      {"augment", Augment},       {"advset-build", AdvsetBuild},
      {"advset-export", AdvsetExport}, {"eval", Eval},
      {"report", Report}};
  return stages;
}

}  // namespace

std::vector<std::string> StageNames() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : Stages()) names.push_back(name);
  return names;
}

std::string RunStage(const std::string& stage, const std::string& request_json,
                     const Logger& log) {
  json in;
  try {
    in = json::parse(request_json);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kUsage, stage + ": request is not valid JSON: " + e.what());
  }
  for (const auto& [name, fn] : Stages()) {
    if (name != stage) continue;
    Request req(stage, std::move(in));
    try {
      return fn(req, log).dump();
    } catch (const fs::filesystem_error& e) {
      Fail(ErrorCode::kIo, e.what());
    }
  }
  Fail(ErrorCode::kUsage, "unknown stage '" + stage + "'");
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return 1;
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
    case ErrorCode::kNotFound:
    case ErrorCode::kPrecondition:
    case ErrorCode::kDimension:
    case ErrorCode::kIndex:
    case ErrorCode::kConflict:
    case ErrorCode::kState: return 2;
    default: return 3;
  }
}

}  // namespace advnlu::pipeline
