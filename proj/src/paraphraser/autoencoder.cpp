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

#include "advnlu/paraphraser/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"
#include "advnlu/tensor/checkpoint.hpp"
#include "advnlu/tensor/optim.hpp"

namespace advnlu::paraphraser {
namespace {

using json = nlohmann::json;

bool Emittable(std::int32_t id) {
  return id != corpus::Vocab::kPad && id != corpus::Vocab::kUnk &&
         id != corpus::Vocab::kBos;
}

// Advances the decoder by one input token and returns log-probabilities of
// the next token.
std::vector<double> StepLogProbs(const Seq2SeqNet<float>& net, std::int32_t input,
                                 std::vector<float>& h, std::vector<float>& c) {
  tensor::LstmStep<float>(net.decoder, net.embedding.row(static_cast<std::size_t>(input)),
                          h, c);
  const std::size_t v = net.vocab_size();
  std::vector<float> logits(net.out_b.data(), net.out_b.data() + v);
  tensor::MatMulAdd(h.data(), net.out_w.data(), logits.data(), 1, net.hidden(), v);
  double mx = -std::numeric_limits<double>::infinity();
  for (float x : logits) mx = std::max(mx, static_cast<double>(x));
  double z = 0.0;
  for (float x : logits) z += std::exp(static_cast<double>(x) - mx);
  const double log_z = std::log(z) + mx;
  std::vector<double> out(v);
  for (std::size_t j = 0; j < v; ++j) out[j] = static_cast<double>(logits[j]) - log_z;
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

void ValidateAutoencoderConfig(const AutoencoderConfig& c) {
  if (c.hidden_size == 0 || c.embedding_dim == 0 || c.epochs == 0 ||
      c.batch_size == 0) {
    Fail(ErrorCode::kValidation, "autoencoder sizes and epochs must be positive");
  }
  if (c.beam_width == 0) Fail(ErrorCode::kValidation, "beam_width must be >= 1");
  if (!(c.noise_sigma >= 0.0)) Fail(ErrorCode::kValidation, "noise_sigma must be >= 0");
  if (!(c.learning_rate > 0.0)) Fail(ErrorCode::kValidation, "learning_rate must be > 0");
  if (!(c.init_scale > 0.0)) Fail(ErrorCode::kValidation, "init_scale must be > 0");
}

std::string AutoencoderConfigToJson(const AutoencoderConfig& c) {
  return json{{"hidden_size", c.hidden_size},     {"embedding_dim", c.embedding_dim},
              {"max_decode_len", c.max_decode_len}, {"noise_sigma", c.noise_sigma},
              {"beam_width", c.beam_width},       {"epochs", c.epochs},
              {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
              {"seed", c.seed},                   {"clip_norm", c.clip_norm},
              {"init_scale", c.init_scale}}
      .dump();
}

AutoencoderConfig AutoencoderConfigFromJson(const std::string& json_text) {
  AutoencoderConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) Fail(ErrorCode::kParse, "autoencoder config must be an object");
    for (const auto& [key, v] : j.items()) {
      if (key == "hidden_size") c.hidden_size = v.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = v.get<std::size_t>();
      else if (key == "max_decode_len") c.max_decode_len = v.get<std::size_t>();
      else if (key == "noise_sigma") c.noise_sigma = v.get<double>();
      else if (key == "beam_width") c.beam_width = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "init_scale") c.init_scale = v.get<double>();
      else Fail(ErrorCode::kValidation, "unknown autoencoder config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("autoencoder config: ") + e.what());
  }
  ValidateAutoencoderConfig(c);
  return c;
}

Seq2SeqModel::Seq2SeqModel(AutoencoderConfig config, corpus::Vocab vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  ValidateAutoencoderConfig(config_);
  net_ = Seq2SeqNet<float>(vocab_.size(), config_.embedding_dim, config_.hidden_size);
  tensor::Rng rng(config_.seed);
  for (auto& [name, t] : net_.Params()) tensor::InitUniform(*t, config_.init_scale, rng);
}

void Seq2SeqModel::Encode(const corpus::Utterance& utterance, std::vector<float>& h,
                          std::vector<float>& c) const {
  const auto ids = vocab_.Encode(utterance.tokens);
  if (ids.empty()) Fail(ErrorCode::kPrecondition, "cannot encode an empty utterance");
  const auto emb = tensor::EmbeddingLookup(net_.embedding, std::span<const std::int32_t>(ids));
  tensor::LstmCache<float> cache;
  const auto hidden = tensor::LstmForward<float>(net_.encoder, emb, false, {}, {}, &cache);
  const auto hr = hidden.row(ids.size() - 1);
  const auto cr = cache.cell.row(ids.size() - 1);
  h.assign(hr.begin(), hr.end());
  c.assign(cr.begin(), cr.end());
}

std::size_t Seq2SeqModel::MaxDecodeLen(const corpus::Utterance& utterance) const {
  return config_.max_decode_len > 0 ? config_.max_decode_len
                                    : 2 * utterance.tokens.size() + 5;
}

Hypothesis Seq2SeqModel::Greedy(std::vector<float> h, std::vector<float> c,
                                std::size_t max_len) const {
  Hypothesis hyp;
  std::int32_t input = corpus::Vocab::kBos;
  for (std::size_t step = 0; step < max_len; ++step) {
    const std::vector<double> lp = StepLogProbs(net_, input, h, c);
    std::int32_t best = -1;
    for (std::size_t j = 0; j < lp.size(); ++j) {
      const auto id = static_cast<std::int32_t>(j);
      if (Emittable(id) && (best < 0 || lp[j] > lp[static_cast<std::size_t>(best)])) best = id;
    }
    hyp.logprob += lp[static_cast<std::size_t>(best)];
    if (best == corpus::Vocab::kEos) return hyp;
    hyp.ids.push_back(best);
    input = best;
  }
  hyp.truncated = true;
  return hyp;
}

std::vector<Hypothesis> Seq2SeqModel::Beam(std::vector<float> h, std::vector<float> c,
                                           std::size_t width, std::size_t max_len) const {
  if (width == 0) Fail(ErrorCode::kPrecondition, "beam width must be >= 1");
  struct Live {
    Hypothesis hyp;
    std::int32_t last = corpus::Vocab::kBos;
    std::vector<float> h, c;
  };
  struct Candidate {
    double logprob;
    std::size_t live;
    std::int32_t token;
  };
  std::vector<Live> live{{Hypothesis{}, corpus::Vocab::kBos, std::move(h), std::move(c)}};
  std::vector<Hypothesis> finished;
  for (std::size_t step = 0; step < max_len && !live.empty() && finished.size() < width;
       ++step) {
    std::vector<Candidate> cands;
    for (std::size_t li = 0; li < live.size(); ++li) {
      const std::vector<double> lp = StepLogProbs(net_, live[li].last, live[li].h, live[li].c);
      for (std::size_t j = 0; j < lp.size(); ++j) {
        const auto id = static_cast<std::int32_t>(j);
        if (Emittable(id)) cands.push_back({live[li].hyp.logprob + lp[j], li, id});
      }
    }
    const std::size_t take = std::min(width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take),
                      cands.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.live != b.live) return a.live < b.live;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t r = 0; r < take; ++r) {
      const Candidate& cand = cands[r];
      const Live& parent = live[cand.live];
      Hypothesis hyp = parent.hyp;
      hyp.logprob = cand.logprob;
      if (cand.token == corpus::Vocab::kEos) {
        finished.push_back(std::move(hyp));
        continue;
      }
      hyp.ids.push_back(cand.token);
      next.push_back({std::move(hyp), cand.token, parent.h, parent.c});
    }
    live = std::move(next);
  }
  for (auto& l : live) {
    if (finished.size() >= width) break;
    l.hyp.truncated = true;
    finished.push_back(std::move(l.hyp));
  }
  std::stable_sort(finished.begin(), finished.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.normalized_score() > b.normalized_score();
                   });
  if (finished.size() > width) finished.resize(width);
  return finished;
}

std::string Seq2SeqModel::Detokenize(const Hypothesis& hyp) const {
  std::vector<std::string> tokens;
  for (std::int32_t id : hyp.ids) tokens.push_back(vocab_.Token(id));
  return corpus::JoinTokens(tokens);
}

void Seq2SeqModel::Save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const std::string config_json = AutoencoderConfigToJson(config_);
  Seq2SeqNet<float> copy = net_;
  tensor::SaveCheckpoint((std::filesystem::path(dir) / "params.ckpt").string(), config_json,
                         copy.Params());
  const json meta = {{"format", "advnlu-seq2seq"},
                     {"version", 1},
                     {"config", json::parse(config_json)},
                     {"vocab", vocab_.tokens()}};
  const auto path = std::filesystem::path(dir) / "meta.json";
  std::ofstream out(path);
  out << meta.dump(1) << "\n";
  if (!out) Fail(ErrorCode::kIo, "failed writing " + path.string());
}

Seq2SeqModel Seq2SeqModel::Load(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "meta.json";
  AutoencoderConfig config;
  std::vector<std::string> tokens;
  try {
    const json meta = json::parse(ReadText(path));
    if (meta.value("format", "") != "advnlu-seq2seq") {
      Fail(ErrorCode::kParse, path.string() + " is not an autoencoder model");
    }
    config = AutoencoderConfigFromJson(meta.at("config").dump());
    tokens = meta.at("vocab").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  Seq2SeqModel model(config, corpus::Vocab(std::move(tokens)));
  const auto ckpt =
      tensor::ReadCheckpoint((std::filesystem::path(dir) / "params.ckpt").string());
  tensor::LoadCheckpointInto(ckpt, model.net_.Params());
  return model;
}

AutoencoderResult TrainAutoencoder(
    const std::vector<corpus::Utterance>& corpus, const AutoencoderConfig& config,
    const std::function<void(std::size_t epoch, double loss)>& on_epoch) {
  ValidateAutoencoderConfig(config);
  std::vector<std::vector<std::string>> sentences;
  for (const auto& u : corpus) {
    if (!u.tokens.empty()) sentences.push_back(u.tokens);
  }
  if (sentences.empty()) Fail(ErrorCode::kPrecondition, "autoencoder corpus is empty");
  AutoencoderResult result{Seq2SeqModel(config, corpus::Vocab::Build(sentences, 1)), {}};
  Seq2SeqNet<float>& net = result.model.mutable_net();
  std::vector<std::vector<std::int32_t>> encoded;
  for (const auto& s : sentences) encoded.push_back(result.model.vocab().Encode(s));

  auto params = net.Params();
  for (auto& [name, t] : params) t->EnableGrad();
  tensor::OptimState optim =
      tensor::MakeOptimState(tensor::OptimizerKind::kAdam, config.learning_rate, 0.0);
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  tensor::Rng rng(config.seed ^ 0xA5A5A5A5ULL);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      tensor::ZeroGrads(params);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        batch_loss += ReconstructionLoss<float>(net, encoded[order[i]], true);
      }
      if (!std::isfinite(batch_loss)) {
        Fail(ErrorCode::kTraining, "autoencoder loss is non-finite at epoch " +
                                       std::to_string(epoch));
      }
      const float scale = 1.0f / static_cast<float>(end - begin);
      for (auto& [name, t] : params) {
        for (float& g : t->grad()) g *= scale;
      }
      tensor::ClipGradNorm(params, config.clip_norm);
      tensor::OptimizerStep(params, optim);
      total += batch_loss;
    }
    const double mean = total / static_cast<double>(order.size());
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  for (auto& [name, t] : params) t->DropGrad();
  return result;
}

Hypothesis GreedyDecode(const Seq2SeqModel& model, const corpus::Utterance& utterance) {
  std::vector<float> h, c;
  model.Encode(utterance, h, c);
  return model.Greedy(std::move(h), std::move(c), model.MaxDecodeLen(utterance));
}

ParaphraseSet PerturbDecode(const Seq2SeqModel& model, const corpus::Utterance& utterance,
                            double sigma, std::size_t k, std::uint64_t seed) {
  if (!(sigma >= 0.0)) Fail(ErrorCode::kPrecondition, "sigma must be >= 0");
  if (k == 0) Fail(ErrorCode::kPrecondition, "k must be >= 1");
  std::vector<float> h, c;
  model.Encode(utterance, h, c);
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (float& v : h) v += static_cast<float>(noise(rng));
    for (float& v : c) v += static_cast<float>(noise(rng));
  }
  const auto hyps = model.Beam(std::move(h), std::move(c), k, model.MaxDecodeLen(utterance));
  std::vector<Beam> beams;
  for (const auto& hyp : hyps) {
    beams.push_back({model.Detokenize(hyp), hyp.normalized_score(), hyp.truncated});
  }
  ParaphraseSet set;
  set.original_id = utterance.id;
  set.source = kSeq2SeqSource;
  set.beams = FilterBeams(beams, utterance.normalized(), k);
  return set;
}

}  // namespace advnlu::paraphraser
