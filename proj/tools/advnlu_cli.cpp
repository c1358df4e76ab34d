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

// Command-line driver for the advnlu workflow. Each subcommand turns its
// flags into a stage request, runs it through the C API and prints the JSON
// summary on stdout. Progress goes to stderr.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "advnlu/advnlu.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void PrintLog(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int Report(advnlu_status status) {
  if (status != ADVNLU_OK) {
    std::fprintf(stderr, "advnlu: %s: %s\n", advnlu_status_name(status), advnlu_last_error());
  }
  return advnlu_exit_code(status);
}

int RunStage(const std::string& stage, const json& request) {
  char* summary = nullptr;
  const advnlu_status status = advnlu_run_stage(stage.c_str(), request.dump().c_str(), &summary);
  if (status == ADVNLU_OK) {
    std::printf("%s\n", json::parse(summary).dump(2).c_str());
    advnlu_string_free(summary);
  }
  return Report(status);
}

json LoadBase(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open request file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError(path + " must hold a JSON object");
    j.erase("stage");
    return j;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

template <typename T>
void SetIf(json& j, const std::string& key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

std::vector<std::string> SplitList(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

// An augmentation name is either an existing dataset path or the stem of a
// .jsonl or .tsv file in `dir`.
std::vector<std::string> ResolveDatasets(const std::vector<std::string>& names,
                                         const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& name : SplitList(names)) {
    if (name == "none") {
      if (names.size() != 1) throw UsageError("'none' cannot be combined with other sources");
      continue;
    }
    if (fs::exists(name)) {
      out.push_back(name);
      continue;
    }
    const fs::path jsonl = fs::path(dir) / (name + ".jsonl");
    const fs::path tsv = fs::path(dir) / (name + ".tsv");
    if (fs::exists(jsonl)) {
      out.push_back(jsonl.string());
    } else if (fs::exists(tsv)) {
      out.push_back(tsv.string());
    } else {
      throw UsageError("augmentation source '" + name + "' is neither a file nor " +
                       jsonl.string() + " or " + tsv.string());
    }
  }
  return out;
}

// Parses NAME=PATH; a bare PATH uses its file stem as the name.
json NamedPath(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {{"name", fs::path(spec).stem().string()}, {"path", spec}};
  return {{"name", spec.substr(0, eq)}, {"path", spec.substr(eq + 1)}};
}

// Parses NAME=DIR[,DIR...]; a bare DIR list is named after the first one.
json NamedModels(const std::string& spec) {
  const auto eq = spec.find('=');
  const std::string dirs = eq == std::string::npos ? spec : spec.substr(eq + 1);
  const auto list = SplitList({dirs});
  if (list.empty()) throw UsageError("model spec '" + spec + "' names no directories");
  const std::string name = eq == std::string::npos
                               ? fs::path(list.front()).filename().string()
                               : spec.substr(0, eq);
  return {{"name", name}, {"dirs", list}};
}

std::string EnvOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : fallback;
}

int Serve(const std::string& store_path, const std::string& token_file, const std::string& host,
          int port, const std::string& ui_dir, double lease_minutes, bool hide_original) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  advnlu_store* store = nullptr;
  advnlu_status status = advnlu_store_open(
      store_path.c_str(), static_cast<int64_t>(lease_minutes * 60000.0), hide_original ? 0 : 1,
      &store);
  if (status != ADVNLU_OK) return Report(status);
  advnlu_server* server = nullptr;
  status = advnlu_server_create(store, token_file.c_str(),
                                ui_dir.empty() ? nullptr : ui_dir.c_str(), &server);
  int bound = 0;
  if (status == ADVNLU_OK) status = advnlu_server_bind(server, host.c_str(), port, &bound);
  if (status == ADVNLU_OK) {
    std::fprintf(stderr, "serving %s on http://%s:%d\n", store_path.c_str(), host.c_str(), bound);
    std::thread([server, signals] {
      int sig = 0;
      sigwait(&signals, &sig);
      std::fprintf(stderr, "shutting down\n");
      advnlu_server_stop(server);
    }).detach();
    status = advnlu_server_serve(server);
  }
  const int code = Report(status);
  advnlu_server_free(server);
  advnlu_store_free(store);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial robustness toolkit for intent classification and slot filling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", advnlu_version());
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  std::string request_file;
  std::optional<std::string> s_input, s_output, s_format, s_label_space, s_out_dir, s_grammar,
      s_train, s_dev, s_method, s_source, s_cache, s_model, s_test, s_store, s_seq_model,
      s_seq_train, s_tagger_config;
  std::optional<std::uint64_t> u_seed, u_n_train, u_n_dev, u_n_test, u_k, u_ensemble, u_epochs,
      u_hidden, u_embedding, u_batch, u_timeout, u_in_flight, u_pair_cap;
  std::optional<double> d_weight, d_lambda_sf, d_lambda_a, d_sigma, d_lr;
  std::optional<bool> b_para_para;
  bool resume = false;
  std::vector<std::string> augment, paraphrases, caches, models, adversarial, inputs;
  std::string aug_dir = "augmented";
  std::string pairing = "none";
  std::string adapter_cmd;
  std::string clean_set;

  const auto add_request = [&](CLI::App* cmd) {
    cmd->add_option("--request", request_file,
                    "JSON file with a base request; flags override its fields")
        ->check(CLI::ExistingFile);
  };

  auto* ingest = app.add_subcommand("ingest", "Convert a dataset to the canonical format");
  add_request(ingest);
  ingest->add_option("--input", s_input, "Dataset to read");
  ingest->add_option("--output", s_output, "Canonical JSONL file to write");
  ingest->add_option("--format", s_format, "canonical or columns (default: by extension)");
  ingest->add_option("--label-space", s_label_space, "Dataset whose labels bound this one");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic train/dev/test corpus");
  add_request(synth);
  synth->add_option("--out-dir", s_out_dir, "Directory for train/dev/test.jsonl");
  synth->add_option("--seed", u_seed, "Generator seed");
  synth->add_option("--n-train", u_n_train, "Training sentences");
  synth->add_option("--n-dev", u_n_dev, "Development sentences");
  synth->add_option("--n-test", u_n_test, "Test sentences");
  synth->add_option("--grammar", s_grammar, "Grammar JSON (default: built-in)");

  auto* train = app.add_subcommand("train", "Train a tagger or an ensemble of taggers");
  add_request(train);
  train->add_option("--train", s_train, "Clean training set");
  train->add_option("--dev", s_dev, "Clean development set");
  train->add_option("--augment", augment,
                    "Augmented datasets: 'none', files, or names resolved in --aug-dir")
      ->delimiter(',');
  train->add_option("--aug-dir", aug_dir, "Directory searched for named augmentation sources");
  train->add_option("--paraphrases", paraphrases,
                    "Datasets paired with their originals (default: the --augment sources)")
      ->delimiter(',');
  train->add_option("--pairing", pairing, "Logit pairing: none, clean, alp or alp+clean")
      ->check(CLI::IsMember({"none", "clean", "alp", "alp+clean"}));
  train->add_option("--lambda-sf", d_lambda_sf, "Clean pairing weight");
  train->add_option("--lambda-a", d_lambda_a, "Adversarial pairing weight");
  train->add_option("--pair-cap", u_pair_cap, "Maximum pairs per batch");
  train->add_option("--para-para", b_para_para, "Also pair paraphrases with each other");
  train->add_option("--ensemble", u_ensemble, "Number of ensemble members");
  train->add_option("--tagger-config", s_tagger_config, "Tagger configuration JSON")
      ->check(CLI::ExistingFile);
  train->add_option("--seed", u_seed, "Tagger seed");
  train->add_option("--epochs", u_epochs, "Training epochs");
  train->add_option("--hidden", u_hidden, "Hidden size");
  train->add_option("--embedding", u_embedding, "Embedding size");
  train->add_option("--batch-size", u_batch, "Batch size");
  train->add_option("--lr", d_lr, "Learning rate");
  train->add_option("--out-dir", s_out_dir, "Run directory");
  train->add_flag("--resume", resume, "Continue a partially finished run");

  auto* para = app.add_subcommand("paraphrase", "Generate paraphrases into a cache");
  add_request(para);
  para->add_option("--input", s_input, "Dataset to paraphrase");
  para->add_option("--method", s_method, "rule, adapter or seq2seq")
      ->check(CLI::IsMember({"rule", "adapter", "seq2seq"}));
  para->add_option("--source", s_source, "Source tag recorded on each set");
  para->add_option("-k,--k", u_k, "Beams per input");
  para->add_option("--seed", u_seed, "Sampling seed");
  para->add_option("--cache", s_cache, "Paraphrase cache (JSONL)");
  para->add_option("--grammar", s_grammar, "Grammar JSON for the rule paraphraser");
  para->add_option("--adapter-cmd", adapter_cmd,
                   "Back-translation command (env ADVNLU_ADAPTER_CMD overrides)");
  para->add_option("--timeout-ms", u_timeout, "Adapter timeout per request");
  para->add_option("--max-in-flight", u_in_flight, "Adapter requests in flight");
  para->add_option("--seq2seq-model", s_seq_model, "Autoencoder directory");
  para->add_option("--seq2seq-train", s_seq_train, "Corpus to train a missing autoencoder");
  para->add_option("--sigma", d_sigma, "Hidden-state noise scale");
  para->add_flag("--resume", resume, "Skip inputs already in the cache");

  auto* aug = app.add_subcommand("augment", "Self-label paraphrases into a training set");
  add_request(aug);
  aug->add_option("--model", s_model, "Model directory used for self-training");
  aug->add_option("--train", s_train, "Clean training set the paraphrases came from");
  aug->add_option("--cache", caches, "Paraphrase caches")->delimiter(',');
  aug->add_option("--weight", d_weight, "Loss weight of augmented examples");
  aug->add_option("--output", s_output, "Augmented dataset to write");

  auto* advset = app.add_subcommand("advset", "Build or export the adversarial test set");
  advset->require_subcommand(1);
  auto* build = advset->add_subcommand("build", "Add flip-filtered candidates to a store");
  add_request(build);
  build->add_option("--model", models, "Model directories (several form an ensemble)")
      ->delimiter(',');
  build->add_option("--test", s_test, "Clean test set");
  build->add_option("--cache", caches, "Paraphrase caches of the test set")->delimiter(',');
  build->add_option("--store", s_store, "Candidate event log");
  auto* exp = advset->add_subcommand("export", "Write finalized candidates as a dataset");
  add_request(exp);
  exp->add_option("--store", s_store, "Candidate event log");
  exp->add_option("--output", s_output, "Dataset to write");

  auto* annotate = app.add_subcommand("annotate", "Annotation service");
  annotate->require_subcommand(1);
  auto* serve = annotate->add_subcommand("serve", "Serve the annotation API and UI");
  std::string serve_store, token_file, host, ui_dir;
  int port = 0;
  double lease_minutes = 30.0;
  bool hide_original = false;
  serve->add_option("--store", serve_store, "Candidate event log")->required();
  serve->add_option("--token-file", token_file, "Token file")
      ->envname("ADVNLU_TOKEN_FILE")
      ->required();
  serve->add_option("--host", host, "Listen address")
      ->envname("ADVNLU_HOST")
      ->default_val("127.0.0.1");
  serve->add_option("--port", port, "Listen port (0 picks one)")
      ->envname("ADVNLU_PORT")
      ->default_val(8080)
      ->check(CLI::Range(0, 65535));
  serve->add_option("--ui-dir", ui_dir, "Built UI bundle")->envname("ADVNLU_UI_DIR");
  serve->add_option("--lease-minutes", lease_minutes, "Lease timeout")
      ->check(CLI::PositiveNumber);
  serve->add_flag("--hide-original", hide_original, "Do not show annotators the original");

  auto* eval = app.add_subcommand("eval", "Score models on clean and adversarial sets");
  add_request(eval);
  eval->add_option("--model", models, "NAME=DIR[,DIR...]; several dirs form an ensemble");
  eval->add_option("--clean", clean_set, "Clean test set as NAME=PATH or PATH");
  eval->add_option("--adv", adversarial, "Adversarial set as NAME=PATH or PATH");
  eval->add_option("--out-dir", s_out_dir, "Directory for the report");

  auto* rep = app.add_subcommand("report", "Merge evaluation reports into one table");
  add_request(rep);
  rep->add_option("inputs", inputs, "report.jsonl files");
  rep->add_option("--output", s_output, "Table to write (records go to OUTPUT.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (!quiet) advnlu_set_log(PrintLog, nullptr);

  try {
    if (annotate->parsed()) {
      return Serve(serve_store, token_file, host, port, ui_dir, lease_minutes, hide_original);
    }
    json req = LoadBase(request_file);
    if (ingest->parsed()) {
      SetIf(req, "input", s_input);
      SetIf(req, "output", s_output);
      SetIf(req, "format", s_format);
      SetIf(req, "label_space", s_label_space);
      return RunStage("ingest", req);
    }
    if (synth->parsed()) {
      SetIf(req, "out_dir", s_out_dir);
      SetIf(req, "seed", u_seed);
      SetIf(req, "n_train", u_n_train);
      SetIf(req, "n_dev", u_n_dev);
      SetIf(req, "n_test", u_n_test);
      SetIf(req, "grammar", s_grammar);
      return RunStage("synth", req);
    }
    if (train->parsed()) {
      SetIf(req, "train", s_train);
      SetIf(req, "dev", s_dev);
      const bool augment_given = train->count("--augment") > 0;
      if (augment_given) req["augmented"] = ResolveDatasets(augment, aug_dir);
      if (train->count("--paraphrases") > 0) {
        req["paraphrases"] = ResolveDatasets(paraphrases, aug_dir);
      } else if (pairing.find("alp") != std::string::npos && augment_given) {
        req["paraphrases"] = req["augmented"];
      }
      json tagger = req.value("tagger", json::object());
      if (s_tagger_config) tagger.update(LoadBase(*s_tagger_config));
      SetIf(tagger, "seed", u_seed);
      SetIf(tagger, "epochs", u_epochs);
      SetIf(tagger, "hidden_size", u_hidden);
      SetIf(tagger, "embedding_dim", u_embedding);
      SetIf(tagger, "batch_size", u_batch);
      SetIf(tagger, "learning_rate", d_lr);
      req["tagger"] = tagger;
      json pc = req.value("pairing", json::object());
      if (train->count("--pairing") > 0 || !pc.contains("mode")) pc["mode"] = pairing;
      SetIf(pc, "lambda_sf", d_lambda_sf);
      SetIf(pc, "lambda_a", d_lambda_a);
      SetIf(pc, "pair_cap", u_pair_cap);
      SetIf(pc, "include_para_para", b_para_para);
      req["pairing"] = pc;
      SetIf(req, "ensemble", u_ensemble);
      SetIf(req, "out_dir", s_out_dir);
      if (resume) req["resume"] = true;
      return RunStage("train", req);
    }
    if (para->parsed()) {
      SetIf(req, "input", s_input);
      SetIf(req, "method", s_method);
      SetIf(req, "source", s_source);
      SetIf(req, "k", u_k);
      SetIf(req, "seed", u_seed);
      SetIf(req, "cache", s_cache);
      SetIf(req, "grammar", s_grammar);
      const std::string command = EnvOr("ADVNLU_ADAPTER_CMD", adapter_cmd);
      if (!command.empty() || u_timeout || u_in_flight) {
        json adapter = req.value("adapter", json::object());
        if (!command.empty()) adapter["command"] = command;
        SetIf(adapter, "timeout_ms", u_timeout);
        SetIf(adapter, "max_in_flight", u_in_flight);
        req["adapter"] = adapter;
      }
      if (s_seq_model || s_seq_train || d_sigma) {
        json seq = req.value("seq2seq", json::object());
        SetIf(seq, "model", s_seq_model);
        SetIf(seq, "train", s_seq_train);
        SetIf(seq, "sigma", d_sigma);
        req["seq2seq"] = seq;
      }
      if (resume) req["resume"] = true;
      return RunStage("paraphrase", req);
    }
    if (aug->parsed()) {
      SetIf(req, "model", s_model);
      SetIf(req, "train", s_train);
      if (!caches.empty()) req["cache"] = caches;
      SetIf(req, "weight", d_weight);
      SetIf(req, "output", s_output);
      return RunStage("augment", req);
    }
    if (build->parsed()) {
      if (!models.empty()) req["models"] = models;
      SetIf(req, "test", s_test);
      if (!caches.empty()) req["cache"] = caches;
      SetIf(req, "store", s_store);
      return RunStage("advset-build", req);
    }
    if (exp->parsed()) {
      SetIf(req, "store", s_store);
      SetIf(req, "output", s_output);
      return RunStage("advset-export", req);
    }
    if (eval->parsed()) {
      if (!models.empty()) {
        json list = json::array();
        for (const auto& m : models) list.push_back(NamedModels(m));
        req["models"] = list;
      }
      if (!clean_set.empty()) req["clean"] = NamedPath(clean_set);
      if (!adversarial.empty()) {
        json list = json::array();
        for (const auto& a : adversarial) list.push_back(NamedPath(a));
        req["adversarial"] = list;
      }
      SetIf(req, "out_dir", s_out_dir);
      return RunStage("eval", req);
    }
    if (rep->parsed()) {
      if (!inputs.empty()) req["inputs"] = inputs;
      SetIf(req, "output", s_output);
      return RunStage("report", req);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "advnlu: usage: %s\n", e.what());
    return 1;
  }
  return 1;
}
