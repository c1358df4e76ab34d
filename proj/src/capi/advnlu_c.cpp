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

#include "advnlu/advnlu.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "advnlu/advset/store.hpp"
#include "advnlu/error.hpp"
#include "advnlu/pipeline/pipeline.hpp"
#include "advnlu/service/service.hpp"
#include "advnlu/tagger/model.hpp"

struct advnlu_model {
  advnlu::tagger::TaggerModel model;
};

struct advnlu_store {
  std::unique_ptr<advnlu::advset::Store> store;
};

struct advnlu_server {
  std::unique_ptr<advnlu::service::AnnotationServer> server;
};

namespace {

using json = nlohmann::json;

thread_local std::string last_error;

std::mutex log_mutex;
advnlu_log_fn log_fn = nullptr;
void* log_user = nullptr;

advnlu_status StatusFor(advnlu::ErrorCode code) {
  using advnlu::ErrorCode;
  switch (code) {
    case ErrorCode::kDimension: return ADVNLU_ERR_DIMENSION;
    case ErrorCode::kPrecondition: return ADVNLU_ERR_PRECONDITION;
    case ErrorCode::kIndex: return ADVNLU_ERR_INDEX;
    case ErrorCode::kParse: return ADVNLU_ERR_PARSE;
    case ErrorCode::kValidation: return ADVNLU_ERR_VALIDATION;
    case ErrorCode::kTraining: return ADVNLU_ERR_TRAINING;
    case ErrorCode::kCheck: return ADVNLU_ERR_CHECK;
    case ErrorCode::kNotFound: return ADVNLU_ERR_NOT_FOUND;
    case ErrorCode::kConflict: return ADVNLU_ERR_CONFLICT;
    case ErrorCode::kState: return ADVNLU_ERR_STATE;
    case ErrorCode::kAuthorization: return ADVNLU_ERR_AUTHORIZATION;
    case ErrorCode::kIo: return ADVNLU_ERR_IO;
    case ErrorCode::kUsage: return ADVNLU_ERR_USAGE;
  }
  return ADVNLU_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into a status and a thread-local
// message.
template <typename F>
advnlu_status Guard(F&& body) {
  try {
    body();
    last_error.clear();
    return ADVNLU_OK;
  } catch (const advnlu::Error& e) {
    last_error = e.what();
    return StatusFor(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ADVNLU_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ADVNLU_ERR_INTERNAL;
  }
}

advnlu_status BadArgument(const char* what) {
  last_error = std::string("invalid argument: ") + what;
  return ADVNLU_ERR_INVALID_ARGUMENT;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Log(const std::string& line) {
  std::lock_guard lock(log_mutex);
  if (log_fn != nullptr) log_fn(line.c_str(), log_user);
}

}  // namespace

extern "C" {

const char* advnlu_version(void) { return "0.1.0"; }

const char* advnlu_status_name(advnlu_status status) {
  switch (status) {
    case ADVNLU_OK: return "ok";
    case ADVNLU_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ADVNLU_ERR_INTERNAL: return "internal";
    default: break;
  }
  if (status >= ADVNLU_ERR_DIMENSION && status <= ADVNLU_ERR_USAGE) {
    return advnlu::ErrorCodeName(static_cast<advnlu::ErrorCode>(status - 1));
  }
  return "unknown";
}

const char* advnlu_last_error(void) { return last_error.c_str(); }

int advnlu_exit_code(advnlu_status status) {
  if (status == ADVNLU_OK) return 0;
  if (status == ADVNLU_ERR_INVALID_ARGUMENT) return 1;
  if (status >= ADVNLU_ERR_DIMENSION && status <= ADVNLU_ERR_USAGE) {
    return advnlu::pipeline::ExitCodeFor(static_cast<advnlu::ErrorCode>(status - 1));
  }
  return 3;
}

void advnlu_string_free(char* s) { std::free(s); }

void advnlu_set_log(advnlu_log_fn fn, void* user) {
  std::lock_guard lock(log_mutex);
  log_fn = fn;
  log_user = user;
}

advnlu_status advnlu_run_stage(const char* stage, const char* request_json,
                               char** summary_json) {
  if (stage == nullptr) return BadArgument("stage");
  if (request_json == nullptr) return BadArgument("request_json");
  if (summary_json == nullptr) return BadArgument("summary_json");
  *summary_json = nullptr;
  return Guard([&] {
    *summary_json = CopyString(advnlu::pipeline::RunStage(stage, request_json, Log));
  });
}

advnlu_status advnlu_model_load(const char* dir, advnlu_model** out) {
  if (dir == nullptr) return BadArgument("dir");
  if (out == nullptr) return BadArgument("out");
  *out = nullptr;
  return Guard([&] { *out = new advnlu_model{advnlu::tagger::TaggerModel::Load(dir)}; });
}

advnlu_status advnlu_model_predict(const advnlu_model* model, const char* text,
                                   char** prediction_json) {
  if (model == nullptr) return BadArgument("model");
  if (text == nullptr) return BadArgument("text");
  if (prediction_json == nullptr) return BadArgument("prediction_json");
  *prediction_json = nullptr;
  return Guard([&] {
    const auto p = model->model.Predict(advnlu::corpus::MakeUtterance("input", text));
    json slots = json::array();
    for (const auto& s : p.slots) {
      slots.push_back({{"label", s.label}, {"start", s.start}, {"end", s.end}});
    }
    *prediction_json = CopyString(json{{"intent", p.intent},
                                       {"intent_logits", p.intent_logits},
                                       {"slot_tags", p.slot_tags},
                                       {"slots", slots}}
                                      .dump());
  });
}

void advnlu_model_free(advnlu_model* model) { delete model; }

advnlu_status advnlu_store_open(const char* log_path, int64_t lease_ms, int show_original,
                                advnlu_store** out) {
  if (log_path == nullptr) return BadArgument("log_path");
  if (out == nullptr) return BadArgument("out");
  *out = nullptr;
  return Guard([&] {
    advnlu::advset::StoreOptions options;
    if (lease_ms > 0) options.lease_ms = lease_ms;
    options.show_original = show_original != 0;
    *out = new advnlu_store{advnlu::advset::Store::Open(log_path, options)};
  });
}

advnlu_status advnlu_store_progress(const advnlu_store* store, char** progress_json) {
  if (store == nullptr) return BadArgument("store");
  if (progress_json == nullptr) return BadArgument("progress_json");
  *progress_json = nullptr;
  return Guard([&] {
    const auto p = store->store->GetProgress();
    *progress_json = CopyString(
        json{{"total", p.total}, {"by_status", p.by_status}, {"by_source", p.by_source}}.dump());
  });
}

void advnlu_store_free(advnlu_store* store) { delete store; }

advnlu_status advnlu_server_create(advnlu_store* store, const char* token_file,
                                   const char* ui_dir, advnlu_server** out) {
  if (store == nullptr) return BadArgument("store");
  if (token_file == nullptr) return BadArgument("token_file");
  if (out == nullptr) return BadArgument("out");
  *out = nullptr;
  return Guard([&] {
    advnlu::service::ServiceOptions options;
    if (ui_dir != nullptr) options.ui_dir = ui_dir;
    *out = new advnlu_server{std::make_unique<advnlu::service::AnnotationServer>(
        *store->store, advnlu::service::TokenTable::Load(token_file), options)};
  });
}

advnlu_status advnlu_server_bind(advnlu_server* server, const char* host, int port,
                                 int* bound_port) {
  if (server == nullptr) return BadArgument("server");
  if (host == nullptr) return BadArgument("host");
  if (port < 0 || port > 65535) return BadArgument("port");
  return Guard([&] {
    const int p = server->server->Bind(host, port);
    if (bound_port != nullptr) *bound_port = p;
  });
}

advnlu_status advnlu_server_serve(advnlu_server* server) {
  if (server == nullptr) return BadArgument("server");
  return Guard([&] { server->server->Serve(); });
}

void advnlu_server_stop(advnlu_server* server) {
  if (server != nullptr) server->server->Stop();
}

void advnlu_server_free(advnlu_server* server) { delete server; }

}  // extern "C"
