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

/* C interface to the advnlu toolkit. Every object is an opaque handle
 * released with its matching *_free function. Functions return an
 * advnlu_status; on failure advnlu_last_error() describes the problem for
 * the calling thread. Strings returned through char** out-parameters are
 * owned by the caller and released with advnlu_string_free(). */

#ifndef ADVNLU_ADVNLU_H_
#define ADVNLU_ADVNLU_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ADVNLU_API __declspec(dllexport)
#else
#define ADVNLU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum advnlu_status {
  ADVNLU_OK = 0,
  ADVNLU_ERR_DIMENSION = 1,
  ADVNLU_ERR_PRECONDITION = 2,
  ADVNLU_ERR_INDEX = 3,
  ADVNLU_ERR_PARSE = 4,
  ADVNLU_ERR_VALIDATION = 5,
  ADVNLU_ERR_TRAINING = 6,
  ADVNLU_ERR_CHECK = 7,
  ADVNLU_ERR_NOT_FOUND = 8,
  ADVNLU_ERR_CONFLICT = 9,
  ADVNLU_ERR_STATE = 10,
  ADVNLU_ERR_AUTHORIZATION = 11,
  ADVNLU_ERR_IO = 12,
  ADVNLU_ERR_USAGE = 13,
  ADVNLU_ERR_INVALID_ARGUMENT = 14,
  ADVNLU_ERR_INTERNAL = 15
} advnlu_status;

ADVNLU_API const char* advnlu_version(void);
ADVNLU_API const char* advnlu_status_name(advnlu_status status);
/* Message of the last failure on this thread; empty after a success. */
ADVNLU_API const char* advnlu_last_error(void);
/* Suggested process exit code: 0 ok, 1 usage, 2 data, 3 runtime. */
ADVNLU_API int advnlu_exit_code(advnlu_status status);
ADVNLU_API void advnlu_string_free(char* s);

/* Progress lines from long-running calls. Pass NULL to silence. */
typedef void (*advnlu_log_fn)(const char* line, void* user);
ADVNLU_API void advnlu_set_log(advnlu_log_fn fn, void* user);

/* Runs one workflow stage ("ingest", "synth", "train", "paraphrase",
 * "augment", "advset-build", "advset-export", "eval", "report") from a JSON
 * request and returns its JSON summary. */
ADVNLU_API advnlu_status advnlu_run_stage(const char* stage, const char* request_json,
                                          char** summary_json);

/* Trained tagger. */
typedef struct advnlu_model advnlu_model;
ADVNLU_API advnlu_status advnlu_model_load(const char* dir, advnlu_model** out);
/* JSON {"intent", "intent_logits", "slot_tags", "slots"}. */
ADVNLU_API advnlu_status advnlu_model_predict(const advnlu_model* model, const char* text,
                                              char** prediction_json);
ADVNLU_API void advnlu_model_free(advnlu_model* model);

/* Annotation store over an append-only event log. */
typedef struct advnlu_store advnlu_store;
ADVNLU_API advnlu_status advnlu_store_open(const char* log_path, int64_t lease_ms,
                                           int show_original, advnlu_store** out);
ADVNLU_API advnlu_status advnlu_store_progress(const advnlu_store* store, char** progress_json);
ADVNLU_API void advnlu_store_free(advnlu_store* store);

/* HTTP annotation service over a store. The store must outlive it. */
typedef struct advnlu_server advnlu_server;
ADVNLU_API advnlu_status advnlu_server_create(advnlu_store* store, const char* token_file,
                                              const char* ui_dir, advnlu_server** out);
/* Port 0 picks a free port; the bound port is written to *bound_port. */
ADVNLU_API advnlu_status advnlu_server_bind(advnlu_server* server, const char* host, int port,
                                            int* bound_port);
/* Blocks until advnlu_server_stop() is called from another thread. */
ADVNLU_API advnlu_status advnlu_server_serve(advnlu_server* server);
ADVNLU_API void advnlu_server_stop(advnlu_server* server);
ADVNLU_API void advnlu_server_free(advnlu_server* server);

#ifdef __cplusplus
}
#endif

#endif /* ADVNLU_ADVNLU_H_ */
