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

#ifndef ADVNLU_SERVICE_SERVICE_HPP_
#define ADVNLU_SERVICE_SERVICE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "advnlu/advset/store.hpp"

namespace advnlu::service {

enum class Role { kAnnotator, kAdjudicator };

const char* RoleName(Role role);

struct SessionToken {
  std::string annotator_id;
  Role role = Role::kAnnotator;
  std::int64_t expires_ms = 0;  // 0 means no expiry
};

// Static bearer tokens. One per line:
//   token<TAB>annotator_id<TAB>role[<TAB>expiry_ms]
// Blank lines and lines starting with '#' are ignored.
class TokenTable {
 public:
  TokenTable() = default;

  static TokenTable Parse(const std::string& text);
  static TokenTable Load(const std::string& path);

  void Add(const std::string& token, SessionToken session);

  // Throws kAuthorization for unknown or expired tokens.
  const SessionToken& Authenticate(const std::string& token, std::int64_t now_ms) const;

  std::size_t size() const { return tokens_.size(); }

 private:
  std::map<std::string, SessionToken, std::less<>> tokens_;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

struct ServiceOptions {
  std::string ui_dir;                   // served at "/" when non-empty
  std::function<std::int64_t()> clock;  // defaults to the system clock
};

// Request handling for the annotation API, independent of the transport.
// Bodies are JSON; errors are {"error": {"code": ..., "message": ...}}.
class AnnotationApi {
 public:
  AnnotationApi(advset::Store& store, TokenTable tokens, ServiceOptions options = {});

  HttpResponse Handle(const std::string& method, const std::string& path,
                      const std::string& authorization, const std::string& body);

  const ServiceOptions& options() const { return options_; }

 private:
  HttpResponse Dispatch(const std::string& method, const std::string& path,
                        const SessionToken& session, const std::string& body);

  advset::Store& store_;
  TokenTable tokens_;
  ServiceOptions options_;
};

// HTTP server around AnnotationApi.
class AnnotationServer {
 public:
  AnnotationServer(advset::Store& store, TokenTable tokens, ServiceOptions options = {});
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port.
  int Bind(const std::string& host, int port);
  // Serves until Stop() is called. Requires a prior Bind().
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace advnlu::service

#endif  // ADVNLU_SERVICE_SERVICE_HPP_
