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

#include "advnlu/service/service.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"

namespace advnlu::service {
namespace {

using json = nlohmann::json;

std::int64_t SystemNowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kParse:
    case ErrorCode::kUsage: return 400;
    case ErrorCode::kAuthorization: return 401;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kState: return 409;
    default: return 500;
  }
}

HttpResponse ErrorResponse(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

HttpResponse Ok(const json& body) { return {200, body.dump()}; }

json LabelSpaceJson(const corpus::LabelSpace& labels) {
  return {{"intents", labels.intents()}, {"slot_labels", labels.slot_labels()}};
}

json ViewJson(const advset::CandidateView& v, const corpus::LabelSpace& labels) {
  json j = {{"candidate_id", v.candidate_id},
            {"text", v.paraphrase_text},
            {"tokens", v.tokens},
            {"lease_expires_ms", v.lease_expires_ms},
            {"label_space", LabelSpaceJson(labels)}};
  if (v.original_text) j["original_text"] = *v.original_text;
  return j;
}

struct Submission {
  std::string candidate_id;
  advset::Decision decision;
};

Submission ParseSubmission(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kValidation, std::string("body: ") + e.what());
  }
  if (!j.is_object()) Fail(ErrorCode::kValidation, "body: expected an object");
  if (!j.contains("candidate_id") || !j["candidate_id"].is_string()) {
    Fail(ErrorCode::kValidation, "candidate_id: required string");
  }
  if (!j.contains("decision")) Fail(ErrorCode::kValidation, "decision: required");
  return {j["candidate_id"].get<std::string>(), advset::DecisionFromJson(j["decision"].dump())};
}

}  // namespace

const char* RoleName(Role role) {
  return role == Role::kAdjudicator ? "adjudicator" : "annotator";
}

TokenTable TokenTable::Parse(const std::string& text) {
  TokenTable table;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitTabs(line);
    const std::string where = "token file line " + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4 || fields[0].empty() || fields[1].empty()) {
      Fail(ErrorCode::kParse, where + ": expected token, annotator id, role[, expiry]");
    }
    SessionToken session;
    session.annotator_id = fields[1];
    if (fields[2] == "annotator") {
      session.role = Role::kAnnotator;
    } else if (fields[2] == "adjudicator") {
      session.role = Role::kAdjudicator;
    } else {
      Fail(ErrorCode::kParse, where + ": unknown role '" + fields[2] + "'");
    }
    if (fields.size() == 4) {
      try {
        std::size_t used = 0;
        session.expires_ms = std::stoll(fields[3], &used);
        if (used != fields[3].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        Fail(ErrorCode::kParse, where + ": expiry must be milliseconds since the epoch");
      }
    }
    if (table.tokens_.count(fields[0]) > 0) Fail(ErrorCode::kParse, where + ": duplicate token");
    table.tokens_.emplace(fields[0], std::move(session));
  }
  return table;
}

TokenTable TokenTable::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open token file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

void TokenTable::Add(const std::string& token, SessionToken session) {
  tokens_[token] = std::move(session);
}

const SessionToken& TokenTable::Authenticate(const std::string& token,
                                             std::int64_t now_ms) const {
  const auto it = tokens_.find(token);
  if (it == tokens_.end()) Fail(ErrorCode::kAuthorization, "unknown token");
  if (it->second.expires_ms != 0 && it->second.expires_ms <= now_ms) {
    Fail(ErrorCode::kAuthorization, "token expired");
  }
  return it->second;
}

AnnotationApi::AnnotationApi(advset::Store& store, TokenTable tokens, ServiceOptions options)
    : store_(store), tokens_(std::move(tokens)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = SystemNowMs;
}

HttpResponse AnnotationApi::Handle(const std::string& method, const std::string& path,
                                   const std::string& authorization, const std::string& body) {
  try {
    constexpr std::string_view kBearer = "Bearer ";
    if (authorization.compare(0, kBearer.size(), kBearer) != 0) {
      Fail(ErrorCode::kAuthorization, "missing bearer token");
    }
    const SessionToken& session =
        tokens_.Authenticate(authorization.substr(kBearer.size()), options_.clock());
    return Dispatch(method, path, session, body);
  } catch (const Error& e) {
    return ErrorResponse(HttpStatus(e.code()), ErrorCodeName(e.code()), e.what());
  } catch (const std::exception& e) {
    return ErrorResponse(500, "internal", e.what());
  }
}

HttpResponse AnnotationApi::Dispatch(const std::string& method, const std::string& path,
                                     const SessionToken& session, const std::string& body) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  const bool adjudication_route =
      path == "/api/adjudications/next" || path == "/api/adjudications";
  if (adjudication_route && session.role != Role::kAdjudicator) {
    return ErrorResponse(403, "forbidden", "adjudicator role required");
  }
  if (get && path == "/api/labelspace") return Ok(LabelSpaceJson(store_.label_space()));
  if (get && path == "/api/progress") {
    const advset::Progress p = store_.GetProgress();
    return Ok({{"total", p.total}, {"by_status", p.by_status}, {"by_source", p.by_source}});
  }
  if (get && path == "/api/candidates/next") {
    const auto view = store_.NextCandidate(session.annotator_id);
    if (!view) return Ok({{"candidate", nullptr}});
    return Ok({{"candidate", ViewJson(*view, store_.label_space())}});
  }
  if (post && path == "/api/annotations") {
    const Submission s = ParseSubmission(body);
    const advset::Status status = store_.RecordAnnotation(
        {s.candidate_id, session.annotator_id, s.decision, options_.clock()});
    return Ok({{"candidate_id", s.candidate_id}, {"status", advset::StatusName(status)}});
  }
  if (get && path == "/api/adjudications/next") {
    const auto view = store_.NextAdjudication(session.annotator_id);
    if (!view) return Ok({{"adjudication", nullptr}});
    json decisions = json::array();
    for (const auto& d : view->decisions) decisions.push_back(json::parse(advset::DecisionToJson(d)));
    return Ok({{"adjudication",
                {{"candidate", ViewJson(view->candidate, store_.label_space())},
                 {"decisions", decisions}}}});
  }
  if (post && path == "/api/adjudications") {
    const Submission s = ParseSubmission(body);
    const advset::Status status =
        store_.Resolve({s.candidate_id, session.annotator_id, s.decision, options_.clock()});
    return Ok({{"candidate_id", s.candidate_id}, {"status", advset::StatusName(status)}});
  }
  return ErrorResponse(404, "not_found", "no route for " + method + " " + path);
}

struct AnnotationServer::Impl {
  Impl(advset::Store& store, TokenTable tokens, ServiceOptions options)
      : api(store, std::move(tokens), std::move(options)) {}

  AnnotationApi api;
  httplib::Server server;
  bool bound = false;
};

AnnotationServer::AnnotationServer(advset::Store& store, TokenTable tokens,
                                   ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(tokens), std::move(options))) {
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = impl_->api.Handle(req.method, req.path,
                                             req.get_header_value("Authorization"), req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  for (const char* path : {"/api/labelspace", "/api/progress", "/api/candidates/next",
                           "/api/adjudications/next"}) {
    impl_->server.Get(path, handler);
  }
  for (const char* path : {"/api/annotations", "/api/adjudications"}) {
    impl_->server.Post(path, handler);
  }
  impl_->server.Get(R"(/api/.*)", handler);
  impl_->server.Post(R"(/api/.*)", handler);
  const std::string& ui = impl_->api.options().ui_dir;
  if (!ui.empty() && !impl_->server.set_mount_point("/", ui)) {
    Fail(ErrorCode::kNotFound, "UI directory not found: " + ui);
  }
}

AnnotationServer::~AnnotationServer() { Stop(); }

int AnnotationServer::Bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port <= 0) {
    Fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound_port;
}

void AnnotationServer::Serve() {
  if (!impl_->bound) Fail(ErrorCode::kPrecondition, "Serve() before Bind()");
  impl_->server.listen_after_bind();
}

void AnnotationServer::Stop() { impl_->server.stop(); }

}  // namespace advnlu::service
