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

#include "advnlu/paraphraser/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"

namespace advnlu::paraphraser {
namespace {

using json = nlohmann::json;

class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& argv) {
    if (argv.empty()) Fail(ErrorCode::kPrecondition, "adapter command is empty");
    int in_pipe[2], out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0) {
      Fail(ErrorCode::kIo, std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_ = fork();
    if (pid_ < 0) Fail(ErrorCode::kIo, std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      execvp(args[0], args.data());
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  // False when the child no longer accepts input.
  bool WriteLine(const std::string& line) {
    const std::string data = line + "\n";
    // Block SIGPIPE for this thread so a dead child surfaces as EPIPE, then
    // drain any SIGPIPE that was raised while blocked.
    sigset_t block, old;
    sigemptyset(&block);
    sigaddset(&block, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &block, &old);
    std::size_t done = 0;
    bool ok = true;
    while (done < data.size()) {
      const ssize_t n = write(to_child_, data.data() + done, data.size() - done);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        ok = false;
        break;
      }
      done += static_cast<std::size_t>(n);
    }
    if (!ok) {
      const timespec zero{0, 0};
      while (sigtimedwait(&block, nullptr, &zero) > 0) {
      }
    }
    pthread_sigmask(SIG_SETMASK, &old, nullptr);
    return ok;
  }

  enum class ReadStatus { kLine, kTimeout, kClosed };

  ReadStatus ReadLine(std::string& line, int timeout_ms) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return ReadStatus::kLine;
      }
      if (eof_) return ReadStatus::kClosed;
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      if (left <= 0) return ReadStatus::kTimeout;
      pollfd pfd{from_child_, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(left));
      if (rc < 0 && errno == EINTR) continue;
      if (rc == 0) return ReadStatus::kTimeout;
      char chunk[4096];
      const ssize_t n = read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

struct Response {
  std::string id;
  std::vector<std::string> beams;
};

std::optional<Response> ParseResponse(const std::string& line) {
  try {
    const json j = json::parse(line);
    Response r;
    r.id = j.at("id").get<std::string>();
    r.beams = j.at("beams").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<std::string> SplitCommand(const std::string& command) {
  std::vector<std::string> out;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (char ch : command) {
    if (quote != 0) {
      if (ch == quote) {
        quote = 0;
      } else {
        current.push_back(ch);
      }
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
      in_token = true;
    } else if (ch == ' ' || ch == '\t' || ch == '\n') {
      if (in_token) out.push_back(std::move(current));
      current.clear();
      in_token = false;
    } else {
      current.push_back(ch);
      in_token = true;
    }
  }
  if (quote != 0) Fail(ErrorCode::kUsage, "unterminated quote in adapter command");
  if (in_token) out.push_back(std::move(current));
  return out;
}

std::vector<ParaphraseSet> Backtranslate(const std::vector<corpus::Utterance>& utterances,
                                         const AdapterOptions& options) {
  if (options.k == 0) Fail(ErrorCode::kPrecondition, "k must be >= 1");
  if (options.max_in_flight == 0) Fail(ErrorCode::kPrecondition, "max_in_flight must be >= 1");
  std::vector<ParaphraseSet> out(utterances.size());
  // Request ids are positional so duplicate utterance ids stay distinguishable.
  const auto request_id = [](std::size_t i) { return std::to_string(i); };
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    out[i].original_id = utterances[i].id;
    out[i].source = options.source;
  }
  const auto fail = [&](std::size_t i, const std::string& why) {
    out[i].beams.clear();
    out[i].error = why;
  };

  std::size_t next = 0;
  while (next < utterances.size()) {
    ChildProcess child(options.argv);
    std::deque<std::size_t> in_flight;
    bool alive = true;
    while (alive && (next < utterances.size() || !in_flight.empty())) {
      while (alive && next < utterances.size() && in_flight.size() < options.max_in_flight) {
        const json req = {{"id", request_id(next)},
                          {"text", utterances[next].text},
                          {"k", options.k}};
        if (!child.WriteLine(req.dump())) {
          if (in_flight.empty()) fail(next++, "adapter is not accepting requests");
          alive = false;
          break;
        }
        in_flight.push_back(next++);
      }
      if (in_flight.empty()) break;
      std::string line;
      const auto status = child.ReadLine(line, options.timeout_ms);
      if (status == ChildProcess::ReadStatus::kTimeout) {
        for (std::size_t i : in_flight) fail(i, "adapter timed out");
        in_flight.clear();
        alive = false;
      } else if (status == ChildProcess::ReadStatus::kClosed) {
        for (std::size_t i : in_flight) fail(i, "adapter exited before responding");
        in_flight.clear();
        alive = false;
      } else {
        const auto response = ParseResponse(line);
        if (!response) {
          // Unattributable line: charge it to the oldest pending request.
          fail(in_flight.front(), "malformed adapter response");
          in_flight.pop_front();
          continue;
        }
        const auto it = std::find_if(in_flight.begin(), in_flight.end(), [&](std::size_t i) {
          return request_id(i) == response->id;
        });
        if (it == in_flight.end()) continue;
        const std::size_t i = *it;
        in_flight.erase(it);
        std::vector<Beam> beams;
        for (std::size_t b = 0; b < response->beams.size(); ++b) {
          beams.push_back({response->beams[b], -static_cast<double>(b), false});
        }
        out[i].beams = FilterBeams(beams, utterances[i].text, options.k);
          }
    }
    for (std::size_t i : in_flight) fail(i, "adapter stopped accepting requests");
  }
  return out;
}

}  // namespace advnlu::paraphraser
