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

#ifndef ADVNLU_ERROR_HPP_
#define ADVNLU_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace advnlu {

enum class ErrorCode {
  kDimension,
  kPrecondition,
  kIndex,
  kParse,
  kValidation,
  kTraining,
  kCheck,
  kNotFound,
  kConflict,
  kState,
  kAuthorization,
  kIo,
  kUsage,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries a category so the C boundary
// can map it onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace advnlu

#endif  // ADVNLU_ERROR_HPP_
