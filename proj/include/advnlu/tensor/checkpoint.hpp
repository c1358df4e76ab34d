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

#ifndef ADVNLU_TENSOR_CHECKPOINT_HPP_
#define ADVNLU_TENSOR_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tensor {

// On-disk layout (little-endian):
//   magic "ADVNLUCK" | u32 version | u64 config length | config bytes (JSON)
//   u64 array count | per array: u64 name length | name | u64 rank |
//   u64 dims[rank] | f32 values[prod(dims)]
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_json;
  std::vector<NamedArray> arrays;
};

void SaveCheckpoint(const std::string& path, const std::string& config_json,
                    const ParamList<float>& params);

Checkpoint ReadCheckpoint(const std::string& path);

// Copies checkpoint arrays into `params`, requiring the same names in the
// same order with identical shapes.
void LoadCheckpointInto(const Checkpoint& checkpoint,
                        const ParamList<float>& params);

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_CHECKPOINT_HPP_
