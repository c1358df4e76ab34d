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

#ifndef ADVNLU_TAGGER_CONFIG_HPP_
#define ADVNLU_TAGGER_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "advnlu/tensor/optim.hpp"

namespace advnlu::tagger {

// Hyperparameters of the joint intent and slot tagger.
struct TaggerConfig {
  std::size_t hidden_size = 200;
  std::size_t num_layers = 2;
  double dropout = 0.3;
  double learning_rate = 0.01;
  double weight_decay = 0.001;
  std::size_t epochs = 20;
  std::size_t embedding_dim = 128;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  int min_count = 1;
  tensor::OptimizerKind optimizer = tensor::OptimizerKind::kAdam;
  double clip_norm = 5.0;
  double init_scale = 0.1;
  // Keep the parameters of the epoch with the best clean dev exact-match.
  bool select_on_dev = true;
};

// Throws kValidation on non-positive sizes or dropout outside [0, 1).
void ValidateTaggerConfig(const TaggerConfig& config);

std::string TaggerConfigToJson(const TaggerConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
TaggerConfig TaggerConfigFromJson(const std::string& json_text);

}  // namespace advnlu::tagger

#endif  // ADVNLU_TAGGER_CONFIG_HPP_
