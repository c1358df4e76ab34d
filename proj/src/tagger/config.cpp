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

#include "advnlu/tagger/config.hpp"

#include <nlohmann/json.hpp>

#include "advnlu/error.hpp"

namespace advnlu::tagger {

using json = nlohmann::json;

void ValidateTaggerConfig(const TaggerConfig& c) {
  if (c.hidden_size == 0 || c.num_layers == 0 || c.epochs == 0 ||
      c.embedding_dim == 0 || c.batch_size == 0) {
    Fail(ErrorCode::kValidation, "tagger sizes and epochs must be positive");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) {
    Fail(ErrorCode::kValidation, "dropout must lie in [0, 1)");
  }
  if (!(c.learning_rate > 0.0) || !(c.weight_decay >= 0.0)) {
    Fail(ErrorCode::kValidation, "learning_rate must be > 0 and weight_decay >= 0");
  }
  if (c.min_count < 1) Fail(ErrorCode::kValidation, "min_count must be >= 1");
  if (!(c.init_scale > 0.0)) Fail(ErrorCode::kValidation, "init_scale must be > 0");
}

std::string TaggerConfigToJson(const TaggerConfig& c) {
  json j = {
      {"hidden_size", c.hidden_size},
      {"num_layers", c.num_layers},
      {"dropout", c.dropout},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"epochs", c.epochs},
      {"embedding_dim", c.embedding_dim},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"min_count", c.min_count},
      {"optimizer", c.optimizer == tensor::OptimizerKind::kAdam ? "adam" : "sgd"},
      {"clip_norm", c.clip_norm},
      {"init_scale", c.init_scale},
      {"select_on_dev", c.select_on_dev},
  };
  return j.dump();
}

TaggerConfig TaggerConfigFromJson(const std::string& json_text) {
  TaggerConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) Fail(ErrorCode::kParse, "tagger config must be an object");
    for (const auto& [key, v] : j.items()) {
      if (key == "hidden_size") c.hidden_size = v.get<std::size_t>();
      else if (key == "num_layers") c.num_layers = v.get<std::size_t>();
      else if (key == "dropout") c.dropout = v.get<double>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "min_count") c.min_count = v.get<int>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "init_scale") c.init_scale = v.get<double>();
      else if (key == "select_on_dev") c.select_on_dev = v.get<bool>();
      else if (key == "optimizer") {
        const auto name = v.get<std::string>();
        if (name == "adam") c.optimizer = tensor::OptimizerKind::kAdam;
        else if (name == "sgd") c.optimizer = tensor::OptimizerKind::kSgd;
        else Fail(ErrorCode::kValidation, "unknown optimizer '" + name + "'");
      } else {
        Fail(ErrorCode::kValidation, "unknown tagger config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("tagger config: ") + e.what());
  }
  ValidateTaggerConfig(c);
  return c;
}

}  // namespace advnlu::tagger
