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

#ifndef ADVNLU_TENSOR_OPTIM_HPP_
#define ADVNLU_TENSOR_OPTIM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "advnlu/error.hpp"
#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tensor {

enum class OptimizerKind { kAdam, kSgd };

struct OptimState {
  OptimizerKind kind = OptimizerKind::kAdam;
  std::uint64_t step_count = 0;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
};

inline OptimState MakeOptimState(OptimizerKind kind, double learning_rate,
                                 double weight_decay) {
  if (!(learning_rate > 0.0) || !(weight_decay >= 0.0)) {
    Fail(ErrorCode::kPrecondition,
         "optimizer needs learning_rate > 0 and weight_decay >= 0");
  }
  OptimState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  s.weight_decay = weight_decay;
  return s;
}

// Rescales all gradients so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
template <typename T>
double ClipGradNorm(const ParamList<T>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, t] : params) {
    for (T g : t->grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for (const auto& [name, t] : params) {
      for (T& g : t->grad()) g *= scale;
    }
  }
  return norm;
}

// One optimizer step with decoupled weight decay:
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p     (Adam)
//   p <- p - lr * g - lr * wd * p                               (SGD)
template <typename T>
void OptimizerStep(const ParamList<T>& params, OptimState& state) {
  for (const auto& [name, t] : params) {
    if (!t->has_grad()) {
      Fail(ErrorCode::kTraining, "parameter '" + name + "' has no gradient");
    }
    for (T g : t->grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        Fail(ErrorCode::kTraining,
             "non-finite gradient in parameter '" + name + "'");
      }
    }
  }
  if (state.kind == OptimizerKind::kAdam && state.first_moment.empty()) {
    for (const auto& [name, t] : params) {
      state.first_moment.emplace_back(t->size(), 0.0f);
      state.second_moment.emplace_back(t->size(), 0.0f);
    }
  }
  if (state.kind == OptimizerKind::kAdam &&
      state.first_moment.size() != params.size()) {
    Fail(ErrorCode::kDimension, "optimizer state does not match parameters");
  }
  ++state.step_count;
  const double lr = state.learning_rate, wd = state.weight_decay;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& t = *params[k].second;
    std::span<T> g = t.grad();
    if (state.kind == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double p = t[i];
        t[i] = static_cast<T>(p - lr * g[i] - lr * wd * p);
      }
      continue;
    }
    std::vector<float>& m = state.first_moment[k];
    std::vector<float>& v = state.second_moment[k];
    if (m.size() != t.size()) {
      Fail(ErrorCode::kDimension,
           "optimizer moments do not match parameter '" + params[k].first + "'");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(state.beta1 * m[i] + (1.0 - state.beta1) * gi);
      v[i] = static_cast<float>(state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi);
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      const double p = t[i];
      t[i] = static_cast<T>(p - lr * m_hat / (std::sqrt(v_hat) + state.epsilon) -
                            lr * wd * p);
    }
  }
}

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_OPTIM_HPP_
