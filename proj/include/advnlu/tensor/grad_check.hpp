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

#ifndef ADVNLU_TENSOR_GRAD_CHECK_HPP_
#define ADVNLU_TENSOR_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "advnlu/error.hpp"
#include "advnlu/tensor/tensor.hpp"

namespace advnlu::tensor {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Loss callback for GradCheck. When `backward` is true the callback also
// accumulates dLoss/dparam into the grad buffer of every listed tensor;
// GradCheck zeroes those buffers first.
template <typename T>
using LossFn = std::function<T(bool backward)>;

// Compares analytic gradients against central differences,
//   rel = |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
// and reports the maximum over every element of every listed tensor.
template <typename T>
GradCheckResult GradCheck(const LossFn<T>& loss, const ParamList<T>& params,
                          double eps) {
  ZeroGrads(params);
  const T base = loss(true);
  if (loss(false) != base || loss(false) != base) {
    Fail(ErrorCode::kCheck,
         "grad_check: loss is not deterministic across evaluations");
  }
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, t] : params) {
    analytic.emplace_back(t->grad().begin(), t->grad().end());
  }
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& t = *params[k].second;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const T saved = t[i];
      t[i] = static_cast<T>(saved + eps);
      const double up = loss(false);
      t[i] = static_cast<T>(saved - eps);
      const double down = loss(false);
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = params[k].first;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_GRAD_CHECK_HPP_
