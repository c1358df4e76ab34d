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

#ifndef ADVNLU_TENSOR_TENSOR_HPP_
#define ADVNLU_TENSOR_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advnlu/error.hpp"

namespace advnlu::tensor {

using Shape = std::vector<std::size_t>;

inline std::size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

inline std::string ShapeString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major array with an optional gradient buffer of the same shape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(NumElements(shape_), fill) {
    ValidateShape();
  }

  Tensor(Shape shape, std::vector<T> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    ValidateShape();
    if (data_.size() != NumElements(shape_)) {
      Fail(ErrorCode::kDimension,
           "tensor data length " + std::to_string(data_.size()) +
               " does not match shape " + ShapeString(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Leading and trailing extents when the tensor is viewed as a matrix.
  std::size_t rows() const { return rank() <= 1 ? 1 : shape_[0]; }
  std::size_t cols() const { return rank() == 0 ? 1 : shape_.back(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  std::span<T> row(std::size_t r) {
    return std::span<T>(data_).subspan(r * cols(), cols());
  }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  bool has_grad() const { return !grad_.empty(); }
  void EnableGrad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
  }
  void ZeroGrad() { std::fill(grad_.begin(), grad_.end(), T(0)); }
  void DropGrad() { grad_.clear(); }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }
  std::span<T> grad_row(std::size_t r) {
    return std::span<T>(grad_).subspan(r * cols(), cols());
  }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  Tensor<U> Cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

 private:
  void ValidateShape() const {
    for (std::size_t d : shape_) {
      if (d == 0) {
        Fail(ErrorCode::kDimension,
             "tensor shape " + ShapeString(shape_) + " has a zero extent");
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
  std::vector<T> grad_;
};

// Named, non-owning view over a model's trainable tensors. The order is
// stable for a given architecture; optimizer state and checkpoints rely on it.
template <typename T>
using ParamList = std::vector<std::pair<std::string, Tensor<T>*>>;

template <typename T>
void ZeroGrads(const ParamList<T>& params) {
  for (auto& [name, t] : params) {
    t->EnableGrad();
    t->ZeroGrad();
  }
}

// Copies values between two structurally identical parameter lists.
template <typename From, typename To>
void CopyParams(const ParamList<From>& from, const ParamList<To>& to) {
  if (from.size() != to.size()) {
    Fail(ErrorCode::kDimension, "parameter lists differ in length");
  }
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Tensor<From>& src = *from[i].second;
    Tensor<To>& dst = *to[i].second;
    if (src.shape() != dst.shape() || from[i].first != to[i].first) {
      Fail(ErrorCode::kDimension,
           "parameter '" + from[i].first + "' " + ShapeString(src.shape()) +
               " cannot be copied onto '" + to[i].first + "' " +
               ShapeString(dst.shape()));
    }
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = static_cast<To>(src[j]);
    }
  }
}

}  // namespace advnlu::tensor

#endif  // ADVNLU_TENSOR_TENSOR_HPP_
