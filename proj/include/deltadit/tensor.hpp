/* Copyright 2026 The Delta-DiT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace deltadit {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major float32 array. Value semantics; copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, float v) { return Tensor(std::move(shape), v); }
  static Tensor identity(std::int64_t n);
  // Rows of a 2-D tensor, e.g. from_rows({{1, 2}, {3, 4}}).
  static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::int64_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& vec() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * shape_.back() + c)]; }
  float at(std::int64_t r, std::int64_t c) const {
    return data_[static_cast<std::size_t>(r * shape_.back() + c)];
  }

  Tensor reshaped(Shape shape) const;
  // Contiguous slice [begin, end) along the leading axis.
  Tensor slice_rows(std::int64_t begin, std::int64_t end) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(float s);

  bool all_finite() const;
  // Bitwise equality of shapes and payloads (distinguishes -0.0 from 0.0).
  bool bit_equal(const Tensor& other) const;

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_ && a.data_ == b.data_; }

 private:
  Shape shape_;
  std::vector<float> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, float s);

void check_same_shape(const Tensor& a, const Tensor& b, const char* what);

// [m x k] * [k x n]. Each output element accumulates in double, k ascending.
Tensor matmul(const Tensor& a, const Tensor& b);
// matmul followed by a row-broadcast bias of length n.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor transpose(const Tensor& a);

// Normalizes over the last axis; statistics computed in double.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps);
Tensor softmax_rows(const Tensor& x);

// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
Tensor silu(const Tensor& x);

double l2_norm(const Tensor& a);
double l2_distance(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

// FNV-1a over the raw float bits; used for golden snapshots.
std::uint64_t fingerprint(const Tensor& t);

}  // namespace deltadit
