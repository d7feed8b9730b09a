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

#include "deltadit/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "deltadit/error.hpp"

namespace deltadit {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) {
    if (e <= 0) throw ShapeError("non-positive extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::identity(std::int64_t n) {
  Tensor t({n, n});
  for (std::int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0f;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  const auto m = static_cast<std::int64_t>(rows.size());
  const auto n = static_cast<std::int64_t>(rows.begin()->size());
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(m * n));
  for (const auto& r : rows) {
    if (static_cast<std::int64_t>(r.size()) != n) throw ShapeError("ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({m, n}, std::move(data));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != static_cast<std::int64_t>(data_.size())) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice_rows(std::int64_t begin, std::int64_t end) const {
  if (shape_.empty() || begin < 0 || end > shape_[0] || begin >= end) {
    throw ShapeError("bad row slice of " + shape_str(shape_));
  }
  const auto stride = static_cast<std::int64_t>(data_.size()) / shape_[0];
  Shape s = shape_;
  s[0] = end - begin;
  return Tensor(std::move(s),
                std::vector<float>(data_.begin() + begin * stride, data_.begin() + end * stride));
}

Tensor& Tensor::operator+=(const Tensor& other) {
  check_same_shape(*this, other, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  check_same_shape(*this, other, "sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(float s) {
  for (auto& v : data_) v *= s;
  return *this;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (shape_ != other.shape_) return false;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(data_[i]) != std::bit_cast<std::uint32_t>(other.data_[i])) return false;
  }
  return true;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Tensor a, float s) { return a *= s; }

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* po = out.data().data();
  std::vector<double> acc(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const float* brow = pb + p * n;
      for (std::int64_t j = 0; j < n; ++j) acc[j] += av * static_cast<double>(brow[j]);
    }
    for (std::int64_t j = 0; j < n; ++j) po[i * n + j] = static_cast<float>(acc[j]);
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Tensor y = matmul(x, weight);
  if (bias.rank() != 1 || bias.dim(0) != y.dim(1)) {
    throw ShapeError("linear: bias " + shape_str(bias.shape()) + " vs output " + shape_str(y.shape()));
  }
  const auto n = y.dim(1);
  for (std::int64_t i = 0; i < y.dim(0); ++i) {
    for (std::int64_t j = 0; j < n; ++j) y.at(i, j) += bias[static_cast<std::size_t>(j)];
  }
  return y;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_str(a.shape()));
  Tensor t({a.dim(1), a.dim(0)});
  for (std::int64_t i = 0; i < a.dim(0); ++i)
    for (std::int64_t j = 0; j < a.dim(1); ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps) {
  if (x.rank() == 0) throw ShapeError("layer_norm: empty shape");
  const auto d = x.shape().back();
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw ShapeError("layer_norm: affine params do not match last extent of " + shape_str(x.shape()));
  }
  if (!(eps > 0.0f)) throw ConfigError("layer_norm: eps must be positive");
  Tensor y(x.shape());
  const auto rows = static_cast<std::int64_t>(x.size()) / d;
  const float* px = x.data().data();
  float* py = y.data().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = px + r * d;
    double mean = 0.0;
    for (std::int64_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    for (std::int64_t j = 0; j < d; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      py[r * d + j] = static_cast<float>((row[j] - mean) * inv * gain[jj] + bias[jj]);
    }
  }
  return y;
}

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() == 0) throw ShapeError("softmax_rows: empty shape");
  const auto d = x.shape().back();
  const auto rows = static_cast<std::int64_t>(x.size()) / d;
  Tensor y(x.shape());
  const float* px = x.data().data();
  float* py = y.data().data();
  std::vector<double> e(static_cast<std::size_t>(d));
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = px + r * d;
    const float mx = *std::max_element(row, row + d);
    double sum = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      e[j] = std::exp(static_cast<double>(row[j]) - mx);
      sum += e[j];
    }
    for (std::int64_t j = 0; j < d; ++j) py[r * d + j] = static_cast<float>(e[j] / sum);
  }
  return y;
}

Tensor gelu(const Tensor& x) {
  constexpr double kSqrt2OverPi = 0.7978845608028654;
  constexpr double kCubic = 0.044715;
  Tensor y = x;
  for (auto& v : y.data()) {
    const double u = v;
    v = static_cast<float>(0.5 * u * (1.0 + std::tanh(kSqrt2OverPi * (u + kCubic * u * u * u))));
  }
  return y;
}

Tensor silu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) {
    const double u = v;
    v = static_cast<float>(u / (1.0 + std::exp(-u)));
  }
  return y;
}

double l2_norm(const Tensor& a) {
  double s = 0.0;
  for (float v : a.data()) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

double l2_distance(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

std::uint64_t fingerprint(const Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (auto e : t.shape()) mix(static_cast<std::uint64_t>(e), 8);
  for (float v : t.data()) mix(std::bit_cast<std::uint32_t>(v), 4);
  return h;
}

}  // namespace deltadit
