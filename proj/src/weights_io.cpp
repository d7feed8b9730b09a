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

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <iterator>

#include "deltadit/error.hpp"
#include "deltadit/model.hpp"

namespace deltadit {

namespace {

constexpr std::array<char, 4> kWeightMagic{'D', 'D', 'I', 'T'};
constexpr std::array<char, 4> kTensorMagic{'D', 'D', 'T', 'N'};
constexpr std::uint32_t kTensorFormatVersion = 1;

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void magic(const std::array<char, 4>& m) { buf_.insert(buf_.end(), m.begin(), m.end()); }
  void tensor(const Tensor& t) {
    for (float v : t.data()) f32(v);
  }
  void flush(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw FormatError("write failed: " + path.string());
  }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void magic(const std::array<char, 4>& m) {
    need(4);
    if (!std::equal(m.begin(), m.end(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_))) {
      throw FormatError(path_ + ": bad magic");
    }
    pos_ += 4;
  }
  Tensor tensor(const Shape& shape) {
    need(4 * static_cast<std::size_t>(shape_numel(shape)));
    Tensor t(shape);
    for (auto& v : t.data()) v = f32();
    return t;
  }
  void expect_end() const {
    if (pos_ != buf_.size()) throw FormatError(path_ + ": " + std::to_string(buf_.size() - pos_) + " trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw FormatError(path_ + ": truncated file");
  }
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

std::uint32_t to_u32(std::int64_t v) { return static_cast<std::uint32_t>(v); }

}  // namespace

void save_weights(const ModelWeights& w, const std::filesystem::path& path) {
  w.check_shapes();
  ByteWriter out;
  out.magic(kWeightMagic);
  out.u32(kWeightFormatVersion);
  const auto& s = w.spec;
  for (auto v : {s.image_size, s.channels, s.patch, s.n_blocks, s.d_model, s.n_heads, s.n_classes, s.mlp_hidden()}) {
    out.u32(to_u32(v));
  }
  for (const Tensor* t : w.parameters()) out.tensor(*t);
  out.flush(path);
}

ModelWeights load_weights(const std::filesystem::path& path) {
  ByteReader in(path);
  in.magic(kWeightMagic);
  const auto version = in.u32();
  if (version != kWeightFormatVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  ModelSpec s;
  s.image_size = in.u32();
  s.channels = in.u32();
  s.patch = in.u32();
  s.n_blocks = in.u32();
  s.d_model = in.u32();
  s.n_heads = in.u32();
  s.n_classes = in.u32();
  const auto hidden = in.u32();
  if (s.d_model == 0) throw FormatError(path.string() + ": zero d_model");
  s.mlp_ratio = static_cast<double>(hidden) / static_cast<double>(s.d_model);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (s.mlp_hidden() != hidden) throw FormatError(path.string() + ": inconsistent mlp width");

  ModelWeights w;
  w.spec = s;
  if (s.n_classes > 0) w.class_table.emplace();
  w.blocks.resize(static_cast<std::size_t>(s.n_blocks));
  const auto params = w.parameters();
  const auto shapes = ModelWeights::parameter_shapes(s);
  for (std::size_t i = 0; i < shapes.size(); ++i) *params[i] = in.tensor(shapes[i]);
  in.expect_end();
  return w;
}

ModelWeights load_weights(const std::filesystem::path& path, const ModelSpec& expected) {
  ModelWeights w = load_weights(path);
  if (w.spec.image_size != expected.image_size || w.spec.channels != expected.channels ||
      w.spec.patch != expected.patch || w.spec.n_blocks != expected.n_blocks || w.spec.d_model != expected.d_model ||
      w.spec.n_heads != expected.n_heads || w.spec.n_classes != expected.n_classes ||
      w.spec.mlp_hidden() != expected.mlp_hidden()) {
    throw ShapeError(path.string() + ": stored model spec does not match the expected spec");
  }
  return w;
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
  ByteWriter out;
  out.magic(kTensorMagic);
  out.u32(kTensorFormatVersion);
  out.u32(to_u32(static_cast<std::int64_t>(t.rank())));
  for (auto e : t.shape()) out.u32(to_u32(e));
  out.tensor(t);
  out.flush(path);
}

Tensor load_tensor(const std::filesystem::path& path) {
  ByteReader in(path);
  in.magic(kTensorMagic);
  if (in.u32() != kTensorFormatVersion) throw FormatError(path.string() + ": unsupported tensor version");
  const auto rank = in.u32();
  if (rank == 0 || rank > 8) throw FormatError(path.string() + ": bad rank");
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto e = in.u32();
    if (e == 0) throw FormatError(path.string() + ": zero extent");
    shape.push_back(e);
  }
  Tensor t = in.tensor(shape);
  in.expect_end();
  return t;
}

}  // namespace deltadit
