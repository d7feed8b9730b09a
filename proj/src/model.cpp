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

#include "deltadit/model.hpp"

#include <cmath>

#include "deltadit/error.hpp"
#include "deltadit/rng.hpp"

namespace deltadit {

std::int64_t ModelSpec::mlp_hidden() const { return std::llround(static_cast<double>(d_model) * mlp_ratio); }

void ModelSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model spec: " + m); };
  if (image_size < 1 || channels < 1 || patch < 1) fail("image_size, channels and patch must be positive");
  if (image_size % patch != 0) fail("image_size " + std::to_string(image_size) + " not divisible by patch " + std::to_string(patch));
  if (n_blocks < 1) fail("n_blocks must be >= 1");
  if (d_model < 2 || n_heads < 1) fail("d_model must be >= 2 and n_heads >= 1");
  if (d_model % n_heads != 0) fail("d_model not divisible by n_heads");
  if (n_classes < 0) fail("n_classes must be >= 0");
  if (!(mlp_ratio > 0.0) || mlp_hidden() < 1) fail("mlp_ratio must give a positive hidden width");
}

std::vector<Tensor*> ModelWeights::parameters() {
  std::vector<Tensor*> p{&patch_w, &patch_b, &pos_embed, &time_w1, &time_b1, &time_w2, &time_b2};
  if (class_table) p.push_back(&*class_table);
  for (auto& b : blocks) {
    for (Tensor* t : {&b.ln1_gain, &b.ln1_bias, &b.qkv_w, &b.qkv_b, &b.proj_w, &b.proj_b, &b.ln2_gain, &b.ln2_bias,
                      &b.fc1_w, &b.fc1_b, &b.fc2_w, &b.fc2_b, &b.mod_w, &b.mod_b}) {
      p.push_back(t);
    }
  }
  for (Tensor* t : {&final_gain, &final_bias, &final_mod_w, &final_mod_b, &out_w, &out_b}) p.push_back(t);
  return p;
}

std::vector<const Tensor*> ModelWeights::parameters() const {
  auto mut = const_cast<ModelWeights*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<Shape> ModelWeights::parameter_shapes(const ModelSpec& s) {
  const auto d = s.d_model, hid = s.mlp_hidden(), pd = s.patch_dim();
  std::vector<Shape> shapes{{pd, d}, {d}, {s.n_tokens(), d}, {d, d}, {d}, {d, d}, {d}};
  if (s.n_classes > 0) shapes.push_back({s.n_classes, d});
  for (std::int64_t i = 0; i < s.n_blocks; ++i) {
    for (const Shape& sh : std::initializer_list<Shape>{{d}, {d}, {d, 3 * d}, {3 * d}, {d, d}, {d}, {d}, {d},
                                                         {d, hid}, {hid}, {hid, d}, {d}, {d, 4 * d}, {4 * d}}) {
      shapes.push_back(sh);
    }
  }
  for (const Shape& sh : std::initializer_list<Shape>{{d}, {d}, {d, 2 * d}, {2 * d}, {d, pd}, {pd}}) shapes.push_back(sh);
  return shapes;
}

void ModelWeights::check_shapes() const {
  spec.validate();
  if (static_cast<std::int64_t>(blocks.size()) != spec.n_blocks) {
    throw ShapeError("weights hold " + std::to_string(blocks.size()) + " blocks, spec says " + std::to_string(spec.n_blocks));
  }
  if (class_table.has_value() != (spec.n_classes > 0)) throw ShapeError("class table presence disagrees with n_classes");
  const auto params = parameters();
  const auto shapes = parameter_shapes(spec);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params[i]->shape() != shapes[i]) {
      throw ShapeError("parameter " + std::to_string(i) + " has shape " + shape_str(params[i]->shape()) + ", expected " +
                       shape_str(shapes[i]));
    }
  }
}

ModelWeights init_weights(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelWeights w;
  w.spec = spec;
  if (spec.n_classes > 0) w.class_table.emplace();
  w.blocks.resize(static_cast<std::size_t>(spec.n_blocks));
  Rng rng(seed);
  const auto params = w.parameters();
  const auto shapes = ModelWeights::parameter_shapes(spec);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (shapes[i].size() == 2) {
      *params[i] = randn(rng, shapes[i]) * kInitStd;
    } else {
      *params[i] = Tensor(shapes[i]);
    }
  }
  for (auto& b : w.blocks) {
    b.ln1_gain = Tensor::full({spec.d_model}, 1.0f);
    b.ln2_gain = Tensor::full({spec.d_model}, 1.0f);
  }
  w.final_gain = Tensor::full({spec.d_model}, 1.0f);
  return w;
}

Tensor extract_patches(const Tensor& image, const ModelSpec& spec) {
  if (image.shape() != spec.image_shape()) {
    throw ShapeError("image " + shape_str(image.shape()) + " does not match spec " + shape_str(spec.image_shape()));
  }
  const auto p = spec.patch, g = spec.grid(), hw = spec.image_size;
  Tensor out({spec.n_tokens(), spec.patch_dim()});
  for (std::int64_t i = 0; i < g; ++i)
    for (std::int64_t j = 0; j < g; ++j)
      for (std::int64_t c = 0; c < spec.channels; ++c)
        for (std::int64_t dy = 0; dy < p; ++dy)
          for (std::int64_t dx = 0; dx < p; ++dx) {
            const auto src = (c * hw + i * p + dy) * hw + j * p + dx;
            out.at(i * g + j, (c * p + dy) * p + dx) = image[static_cast<std::size_t>(src)];
          }
  return out;
}

Tensor fold_patches(const Tensor& patches, const ModelSpec& spec) {
  if (patches.shape() != Shape{spec.n_tokens(), spec.patch_dim()}) {
    throw ShapeError("patches " + shape_str(patches.shape()) + " do not match spec");
  }
  const auto p = spec.patch, g = spec.grid(), hw = spec.image_size;
  Tensor img(spec.image_shape());
  for (std::int64_t i = 0; i < g; ++i)
    for (std::int64_t j = 0; j < g; ++j)
      for (std::int64_t c = 0; c < spec.channels; ++c)
        for (std::int64_t dy = 0; dy < p; ++dy)
          for (std::int64_t dx = 0; dx < p; ++dx) {
            const auto dst = (c * hw + i * p + dy) * hw + j * p + dx;
            img[static_cast<std::size_t>(dst)] = patches.at(i * g + j, (c * p + dy) * p + dx);
          }
  return img;
}

Tensor patchify(const Tensor& image, const ModelWeights& w) {
  return linear(extract_patches(image, w.spec), w.patch_w, w.patch_b);
}

Tensor unpatchify(const Tensor& tokens, const ModelWeights& w) {
  return fold_patches(linear(tokens, w.out_w, w.out_b), w.spec);
}

Tensor timestep_features(std::int64_t t, std::int64_t dim) {
  Tensor f({dim});
  const auto half = dim / 2;
  for (std::int64_t k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    const double a = static_cast<double>(t) * freq;
    f[static_cast<std::size_t>(k)] = static_cast<float>(std::cos(a));
    f[static_cast<std::size_t>(half + k)] = static_cast<float>(std::sin(a));
  }
  return f;
}

Tensor embed_conditioning(const Conditioning& cond, const ModelWeights& w) {
  const auto d = w.spec.d_model;
  if (cond.timestep < 0) throw ConfigError("timestep must be non-negative");
  Tensor h = timestep_features(cond.timestep, d).reshaped({1, d});
  h = silu(linear(h, w.time_w1, w.time_b1));
  h = linear(h, w.time_w2, w.time_b2);
  if (w.spec.n_classes > 0 && cond.class_id) {
    const auto c = *cond.class_id;
    if (c < 0 || c >= w.spec.n_classes) {
      throw ConfigError("class_id " + std::to_string(c) + " out of range [0, " + std::to_string(w.spec.n_classes) + ")");
    }
    h += w.class_table->slice_rows(c, c + 1);
  }
  return h.reshaped({d});
}

namespace {

// Columns [offset, offset + width) of a 2-D tensor.
Tensor columns(const Tensor& a, std::int64_t offset, std::int64_t width) {
  Tensor out({a.dim(0), width});
  for (std::int64_t r = 0; r < a.dim(0); ++r)
    for (std::int64_t c = 0; c < width; ++c) out.at(r, c) = a.at(r, offset + c);
  return out;
}

// x * (1 + scale) + shift with per-feature shift/scale rows.
Tensor modulate(const Tensor& x, const Tensor& mod, std::int64_t shift_at, std::int64_t scale_at) {
  Tensor y = x;
  const auto d = x.dim(1);
  for (std::int64_t r = 0; r < x.dim(0); ++r)
    for (std::int64_t c = 0; c < d; ++c)
      y.at(r, c) = x.at(r, c) * (1.0f + mod.at(0, scale_at + c)) + mod.at(0, shift_at + c);
  return y;
}

Tensor self_attention(const Tensor& x, const BlockWeights& bw, const ModelSpec& spec) {
  const auto d = spec.d_model, hd = spec.head_dim();
  const Tensor qkv = linear(x, bw.qkv_w, bw.qkv_b);
  Tensor merged({x.dim(0), d});
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  for (std::int64_t h = 0; h < spec.n_heads; ++h) {
    const Tensor q = columns(qkv, h * hd, hd);
    const Tensor k = columns(qkv, d + h * hd, hd);
    const Tensor v = columns(qkv, 2 * d + h * hd, hd);
    const Tensor attn = softmax_rows(matmul(q, transpose(k)) * scale);
    const Tensor o = matmul(attn, v);
    for (std::int64_t r = 0; r < o.dim(0); ++r)
      for (std::int64_t c = 0; c < hd; ++c) merged.at(r, h * hd + c) = o.at(r, c);
  }
  return linear(merged, bw.proj_w, bw.proj_b);
}

}  // namespace

Tensor block_forward(const Tensor& h, const Tensor& cond_vec, const BlockWeights& bw, const ModelSpec& spec,
                     ExecStats* stats) {
  const auto d = spec.d_model;
  if (h.shape() != spec.stream_shape()) {
    throw ShapeError("block_forward: stream " + shape_str(h.shape()) + ", expected " + shape_str(spec.stream_shape()));
  }
  if (cond_vec.shape() != Shape{d}) throw ShapeError("block_forward: conditioning " + shape_str(cond_vec.shape()));
  if (stats) ++stats->block_calls;

  const Tensor mod = linear(silu(cond_vec.reshaped({1, d})), bw.mod_w, bw.mod_b);
  Tensor out = h;
  out += self_attention(modulate(layer_norm(out, bw.ln1_gain, bw.ln1_bias, kNormEps), mod, 0, d), bw, spec);
  const Tensor m = modulate(layer_norm(out, bw.ln2_gain, bw.ln2_bias, kNormEps), mod, 2 * d, 3 * d);
  out += linear(gelu(linear(m, bw.fc1_w, bw.fc1_b)), bw.fc2_w, bw.fc2_b);
  return out;
}

Tensor forward_range(const Tensor& h, std::int64_t from_block, std::int64_t to_block, const Tensor& cond_vec,
                     const ModelWeights& w, ExecStats* stats) {
  const auto nb = w.spec.n_blocks;
  if (from_block < 1 || to_block > nb || to_block < from_block - 1) {
    throw ConfigError("forward_range: invalid block range [" + std::to_string(from_block) + ", " +
                      std::to_string(to_block) + "] for " + std::to_string(nb) + " blocks");
  }
  Tensor out = h;
  for (auto b = from_block; b <= to_block; ++b) {
    out = block_forward(out, cond_vec, w.blocks[static_cast<std::size_t>(b - 1)], w.spec, stats);
  }
  return out;
}

Tensor embed_input(const Tensor& x_t, const Tensor& cond_vec, const ModelWeights& w) {
  Tensor h = patchify(x_t, w);
  h += w.pos_embed;
  const auto d = w.spec.d_model;
  for (std::int64_t r = 0; r < h.dim(0); ++r)
    for (std::int64_t c = 0; c < d; ++c) h.at(r, c) += cond_vec[static_cast<std::size_t>(c)];
  return h;
}

Tensor decode_output(const Tensor& h, const Tensor& cond_vec, const ModelWeights& w) {
  const auto d = w.spec.d_model;
  const Tensor mod = linear(silu(cond_vec.reshaped({1, d})), w.final_mod_w, w.final_mod_b);
  return unpatchify(modulate(layer_norm(h, w.final_gain, w.final_bias, kNormEps), mod, 0, d), w);
}

Tensor predict_noise(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w, ExecStats* stats) {
  const Tensor c = embed_conditioning(cond, w);
  const Tensor h = forward_range(embed_input(x_t, c, w), 1, w.spec.n_blocks, c, w, stats);
  return decode_output(h, c, w);
}

double block_macs(const ModelSpec& s) {
  const auto n = static_cast<double>(s.n_tokens());
  const auto d = static_cast<double>(s.d_model);
  const auto hid = static_cast<double>(s.mlp_hidden());
  const double modulation = d * 4.0 * d;
  const double projections = n * (3.0 * d * d + d * d + 2.0 * d * hid);
  const double attention = 2.0 * n * n * d;
  return modulation + projections + attention;
}

}  // namespace deltadit
