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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deltadit/tensor.hpp"

namespace deltadit {

// Architecture of an isotropic diffusion transformer.
struct ModelSpec {
  std::int64_t image_size = 8;
  std::int64_t channels = 1;
  std::int64_t patch = 2;
  std::int64_t n_blocks = 4;
  std::int64_t d_model = 32;
  std::int64_t n_heads = 4;
  std::int64_t n_classes = 0;  // 0 = unconditional
  double mlp_ratio = 4.0;

  std::int64_t grid() const { return image_size / patch; }
  std::int64_t n_tokens() const { return grid() * grid(); }
  std::int64_t patch_dim() const { return channels * patch * patch; }
  std::int64_t head_dim() const { return d_model / n_heads; }
  std::int64_t mlp_hidden() const;
  Shape image_shape() const { return {channels, image_size, image_size}; }
  Shape stream_shape() const { return {n_tokens(), d_model}; }

  // Throws ConfigError when an invariant fails.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

struct BlockWeights {
  Tensor ln1_gain, ln1_bias;
  Tensor qkv_w, qkv_b;    // [d, 3d], [3d]
  Tensor proj_w, proj_b;  // [d, d], [d]
  Tensor ln2_gain, ln2_bias;
  Tensor fc1_w, fc1_b;    // [d, hidden], [hidden]
  Tensor fc2_w, fc2_b;    // [hidden, d], [d]
  Tensor mod_w, mod_b;    // [d, 4d], [4d]: shift1, scale1, shift2, scale2
};

struct ModelWeights {
  ModelSpec spec;
  Tensor patch_w, patch_b;  // [patch_dim, d], [d]
  Tensor pos_embed;         // [n_tokens, d]
  Tensor time_w1, time_b1;  // [d, d], [d]
  Tensor time_w2, time_b2;  // [d, d], [d]
  std::optional<Tensor> class_table;  // [n_classes, d] when conditional
  std::vector<BlockWeights> blocks;
  Tensor final_gain, final_bias;
  Tensor final_mod_w, final_mod_b;  // [d, 2d], [2d]: shift, scale
  Tensor out_w, out_b;              // [d, patch_dim], [patch_dim]

  // Every parameter in serialization order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  // Expected shapes, same order as parameters(); a pure function of the spec.
  static std::vector<Shape> parameter_shapes(const ModelSpec& spec);
  // Throws ShapeError when any parameter deviates from parameter_shapes().
  void check_shapes() const;
};

struct Conditioning {
  std::int64_t timestep = 0;
  std::optional<std::int64_t> class_id;
};

// Counts block evaluations; attach to a forward call to audit compute.
struct ExecStats {
  std::uint64_t block_calls = 0;
};

// Normal(0, 0.02) for every projection and embedding, ones for norm gains,
// zeros for biases. Deterministic per seed.
ModelWeights init_weights(const ModelSpec& spec, std::uint64_t seed);

inline constexpr float kInitStd = 0.02f;
inline constexpr float kNormEps = 1e-6f;

// Weight file: "DDIT", u32 version, eight u32 spec fields (image_size,
// channels, patch, n_blocks, d_model, n_heads, n_classes, mlp_hidden), then
// every tensor of parameters() as little-endian float32, no padding.
inline constexpr std::uint32_t kWeightFormatVersion = 1;
void save_weights(const ModelWeights& w, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);
// Also rejects a file whose spec differs from `expected`.
ModelWeights load_weights(const std::filesystem::path& path, const ModelSpec& expected);

// Standalone tensor dump: "DDTN", u32 version, u32 rank, u32 extents, then
// float32 data, little-endian throughout.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

// [c x H x W] -> [n_tokens x patch_dim]; token (i, j) is patch row i, column j,
// its vector ordered channel, then row within the patch, then column.
Tensor extract_patches(const Tensor& image, const ModelSpec& spec);
// Exact inverse of extract_patches.
Tensor fold_patches(const Tensor& patches, const ModelSpec& spec);

// Patch embedding: extract_patches * patch_w + patch_b.
Tensor patchify(const Tensor& image, const ModelWeights& w);
// Output projection back to image space (no final norm).
Tensor unpatchify(const Tensor& tokens, const ModelWeights& w);

// Sinusoidal timestep features through a two-layer SiLU MLP, plus the class
// row when the model is conditional. Class ids are ignored by unconditional
// models.
Tensor embed_conditioning(const Conditioning& cond, const ModelWeights& w);
// Frequency features only, [d_model]: cos half then sin half.
Tensor timestep_features(std::int64_t t, std::int64_t dim);

// One transformer block; output has the input's shape.
Tensor block_forward(const Tensor& h, const Tensor& cond_vec, const BlockWeights& bw, const ModelSpec& spec,
                     ExecStats* stats = nullptr);

// Blocks from_block..to_block, 1-based inclusive. An empty range
// (to_block == from_block - 1) returns h unchanged.
Tensor forward_range(const Tensor& h, std::int64_t from_block, std::int64_t to_block, const Tensor& cond_vec,
                     const ModelWeights& w, ExecStats* stats = nullptr);

// Token stream entering block 1: patch embedding + position + conditioning.
Tensor embed_input(const Tensor& x_t, const Tensor& cond_vec, const ModelWeights& w);
// Final modulated norm, output projection and unpatchify.
Tensor decode_output(const Tensor& h, const Tensor& cond_vec, const ModelWeights& w);

// Full noise prediction: embed_input -> blocks 1..N_b -> decode_output.
Tensor predict_noise(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w, ExecStats* stats = nullptr);

// Multiply-accumulate count of one block at this spec.
double block_macs(const ModelSpec& spec);

}  // namespace deltadit
