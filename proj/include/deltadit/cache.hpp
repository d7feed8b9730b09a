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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deltadit/model.hpp"
#include "deltadit/tensor.hpp"

namespace deltadit {

// Contiguous run of cached blocks, 1-based: blocks start .. start + count - 1.
struct CacheRegion {
  std::int64_t start = 1;
  std::int64_t count = 0;

  std::int64_t last() const { return start + count - 1; }
  bool empty() const { return count == 0; }
  // Throws ConfigError unless 1 <= start and last() <= n_blocks, count >= 0.
  void validate(std::int64_t n_blocks) const;

  static CacheRegion front(std::int64_t count) { return {1, count}; }
  static CacheRegion back(std::int64_t n_blocks, std::int64_t count) { return {n_blocks - count + 1, count}; }
  // Centered, leaning toward the front when the slack is odd.
  static CacheRegion middle(std::int64_t n_blocks, std::int64_t count) { return {(n_blocks - count) / 2 + 1, count}; }

  bool operator==(const CacheRegion&) const = default;
};

enum class CacheMode { delta, feature_map };

std::string to_string(CacheMode mode);
CacheMode parse_cache_mode(const std::string& s);

// Payload captured at a full step.
//
// Delta mode keeps the offset between the stream leaving block last() and the
// stream entering block start. `delta` is that difference rounded to float;
// `delta_residual` is the rounding error, so delta + delta_residual equals the
// exact difference of the two float streams. Replaying both terms reproduces
// the captured output stream bit-for-bit.
//
// Feature-map mode keeps the raw stream leaving block last() instead.
struct CacheState {
  CacheRegion region;
  CacheMode mode = CacheMode::delta;
  std::int64_t captured_at = 0;
  std::optional<Tensor> delta;
  std::optional<Tensor> delta_residual;
  std::optional<Tensor> cached_feature;

  // Throws unless the payload matches the mode and the stream shape.
  void check(const ModelSpec& spec) const;
};

struct CaptureResult {
  Tensor eps;
  CacheState state;
};

struct MultiCaptureResult {
  Tensor eps;
  std::vector<CacheState> states;
};

// A full noise prediction that also records the cache payload for `region`.
// The prediction equals predict_noise bit-for-bit.
CaptureResult run_full_capture(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                               const CacheRegion& region, CacheMode mode = CacheMode::delta,
                               ExecStats* stats = nullptr);

struct CaptureRequest {
  CacheRegion region;
  CacheMode mode = CacheMode::delta;
};

// Same, observing several regions during one pass.
MultiCaptureResult run_full_capture(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                                    std::span<const CaptureRequest> requests, ExecStats* stats = nullptr);

// region_input + delta + delta_residual, summed in double and rounded once.
Tensor apply_delta(const Tensor& region_input, const CacheState& state);

// Blocks 1..start-1, then the cached offset in place of the region, then the
// remaining blocks; N_b - count block evaluations.
Tensor run_with_delta(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w, const CacheState& state,
                      ExecStats* stats = nullptr);

// Feature-map baseline: the stream after block count is the cached tensor
// verbatim, so x_t does not reach the output. Front regions only.
Tensor run_with_feature_map_cache(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                                  const CacheState& state, ExecStats* stats = nullptr);

}  // namespace deltadit
