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

#include "deltadit/cache.hpp"

#include <algorithm>
#include <cmath>

#include "deltadit/error.hpp"

namespace deltadit {

void CacheRegion::validate(std::int64_t n_blocks) const {
  if (count < 0 || start < 1 || last() > n_blocks) {
    throw ConfigError("cache region start=" + std::to_string(start) + " count=" + std::to_string(count) +
                      " invalid for " + std::to_string(n_blocks) + " blocks");
  }
}

std::string to_string(CacheMode mode) { return mode == CacheMode::delta ? "delta" : "feature-map"; }

CacheMode parse_cache_mode(const std::string& s) {
  if (s == "delta") return CacheMode::delta;
  if (s == "feature-map" || s == "feature_map") return CacheMode::feature_map;
  throw ConfigError("unknown cache mode '" + s + "'");
}

void CacheState::check(const ModelSpec& spec) const {
  region.validate(spec.n_blocks);
  const Shape stream = spec.stream_shape();
  if (mode == CacheMode::delta) {
    if (!delta || !delta_residual) throw ConfigError("delta cache state holds no delta");
    if (cached_feature) throw ConfigError("delta cache state must not hold a feature map");
    if (delta->shape() != stream || delta_residual->shape() != stream) {
      throw ShapeError("delta shape " + shape_str(delta->shape()) + " != stream shape " + shape_str(stream));
    }
  } else {
    if (!cached_feature) throw ConfigError("feature-map cache state holds no feature map");
    if (delta || delta_residual) throw ConfigError("feature-map cache state must not hold a delta");
    if (region.start != 1) throw ConfigError("feature-map cache only supports front regions (start = 1)");
    if (cached_feature->shape() != stream) throw ShapeError("cached feature shape mismatch");
  }
}

namespace {

// Exact a - b split as hi + lo with hi = fl(a - b) (Knuth two-sum).
void split_difference(const Tensor& out, const Tensor& in, Tensor& hi, Tensor& lo) {
  hi = Tensor(out.shape());
  lo = Tensor(out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float a = out[i];
    const float b = -in[i];
    const float s = a + b;
    const float bv = s - a;
    const float av = s - bv;
    hi[i] = s;
    lo[i] = (a - av) + (b - bv);
  }
}

CacheState capture_state(const Tensor& region_in, const Tensor& region_out, const CacheRegion& region,
                         CacheMode mode, std::int64_t t) {
  CacheState st;
  st.region = region;
  st.mode = mode;
  st.captured_at = t;
  if (mode == CacheMode::delta) {
    Tensor hi, lo;
    split_difference(region_out, region_in, hi, lo);
    st.delta = std::move(hi);
    st.delta_residual = std::move(lo);
  } else {
    st.cached_feature = region_out;
  }
  return st;
}

}  // namespace

MultiCaptureResult run_full_capture(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                                    std::span<const CaptureRequest> requests, ExecStats* stats) {
  const auto nb = w.spec.n_blocks;
  for (const auto& [r, mode] : requests) {
    r.validate(nb);
    if (mode == CacheMode::feature_map && r.start != 1) {
      throw ConfigError("feature-map cache only supports front regions (start = 1)");
    }
  }
  const Tensor c = embed_conditioning(cond, w);
  Tensor h = embed_input(x_t, c, w);

  // inputs[b] is the stream entering 1-based block b + 1; inputs[nb] is the final stream.
  std::vector<Tensor> inputs;
  inputs.reserve(static_cast<std::size_t>(nb + 1));
  inputs.push_back(h);
  for (std::int64_t b = 1; b <= nb; ++b) {
    h = block_forward(h, c, w.blocks[static_cast<std::size_t>(b - 1)], w.spec, stats);
    inputs.push_back(h);
  }

  MultiCaptureResult res{decode_output(h, c, w), {}};
  for (const auto& [r, mode] : requests) {
    const auto& in = inputs[static_cast<std::size_t>(r.start - 1)];
    const auto& out = inputs[static_cast<std::size_t>(r.last())];
    res.states.push_back(capture_state(in, out, r, mode, cond.timestep));
  }
  return res;
}

CaptureResult run_full_capture(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                               const CacheRegion& region, CacheMode mode, ExecStats* stats) {
  const CaptureRequest req{region, mode};
  auto multi = run_full_capture(x_t, cond, w, std::span<const CaptureRequest>(&req, 1), stats);
  return {std::move(multi.eps), std::move(multi.states.front())};
}

Tensor apply_delta(const Tensor& region_input, const CacheState& state) {
  if (!state.delta || !state.delta_residual) throw ConfigError("apply_delta: state holds no delta");
  check_same_shape(region_input, *state.delta, "apply_delta");
  Tensor out(region_input.shape());
  const auto& hi = *state.delta;
  const auto& lo = *state.delta_residual;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = static_cast<double>(region_input[i]) + static_cast<double>(hi[i]) + static_cast<double>(lo[i]);
    out[i] = static_cast<float>(v);
  }
  return out;
}

Tensor run_with_delta(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w, const CacheState& state,
                      ExecStats* stats) {
  if (state.mode != CacheMode::delta) throw ConfigError("run_with_delta: state is not a delta cache");
  state.check(w.spec);
  const auto nb = w.spec.n_blocks;
  const auto& r = state.region;
  const Tensor c = embed_conditioning(cond, w);
  Tensor h = embed_input(x_t, c, w);
  h = forward_range(h, 1, r.start - 1, c, w, stats);
  if (!r.empty()) h = apply_delta(h, state);
  h = forward_range(h, r.last() + 1, nb, c, w, stats);
  return decode_output(h, c, w);
}

Tensor run_with_feature_map_cache(const Tensor& x_t, const Conditioning& cond, const ModelWeights& w,
                                  const CacheState& state, ExecStats* stats) {
  if (state.mode != CacheMode::feature_map) throw ConfigError("run_with_feature_map_cache: state is not a feature-map cache");
  state.check(w.spec);
  const auto nb = w.spec.n_blocks;
  const auto& r = state.region;
  if (r.empty()) return predict_noise(x_t, cond, w, stats);
  if (x_t.shape() != w.spec.image_shape()) throw ShapeError("x_t " + shape_str(x_t.shape()) + " does not match spec");
  const Tensor c = embed_conditioning(cond, w);
  const Tensor h = forward_range(*state.cached_feature, r.last() + 1, nb, c, w, stats);
  return decode_output(h, c, w);
}

}  // namespace deltadit
