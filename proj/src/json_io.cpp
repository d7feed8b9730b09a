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

#include "deltadit/json_io.hpp"

#include <cmath>

#include "deltadit/error.hpp"

namespace deltadit {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const ModelSpec& s) {
  return {{"image_size", s.image_size}, {"channels", s.channels}, {"patch", s.patch},
          {"n_blocks", s.n_blocks},     {"d_model", s.d_model},   {"n_heads", s.n_heads},
          {"n_classes", s.n_classes},   {"mlp_ratio", s.mlp_ratio}};
}

ModelSpec model_spec_from_json(const json& j, ModelSpec s) {
  if (!j.is_object()) throw ConfigError("model spec must be a JSON object");
  s.image_size = j.value("image_size", s.image_size);
  s.channels = j.value("channels", s.channels);
  s.patch = j.value("patch", s.patch);
  s.n_blocks = j.value("n_blocks", s.n_blocks);
  s.d_model = j.value("d_model", s.d_model);
  s.n_heads = j.value("n_heads", s.n_heads);
  s.n_classes = j.value("n_classes", s.n_classes);
  s.mlp_ratio = j.value("mlp_ratio", s.mlp_ratio);
  s.validate();
  return s;
}

json to_json(const CachePlan& plan, const std::optional<CostModel>& cost) {
  json steps = json::array();
  for (std::int64_t s = 1; s <= plan.steps(); ++s) {
    const auto& d = plan.per_step[static_cast<std::size_t>(s - 1)];
    const bool cached = d.kind == StepKind::cached;
    steps.push_back({{"step", s},
                     {"kind", cached ? "cached" : "full"},
                     {"mode", cached ? json(to_string(d.mode)) : json(nullptr)},
                     {"region_start", cached ? d.region.start : 0},
                     {"region_count", cached ? d.region.count : 0}});
  }
  json j = {{"interval", plan.interval},   {"cached_blocks", plan.cached_blocks}, {"boundary", plan.boundary},
            {"n_blocks", plan.n_blocks},   {"steps", plan.steps()},               {"planned_blocks", plan.planned_blocks()},
            {"per_step", std::move(steps)}};
  if (cost) {
    const auto pc = plan_macs(plan, *cost);
    j["macs"] = pc.macs;
    j["speedup"] = pc.speedup;
    j["full_macs"] = cost->full_macs();
    j["mac_per_block"] = cost->mac_per_block;
  }
  return j;
}

CachePlan plan_from_json(const json& j) {
  try {
    CachePlan plan;
    plan.interval = j.at("interval").get<std::int64_t>();
    plan.boundary = j.value("boundary", std::int64_t{0});
    plan.n_blocks = j.at("n_blocks").get<std::int64_t>();
    plan.cached_blocks = j.value("cached_blocks", std::int64_t{0});
    for (const auto& s : j.at("per_step")) {
      StepDirective d;
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "cached") {
        d.kind = StepKind::cached;
        d.region = {s.at("region_start").get<std::int64_t>(), s.at("region_count").get<std::int64_t>()};
        if (s.contains("mode") && !s["mode"].is_null()) d.mode = parse_cache_mode(s["mode"].get<std::string>());
      } else if (kind != "full") {
        throw ConfigError("unknown step kind '" + kind + "'");
      }
      plan.per_step.push_back(d);
    }
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed plan JSON: ") + e.what());
  }
}

json to_json(const RunReport& r, bool include_timing) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json e = {{"step", s.step},
              {"t", s.t},
              {"model_timestep", s.model_timestep},
              {"kind", s.kind == StepKind::cached ? "cached" : "full"},
              {"blocks", s.blocks}};
    if (s.kind == StepKind::cached) {
      e["mode"] = to_string(s.mode);
      e["region_start"] = s.region.start;
      e["region_count"] = s.region.count;
    }
    if (s.deviation) e["deviation"] = *s.deviation;
    steps.push_back(std::move(e));
  }
  json j = {{"seed", r.seed},
            {"solver", to_string(r.solver)},
            {"total_blocks", r.total_blocks},
            {"planned_blocks", r.planned_blocks},
            {"mac_per_block", r.mac_per_block},
            {"realized_macs", r.realized_macs},
            {"full_macs", r.full_macs},
            {"speedup", r.realized_macs > 0.0 ? r.full_macs / r.realized_macs : 1.0},
            {"image_fingerprint", r.image_fingerprint},
            {"steps", std::move(steps)}};
  if (include_timing) j["wall_ms"] = r.wall_ms;
  return j;
}

json to_json(const RunComparison& c) {
  return {{"l2", c.l2},
          {"mse", c.mse},
          {"psnr", finite_or_null(c.psnr)},
          {"identical", c.mse == 0.0 && c.l2 == 0.0},
          {"avg_gradient_a", c.avg_gradient_a},
          {"avg_gradient_b", c.avg_gradient_b},
          {"high_freq_error", finite_or_null(c.high_freq_error)}};
}

json to_json(const MetricsReport& m) {
  json j = {{"avg_gradient", m.avg_gradient}};
  if (m.high_freq_error) j["high_freq_error"] = finite_or_null(*m.high_freq_error);
  if (m.macs) j["macs"] = *m.macs;
  if (!m.deviations.empty()) j["deviations"] = m.deviations;
  return j;
}

}  // namespace deltadit
