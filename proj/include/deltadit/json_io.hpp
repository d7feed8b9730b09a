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

#include <optional>

#include "json.hpp"

#include "deltadit/analysis.hpp"
#include "deltadit/model.hpp"
#include "deltadit/planner.hpp"
#include "deltadit/sampler.hpp"

namespace deltadit {

using json = nlohmann::json;

json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j, ModelSpec base = {});

// {interval, cached_blocks, boundary, n_blocks, steps,
//  per_step: [{step, kind, mode, region_start, region_count}], macs, speedup}.
// Full steps carry region_start = region_count = 0. macs/speedup are omitted
// without a cost model.
json to_json(const CachePlan& plan, const std::optional<CostModel>& cost = std::nullopt);
CachePlan plan_from_json(const json& j);

// wall_ms is left out unless include_timing is set, keeping report files
// reproducible byte-for-byte.
json to_json(const RunReport& report, bool include_timing = false);
json to_json(const RunComparison& cmp);
json to_json(const MetricsReport& m);

// Non-finite values serialize as null.
json finite_or_null(double v);

}  // namespace deltadit
