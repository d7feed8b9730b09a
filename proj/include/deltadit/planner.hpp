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
#include <string>
#include <vector>

#include "deltadit/cache.hpp"

namespace deltadit {

// Compute accounting inputs. MAC values may be in any consistent unit
// (e.g. 1e12 MACs).
struct CostModel {
  double mac_per_block = 0.0;  // M_b
  std::int64_t n_blocks = 0;   // N_b
  std::int64_t steps = 0;      // T
  double budget = 0.0;         // M_g

  double full_macs() const { return static_cast<double>(steps * n_blocks) * mac_per_block; }
  // Throws ConfigError unless M_b > 0, 0 < M_g <= T N_b M_b, T >= 1, N_b >= 1.
  void validate() const;

  // Cost model whose per-block cost is full_cost / (T N_b).
  static CostModel from_full_cost(double full_cost, std::int64_t n_blocks, std::int64_t steps, double budget);
};

enum class StepKind { full, cached };

struct StepDirective {
  StepKind kind = StepKind::full;
  CacheRegion region;  // meaningful for cached steps
  CacheMode mode = CacheMode::delta;

  bool operator==(const StepDirective&) const = default;
};

// Which end of sampling gets the front-region cache.
//  narrative: the last b sampling steps cache the front blocks, earlier cached
//             steps cache the back blocks (back early, front late).
//  literal:   the last b sampling steps cache the back blocks, earlier ones
//             the front blocks.
enum class BoundaryDirection { narrative, literal };

std::string to_string(BoundaryDirection d);
BoundaryDirection parse_boundary_direction(const std::string& s);

// Per-step schedule, index 0 is sampling step 1 (the noisiest).
struct CachePlan {
  std::int64_t interval = 1;   // N
  std::int64_t boundary = 0;   // b
  std::int64_t n_blocks = 0;   // N_b
  std::int64_t cached_blocks = 0;  // N_c
  std::vector<StepDirective> per_step;

  std::int64_t steps() const { return static_cast<std::int64_t>(per_step.size()); }
  // Blocks evaluated over the whole run.
  std::int64_t planned_blocks() const;
  // Throws ConfigError if a structural invariant is broken.
  void validate() const;
};

struct PlanCost {
  double macs = 0.0;
  double speedup = 1.0;
};

// N = ceil(T N_b M_b / M_g).
std::int64_t compute_interval(const CostModel& cost);

// Number of blocks cached at every cached step for interval N: the
// per-cached-step computed block count from the budget, rounded to nearest,
// subtracted from N_b. Throws ConfigError if the result leaves [0, N_b].
std::int64_t compute_cached_blocks(const CostModel& cost, std::int64_t interval);

// Blocks spent by a plan of this shape: floor(T/N) groups of one full pass and
// N-1 passes of N_b - N_c blocks, plus T mod N trailing full passes.
std::int64_t grouped_block_count(std::int64_t steps, std::int64_t interval, std::int64_t n_blocks,
                                 std::int64_t cached_blocks);

// Layout shared by every plan builder: groups of N steps whose first member is
// Full, trailing T mod N steps Full. `region_for_step` picks the region of
// each cached step (1-based step index).
template <typename RegionFn>
CachePlan layout_plan(std::int64_t steps, std::int64_t interval, std::int64_t n_blocks, std::int64_t cached_blocks,
                      CacheMode mode, RegionFn region_for_step);

// Stage-adaptive Delta-DiT plan: back region during the outline stage, front
// region during the final b steps (narrative direction).
CachePlan assign_regions(std::int64_t steps, std::int64_t interval, std::int64_t cached_blocks, std::int64_t boundary,
                         std::int64_t n_blocks, BoundaryDirection direction = BoundaryDirection::narrative);

// Same region at every cached step.
CachePlan uniform_plan(std::int64_t steps, std::int64_t interval, const CacheRegion& region, std::int64_t n_blocks,
                       CacheMode mode = CacheMode::delta);

CachePlan full_plan(std::int64_t steps, std::int64_t n_blocks);

PlanCost plan_macs(const CachePlan& plan, const CostModel& cost);

struct BaselinePlan {
  CachePlan plan;
  double macs = 0.0;
};

// Feature-map baseline: cached steps skip blocks 1..cache_until. 0 disables it.
BaselinePlan plan_feature_map_baseline(std::int64_t steps, std::int64_t interval, std::int64_t cache_until,
                                       const CostModel& cost);

// ---------------------------------------------------------------------------

template <typename RegionFn>
CachePlan layout_plan(std::int64_t steps, std::int64_t interval, std::int64_t n_blocks, std::int64_t cached_blocks,
                      CacheMode mode, RegionFn region_for_step) {
  CachePlan plan;
  plan.interval = interval;
  plan.n_blocks = n_blocks;
  plan.cached_blocks = cached_blocks;
  plan.per_step.resize(static_cast<std::size_t>(steps));
  const auto grouped = (steps / interval) * interval;
  for (std::int64_t s = 1; s <= steps; ++s) {
    auto& d = plan.per_step[static_cast<std::size_t>(s - 1)];
    const bool group_head = (s - 1) % interval == 0;
    if (s > grouped || group_head) continue;
    d.kind = StepKind::cached;
    d.mode = mode;
    d.region = region_for_step(s);
  }
  return plan;
}

}  // namespace deltadit
