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

#include "deltadit/planner.hpp"

#include <algorithm>
#include <cmath>

#include "deltadit/error.hpp"

namespace deltadit {

namespace {

// Relative slack for ratios that are integral up to decimal rounding of the
// inputs (e.g. a budget equal to the full cost).
constexpr double kRatioSlack = 1e-9;

}  // namespace

void CostModel::validate() const {
  if (!(mac_per_block > 0.0) || !std::isfinite(mac_per_block)) throw ConfigError("mac_per_block must be positive");
  if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  if (budget > full_macs() * (1.0 + kRatioSlack)) {
    throw ConfigError("budget " + std::to_string(budget) + " exceeds the full cost " + std::to_string(full_macs()));
  }
}

CostModel CostModel::from_full_cost(double full_cost, std::int64_t n_blocks, std::int64_t steps, double budget) {
  if (n_blocks < 1 || steps < 1) throw ConfigError("n_blocks and steps must be >= 1");
  return {full_cost / static_cast<double>(n_blocks * steps), n_blocks, steps, budget};
}

std::string to_string(BoundaryDirection d) { return d == BoundaryDirection::narrative ? "narrative" : "literal"; }

BoundaryDirection parse_boundary_direction(const std::string& s) {
  if (s == "narrative") return BoundaryDirection::narrative;
  if (s == "literal") return BoundaryDirection::literal;
  throw ConfigError("unknown boundary direction '" + s + "'");
}

std::int64_t CachePlan::planned_blocks() const {
  std::int64_t total = 0;
  for (const auto& d : per_step) total += d.kind == StepKind::full ? n_blocks : n_blocks - d.region.count;
  return total;
}

void CachePlan::validate() const {
  if (interval < 1) throw ConfigError("plan interval must be >= 1");
  if (n_blocks < 1) throw ConfigError("plan n_blocks must be >= 1");
  const auto t = steps();
  const auto grouped = (t / interval) * interval;
  for (std::int64_t s = 1; s <= t; ++s) {
    const auto& d = per_step[static_cast<std::size_t>(s - 1)];
    const bool must_be_full = s > grouped || (s - 1) % interval == 0;
    if (must_be_full != (d.kind == StepKind::full)) {
      throw ConfigError("plan step " + std::to_string(s) + " breaks the group layout");
    }
    if (d.kind == StepKind::cached) {
      d.region.validate(n_blocks);
      if (d.mode == CacheMode::feature_map && d.region.start != 1) {
        throw ConfigError("plan step " + std::to_string(s) + ": feature-map cache needs a front region");
      }
    }
  }
}

std::int64_t compute_interval(const CostModel& cost) {
  cost.validate();
  const double ratio = cost.full_macs() / cost.budget;
  const auto n = static_cast<std::int64_t>(std::ceil(ratio * (1.0 - kRatioSlack)));
  return std::max<std::int64_t>(n, 1);
}

std::int64_t compute_cached_blocks(const CostModel& cost, std::int64_t interval) {
  cost.validate();
  if (interval < 1) throw ConfigError("interval must be >= 1");
  if (interval == 1) return 0;
  const auto groups = cost.steps / interval;
  if (groups == 0) {
    throw ConfigError("interval " + std::to_string(interval) + " exceeds the step count " + std::to_string(cost.steps));
  }
  const double nb = static_cast<double>(cost.n_blocks);
  const double leftover = static_cast<double>(cost.steps % interval) * nb * cost.mac_per_block;
  const double per_group = (cost.budget - leftover) / (static_cast<double>(groups) * cost.mac_per_block);
  const double computed = (per_group - nb) / static_cast<double>(interval - 1);
  const auto cached = cost.n_blocks - static_cast<std::int64_t>(std::llround(computed));
  if (cached < 0 || cached > cost.n_blocks) {
    throw ConfigError("budget infeasible: it implies caching " + std::to_string(cached) + " of " +
                      std::to_string(cost.n_blocks) + " blocks");
  }
  return cached;
}

std::int64_t grouped_block_count(std::int64_t steps, std::int64_t interval, std::int64_t n_blocks,
                                 std::int64_t cached_blocks) {
  const auto groups = steps / interval;
  return groups * (n_blocks + (interval - 1) * (n_blocks - cached_blocks)) + (steps % interval) * n_blocks;
}

CachePlan assign_regions(std::int64_t steps, std::int64_t interval, std::int64_t cached_blocks, std::int64_t boundary,
                         std::int64_t n_blocks, BoundaryDirection direction) {
  if (steps < 1 || interval < 1 || n_blocks < 1) throw ConfigError("steps, interval and n_blocks must be >= 1");
  if (boundary < 0 || boundary > steps) {
    throw ConfigError("boundary " + std::to_string(boundary) + " outside [0, " + std::to_string(steps) + "]");
  }
  if (cached_blocks < 0 || cached_blocks > n_blocks) throw ConfigError("cached_blocks outside [0, n_blocks]");
  const auto front = CacheRegion::front(cached_blocks);
  const auto back = CacheRegion::back(n_blocks, cached_blocks);
  auto plan = layout_plan(steps, interval, n_blocks, cached_blocks, CacheMode::delta, [&](std::int64_t s) {
    const bool tail = s > steps - boundary;
    const bool use_front = direction == BoundaryDirection::narrative ? tail : !tail;
    return use_front ? front : back;
  });
  plan.boundary = boundary;
  return plan;
}

CachePlan uniform_plan(std::int64_t steps, std::int64_t interval, const CacheRegion& region, std::int64_t n_blocks,
                       CacheMode mode) {
  if (steps < 1 || interval < 1) throw ConfigError("steps and interval must be >= 1");
  region.validate(n_blocks);
  if (mode == CacheMode::feature_map && region.start != 1) {
    throw ConfigError("feature-map cache needs a front region");
  }
  return layout_plan(steps, interval, n_blocks, region.count, mode, [&](std::int64_t) { return region; });
}

CachePlan full_plan(std::int64_t steps, std::int64_t n_blocks) {
  return uniform_plan(steps, 1, CacheRegion::front(0), n_blocks);
}

PlanCost plan_macs(const CachePlan& plan, const CostModel& cost) {
  if (plan.n_blocks != cost.n_blocks || plan.steps() != cost.steps) {
    throw ConfigError("plan shape (T=" + std::to_string(plan.steps()) + ", N_b=" + std::to_string(plan.n_blocks) +
                      ") does not match the cost model");
  }
  const auto blocks = plan.planned_blocks();
  const double macs = static_cast<double>(blocks) * cost.mac_per_block;
  return {macs, static_cast<double>(cost.steps * cost.n_blocks) / static_cast<double>(blocks)};
}

BaselinePlan plan_feature_map_baseline(std::int64_t steps, std::int64_t interval, std::int64_t cache_until,
                                       const CostModel& cost) {
  if (cache_until < 0 || cache_until > cost.n_blocks) {
    throw ConfigError("feature-map cache position " + std::to_string(cache_until) + " outside [0, " +
                      std::to_string(cost.n_blocks) + "]");
  }
  BaselinePlan out;
  out.plan = uniform_plan(steps, interval, CacheRegion::front(cache_until), cost.n_blocks, CacheMode::feature_map);
  out.macs = static_cast<double>(out.plan.planned_blocks()) * cost.mac_per_block;
  return out;
}

}  // namespace deltadit
