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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deltadit/json_io.hpp"
#include "deltadit/model.hpp"
#include "deltadit/planner.hpp"
#include "deltadit/sampler.hpp"

namespace deltadit::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

// Everything a plan or sampling run needs. Loaded from a JSON config file
// (same keys as the fields below) and then overridden by flags.
struct RunConfig {
  std::optional<std::string> model_path;
  ModelSpec spec;
  bool spec_given = false;  // spec came from the config or flags; a loaded model must match it
  std::uint64_t model_seed = 0;

  std::int64_t steps = 20;
  std::int64_t train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  Solver solver = Solver::ddpm;

  std::string mode = "delta";  // none | delta | feature-map
  std::optional<double> budget;
  std::optional<std::int64_t> interval;
  std::optional<std::int64_t> cached_blocks;
  std::int64_t boundary = 0;
  BoundaryDirection direction = BoundaryDirection::narrative;
  std::optional<std::string> region;  // front | middle | back | I:<n>
  std::optional<double> mac_per_block;
  std::optional<double> full_macs;
  std::optional<std::string> plan_file;

  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds{0};
  std::optional<std::int64_t> class_id;
  bool compare = false;
  std::optional<double> guidance;  // experimental classifier-free guidance scale
  int jobs = 1;
};

// Applies every key present in `j` on top of `cfg`; unknown keys are rejected.
RunConfig config_from_json(const json& j, RunConfig cfg = {});

// front | middle | back | I:<n>, sized to `cached_blocks`.
CacheRegion parse_region(const std::string& s, std::int64_t n_blocks, std::int64_t cached_blocks);

struct PlanChoice {
  CachePlan plan;
  CostModel cost;
};

// Resolves the plan for `n_blocks` blocks at `mac_per_block` MACs each:
// exactly one of budget or interval + cached_blocks (unless mode is none).
PlanChoice build_plan(const RunConfig& cfg, std::int64_t n_blocks, double mac_per_block);

// Human-readable plan summary, one line per step.
void print_plan_table(const CachePlan& plan, const CostModel& cost, std::ostream& os);

// Entry point shared by the executable and the tests. JSON goes to `out`,
// tables and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace deltadit::cli
