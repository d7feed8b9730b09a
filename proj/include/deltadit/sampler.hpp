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
#include <string>
#include <vector>

#include "deltadit/cache.hpp"
#include "deltadit/model.hpp"
#include "deltadit/planner.hpp"
#include "deltadit/rng.hpp"

namespace deltadit {

// Per-step constants for t = 1..T, stored at index t - 1. alpha_bar(0) is 1.
struct NoiseSchedule {
  std::int64_t steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_cumprod;
  std::vector<double> sigma;
  // Timestep fed to the network at sampling step t (a training-grid index).
  std::vector<std::int64_t> model_timestep;

  double beta_at(std::int64_t t) const { return beta.at(static_cast<std::size_t>(t - 1)); }
  double alpha_at(std::int64_t t) const { return alpha.at(static_cast<std::size_t>(t - 1)); }
  double sigma_at(std::int64_t t) const { return sigma.at(static_cast<std::size_t>(t - 1)); }
  double alpha_bar(std::int64_t t) const { return t == 0 ? 1.0 : alpha_cumprod.at(static_cast<std::size_t>(t - 1)); }
  std::int64_t timestep_at(std::int64_t t) const { return model_timestep.at(static_cast<std::size_t>(t - 1)); }

  // beta linear from beta_start to beta_end over `steps`; sigma_t = sqrt(beta_t).
  static NoiseSchedule linear(std::int64_t steps, double beta_start = 1e-4, double beta_end = 0.02);

  // `sample_steps` evenly spaced timesteps of a linear `train_steps` schedule,
  // endpoints included. alpha_t = alpha_bar_t / alpha_bar_{t-1} so the
  // cumulative products match the training grid at the chosen timesteps.
  static NoiseSchedule respaced(std::int64_t train_steps, std::int64_t sample_steps, double beta_start = 1e-4,
                                double beta_end = 0.02);

  // Throws NumericError if 0 < beta < 1, monotone alpha_bar or the product
  // identity fails.
  void validate() const;
};

enum class Solver { ddpm, ddim };

std::string to_string(Solver s);
Solver parse_solver(const std::string& s);

// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps, t in [0, T].
Tensor q_sample(const Tensor& x0, std::int64_t t, const Tensor& eps, const NoiseSchedule& sched);

// x_{t-1} = (x_t - beta_t / sqrt(1 - alpha_bar_t) eps) / sqrt(alpha_t) + sigma_t z.
// No noise is drawn at t == 1.
Tensor ddpm_step(const Tensor& x_t, const Tensor& eps_pred, std::int64_t t, const NoiseSchedule& sched, Rng& rng);

// Deterministic DDIM update from t to t_prev (t > t_prev >= 0, or t_prev == t
// for the identity).
Tensor ddim_step(const Tensor& x_t, const Tensor& eps_pred, std::int64_t t, std::int64_t t_prev,
                 const NoiseSchedule& sched);

struct StepRecord {
  std::int64_t step = 0;  // 1-based sampling step
  std::int64_t t = 0;     // schedule index, counts down from T
  std::int64_t model_timestep = 0;
  StepKind kind = StepKind::full;
  CacheRegion region;
  CacheMode mode = CacheMode::delta;
  std::uint64_t blocks = 0;
  std::optional<double> deviation;  // L2 to the uncached twin after this step
};

struct RunReport {
  std::uint64_t seed = 0;
  Solver solver = Solver::ddpm;
  std::vector<StepRecord> steps;
  std::uint64_t total_blocks = 0;
  std::int64_t planned_blocks = 0;
  double mac_per_block = 0.0;
  double realized_macs = 0.0;
  double full_macs = 0.0;
  double wall_ms = 0.0;
  std::uint64_t image_fingerprint = 0;
};

struct SampleOptions {
  // Also run an uncached twin with the same seed and record per-step L2.
  bool compare = false;
  // Keep x_T and every x_{t-1} in SampleResult::trajectory.
  bool keep_trajectory = false;
  // MACs per block for the report; 0 uses block_macs(spec).
  double mac_per_block = 0.0;
  // Experimental classifier-free guidance: eps_u + scale (eps_c - eps_u),
  // where the unconditioned branch drops the class row. Each branch keeps its
  // own cache, so a guided run evaluates twice the planned blocks.
  std::optional<double> guidance_scale;
};

struct SampleResult {
  Tensor image;
  RunReport report;
  std::vector<Tensor> trajectory;
};

// Runs the denoising loop under `plan`. Full steps capture whatever the
// following cached steps of their group need; cached steps replay it.
SampleResult sample(const ModelWeights& w, const NoiseSchedule& sched, const CachePlan& plan,
                    std::optional<std::int64_t> class_id, std::uint64_t seed, Solver solver,
                    const SampleOptions& options = {});

}  // namespace deltadit
