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

#include "deltadit/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "deltadit/error.hpp"

namespace deltadit {

NoiseSchedule NoiseSchedule::linear(std::int64_t steps, double beta_start, double beta_end) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  NoiseSchedule s;
  s.steps = steps;
  double prod = 1.0;
  for (std::int64_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    const double b = beta_start + (beta_end - beta_start) * frac;
    prod *= 1.0 - b;
    s.beta.push_back(b);
    s.alpha.push_back(1.0 - b);
    s.alpha_cumprod.push_back(prod);
    s.sigma.push_back(std::sqrt(b));
    s.model_timestep.push_back(i);
  }
  s.validate();
  return s;
}

NoiseSchedule NoiseSchedule::respaced(std::int64_t train_steps, std::int64_t sample_steps, double beta_start,
                                      double beta_end) {
  if (sample_steps < 1 || sample_steps > train_steps) {
    throw ConfigError("sampling steps must lie in [1, " + std::to_string(train_steps) + "]");
  }
  const NoiseSchedule train = linear(train_steps, beta_start, beta_end);
  NoiseSchedule s;
  s.steps = sample_steps;
  double prev = 1.0;
  for (std::int64_t i = 0; i < sample_steps; ++i) {
    const std::int64_t tau =
        sample_steps == 1 ? train_steps - 1
                          : std::llround(static_cast<double>(i) * static_cast<double>(train_steps - 1) /
                                         static_cast<double>(sample_steps - 1));
    const double ab = train.alpha_bar(tau + 1);
    const double a = ab / prev;
    s.alpha_cumprod.push_back(ab);
    s.alpha.push_back(a);
    s.beta.push_back(1.0 - a);
    s.sigma.push_back(std::sqrt(1.0 - a));
    s.model_timestep.push_back(tau);
    prev = ab;
  }
  s.validate();
  return s;
}

void NoiseSchedule::validate() const {
  const auto n = static_cast<std::size_t>(steps);
  if (steps < 1 || beta.size() != n || alpha.size() != n || alpha_cumprod.size() != n || sigma.size() != n ||
      model_timestep.size() != n) {
    throw NumericError("schedule arrays do not match the step count");
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(beta[i] > 0.0 && beta[i] < 1.0)) throw NumericError("beta outside (0, 1) at t=" + std::to_string(i + 1));
    if (i > 0 && !(alpha_cumprod[i] < alpha_cumprod[i - 1])) throw NumericError("alpha_bar not strictly decreasing");
    prod *= alpha[i];
    if (std::abs(prod - alpha_cumprod[i]) > 1e-6) throw NumericError("alpha_bar differs from the product of alphas");
  }
}

std::string to_string(Solver s) { return s == Solver::ddpm ? "ddpm" : "ddim"; }

Solver parse_solver(const std::string& s) {
  if (s == "ddpm") return Solver::ddpm;
  if (s == "ddim") return Solver::ddim;
  throw ConfigError("unknown solver '" + s + "'");
}

Tensor q_sample(const Tensor& x0, std::int64_t t, const Tensor& eps, const NoiseSchedule& sched) {
  if (t < 0 || t > sched.steps) throw ConfigError("q_sample: t=" + std::to_string(t) + " out of range");
  check_same_shape(x0, eps, "q_sample");
  const double ab = sched.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(a * x0[i] + b * eps[i]);
  return out;
}

Tensor ddpm_step(const Tensor& x_t, const Tensor& eps_pred, std::int64_t t, const NoiseSchedule& sched, Rng& rng) {
  if (t < 1 || t > sched.steps) throw ConfigError("ddpm_step: t=" + std::to_string(t) + " out of range");
  check_same_shape(x_t, eps_pred, "ddpm_step");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
  const double eps_coef = sched.beta_at(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  Tensor out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(inv_sqrt_alpha * (x_t[i] - eps_coef * eps_pred[i]));
  }
  if (t > 1) {
    const Tensor z = randn(rng, x_t.shape());
    const double sigma = sched.sigma_at(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(out[i] + sigma * z[i]);
  }
  return out;
}

Tensor ddim_step(const Tensor& x_t, const Tensor& eps_pred, std::int64_t t, std::int64_t t_prev,
                 const NoiseSchedule& sched) {
  if (t < 0 || t > sched.steps || t_prev < 0 || t_prev > t) {
    throw ConfigError("ddim_step: need 0 <= t_prev <= t <= T");
  }
  check_same_shape(x_t, eps_pred, "ddim_step");
  if (t_prev == t) return x_t;
  const double ab = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t_prev);
  const double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
  const double pa = std::sqrt(ab_prev), pb = std::sqrt(1.0 - ab_prev);
  Tensor out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0_hat = (x_t[i] - sb * eps_pred[i]) / sa;
    out[i] = static_cast<float>(pa * x0_hat + pb * eps_pred[i]);
  }
  return out;
}

namespace {

// Capture requests for the cached steps that follow `step` up to the next full step.
std::vector<CaptureRequest> requests_after(const CachePlan& plan, std::int64_t step) {
  std::vector<CaptureRequest> out;
  for (auto s = step + 1; s <= plan.steps(); ++s) {
    const auto& d = plan.per_step[static_cast<std::size_t>(s - 1)];
    if (d.kind == StepKind::full) break;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const CaptureRequest& r) {
      return r.region == d.region && r.mode == d.mode;
    });
    if (!seen) out.push_back({d.region, d.mode});
  }
  return out;
}

const CacheState& find_state(const std::vector<CacheState>& states, const StepDirective& d, std::int64_t step) {
  for (const auto& st : states) {
    if (st.region == d.region && st.mode == d.mode) return st;
  }
  throw ConfigError("plan step " + std::to_string(step) + " has no captured cache to replay");
}

}  // namespace

SampleResult sample(const ModelWeights& w, const NoiseSchedule& sched, const CachePlan& plan,
                    std::optional<std::int64_t> class_id, std::uint64_t seed, Solver solver,
                    const SampleOptions& options) {
  if (plan.steps() != sched.steps) {
    throw ConfigError("plan has " + std::to_string(plan.steps()) + " steps, schedule has " + std::to_string(sched.steps));
  }
  if (plan.n_blocks != w.spec.n_blocks) throw ConfigError("plan block count does not match the model");
  plan.validate();

  const auto started = std::chrono::steady_clock::now();
  SampleResult res;
  auto& rep = res.report;
  rep.seed = seed;
  rep.solver = solver;
  rep.mac_per_block = options.mac_per_block > 0.0 ? options.mac_per_block : block_macs(w.spec);
  rep.planned_blocks = plan.planned_blocks();
  rep.full_macs = static_cast<double>(sched.steps * w.spec.n_blocks) * rep.mac_per_block;

  Rng rng(seed);
  Tensor x = randn(rng, w.spec.image_shape());
  if (options.keep_trajectory || options.compare) res.trajectory.push_back(x);

  const bool guided = options.guidance_scale.has_value();
  if (guided && (w.spec.n_classes == 0 || !class_id)) {
    throw ConfigError("guidance needs a conditional model and a class id");
  }
  const std::int64_t branches = guided ? 2 : 1;
  rep.planned_blocks *= branches;
  rep.full_macs *= static_cast<double>(branches);

  // One cache per branch; index 0 is the conditioned branch.
  std::vector<std::vector<CacheState>> states(static_cast<std::size_t>(branches));
  auto predict = [&](const Conditioning& cond, const StepDirective& d, std::int64_t step,
                     std::vector<CacheState>& st, ExecStats& stats) {
    if (d.kind == StepKind::full) {
      const auto requests = requests_after(plan, step);
      if (requests.empty()) {
        st.clear();
        return predict_noise(x, cond, w, &stats);
      }
      auto cap = run_full_capture(x, cond, w, requests, &stats);
      st = std::move(cap.states);
      return std::move(cap.eps);
    }
    const auto& cs = find_state(st, d, step);
    return d.mode == CacheMode::delta ? run_with_delta(x, cond, w, cs, &stats)
                                      : run_with_feature_map_cache(x, cond, w, cs, &stats);
  };

  for (std::int64_t step = 1; step <= sched.steps; ++step) {
    const std::int64_t t = sched.steps - step + 1;
    const Conditioning cond{sched.timestep_at(t), class_id};
    const auto& d = plan.per_step[static_cast<std::size_t>(step - 1)];
    ExecStats stats;
    Tensor eps = predict(cond, d, step, states[0], stats);
    if (guided) {
      const Tensor eps_u = predict(Conditioning{cond.timestep, std::nullopt}, d, step, states[1], stats);
      const double g = *options.guidance_scale;
      for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = static_cast<float>(eps_u[i] + g * (static_cast<double>(eps[i]) - eps_u[i]));
      }
    }

    x = solver == Solver::ddpm ? ddpm_step(x, eps, t, sched, rng) : ddim_step(x, eps, t, t - 1, sched);
    if (!x.all_finite()) throw NumericError("non-finite sample at step " + std::to_string(step));
    if (options.keep_trajectory || options.compare) res.trajectory.push_back(x);

    StepRecord rec;
    rec.step = step;
    rec.t = t;
    rec.model_timestep = cond.timestep;
    rec.kind = d.kind;
    rec.region = d.region;
    rec.mode = d.mode;
    rec.blocks = stats.block_calls;
    rep.steps.push_back(rec);
    rep.total_blocks += stats.block_calls;
  }

  if (options.compare) {
    SampleOptions twin_opts;
    twin_opts.keep_trajectory = true;
    twin_opts.mac_per_block = rep.mac_per_block;
    twin_opts.guidance_scale = options.guidance_scale;
    const auto twin = sample(w, sched, full_plan(sched.steps, w.spec.n_blocks), class_id, seed, solver, twin_opts);
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
      rep.steps[i].deviation = l2_distance(res.trajectory[i + 1], twin.trajectory[i + 1]);
    }
    if (!options.keep_trajectory) res.trajectory.clear();
  }

  rep.realized_macs = static_cast<double>(rep.total_blocks) * rep.mac_per_block;
  rep.image_fingerprint = fingerprint(x);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  res.image = std::move(x);
  return res;
}

}  // namespace deltadit
