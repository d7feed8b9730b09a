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

#include "deltadit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "deltadit/analysis.hpp"
#include "deltadit/error.hpp"
#include "deltadit/image_io.hpp"

namespace fs = std::filesystem;

namespace deltadit::cli {

namespace {

std::string region_label(const CacheRegion& r) {
  return "blocks " + std::to_string(r.start) + ".." + std::to_string(r.last());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

// Collects flag values and applies only the ones given on the command line,
// after the config file has been loaded.
class Overrides {
 public:
  template <typename T, typename Setter>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& desc, Setter setter) {
    auto slot = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *slot, desc);
    apply_.push_back([opt, slot, setter](RunConfig& c) {
      if (opt->count() > 0) setter(c, *slot);
    });
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, const std::string& desc,
                    std::function<void(RunConfig&)> setter) {
    CLI::Option* opt = app->add_flag(name, desc);
    apply_.push_back([opt, setter](RunConfig& c) {
      if (opt->count() > 0) setter(c);
    });
    return opt;
  }
  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

void add_spec_flags(CLI::App* app, Overrides& ov) {
  auto int_flag = [&](const char* name, const char* desc, std::int64_t ModelSpec::*field) {
    ov.add<std::int64_t>(app, name, desc, [field](RunConfig& c, std::int64_t v) {
      c.spec.*field = v;
      c.spec_given = true;
    });
  };
  int_flag("--image-size", "Image side in pixels", &ModelSpec::image_size);
  int_flag("--channels", "Image channels", &ModelSpec::channels);
  int_flag("--patch", "Patch side", &ModelSpec::patch);
  int_flag("--blocks", "Number of transformer blocks", &ModelSpec::n_blocks);
  int_flag("--d-model", "Hidden width", &ModelSpec::d_model);
  int_flag("--heads", "Attention heads", &ModelSpec::n_heads);
  int_flag("--classes", "Class count (0 = unconditional)", &ModelSpec::n_classes);
  ov.add<double>(app, "--mlp-ratio", "MLP width ratio", [](RunConfig& c, double v) {
    c.spec.mlp_ratio = v;
    c.spec_given = true;
  });
}

void add_plan_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::int64_t>(app, "--steps", "Sampling steps T", [](RunConfig& c, auto v) { c.steps = v; });
  ov.add<double>(app, "--budget", "Total MAC budget M_g", [](RunConfig& c, auto v) { c.budget = v; });
  ov.add<std::int64_t>(app, "--interval", "Cache interval N", [](RunConfig& c, auto v) { c.interval = v; });
  ov.add<std::int64_t>(app, "--cached-blocks", "Blocks skipped per cached step N_c",
                       [](RunConfig& c, auto v) { c.cached_blocks = v; });
  ov.add<std::int64_t>(app, "--boundary", "Stage boundary b (steps)", [](RunConfig& c, auto v) { c.boundary = v; });
  ov.add<std::string>(app, "--boundary-direction", "narrative | literal",
                      [](RunConfig& c, const std::string& v) { c.direction = parse_boundary_direction(v); });
  ov.add<std::string>(app, "--mode", "none | delta | feature-map", [](RunConfig& c, const std::string& v) { c.mode = v; });
  ov.add<std::string>(app, "--region", "front | middle | back | I:<n> (fixed region for every cached step)",
                      [](RunConfig& c, const std::string& v) { c.region = v; });
  ov.add<double>(app, "--mac-per-block", "MACs of one block M_b", [](RunConfig& c, auto v) { c.mac_per_block = v; });
}

std::string pnm_extension(std::int64_t channels) { return channels == 3 ? ".ppm" : ".pgm"; }

void save_image(const Tensor& img, const fs::path& stem) {
  const auto c = img.dim(0);
  if (c == 1 || c == 3) {
    write_pnm(img, stem.string() + pnm_extension(c));
  } else {
    save_tensor(img, stem.string() + ".ddtn");
  }
}

ModelWeights resolve_weights(const RunConfig& cfg) {
  if (cfg.model_path) {
    if (!fs::exists(*cfg.model_path)) throw ConfigError("model file not found: " + *cfg.model_path);
    return cfg.spec_given ? load_weights(*cfg.model_path, cfg.spec) : load_weights(*cfg.model_path);
  }
  return init_weights(cfg.spec, cfg.model_seed);
}

// ---------------------------------------------------------------------------

int cmd_plan(const RunConfig& cfg, const std::string& json_out, std::ostream& out, std::ostream& err) {
  const auto nb = cfg.spec.n_blocks;
  double mpb = 1.0;
  if (cfg.mac_per_block) {
    mpb = *cfg.mac_per_block;
  } else if (cfg.full_macs) {
    mpb = *cfg.full_macs / static_cast<double>(cfg.steps * nb);
  }
  const auto choice = build_plan(cfg, nb, mpb);
  const json j = to_json(choice.plan, choice.cost);
  print_plan_table(choice.plan, choice.cost, err);
  out << j.dump(2) << "\n";
  if (!json_out.empty()) write_json_file(j, json_out);
  return kOk;
}

int cmd_init_model(const RunConfig& cfg, const std::string& path, std::ostream& out) {
  const auto w = init_weights(cfg.spec, cfg.model_seed);
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  save_weights(w, path);
  std::size_t n = 0;
  for (const Tensor* t : w.parameters()) n += t->size();
  out << json{{"path", path}, {"seed", cfg.model_seed}, {"spec", to_json(cfg.spec)}, {"parameters", n}}.dump(2) << "\n";
  return kOk;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelWeights w = resolve_weights(cfg);
  const auto sched = NoiseSchedule::respaced(cfg.train_steps, cfg.steps, cfg.beta_start, cfg.beta_end);
  const double mpb = cfg.mac_per_block.value_or(block_macs(w.spec));

  PlanChoice choice;
  if (cfg.plan_file) {
    choice.plan = plan_from_json(read_json_file(*cfg.plan_file));
    choice.cost = {mpb, w.spec.n_blocks, choice.plan.steps(), static_cast<double>(choice.plan.steps() * w.spec.n_blocks) * mpb};
  } else {
    choice = build_plan(cfg, w.spec.n_blocks, mpb);
  }
  if (choice.plan.steps() != sched.steps) throw ConfigError("plan step count does not match --steps");
  if (cfg.seeds.empty()) throw ConfigError("no seeds given");
  if (cfg.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (cfg.class_id && w.spec.n_classes > 0 && (*cfg.class_id < 0 || *cfg.class_id >= w.spec.n_classes)) {
    throw ConfigError("class id out of range");
  }

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  SampleOptions opts;
  opts.compare = cfg.compare;
  opts.mac_per_block = mpb;
  opts.guidance_scale = cfg.guidance;

  std::vector<std::optional<SampleResult>> results(cfg.seeds.size());
  std::vector<std::string> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        results[i] = sample(w, sched, choice.plan, cfg.class_id, cfg.seeds[i], cfg.solver, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), cfg.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw NumericError("seed " + std::to_string(cfg.seeds[i]) + ": " + errors[i]);
  }

  json runs = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    const auto seed = cfg.seeds[i];
    const fs::path stem = dir / ("seed_" + std::to_string(seed));
    save_image(r.image, stem);
    const fs::path report_path = dir / ("report_seed_" + std::to_string(seed) + ".json");
    write_json_file(to_json(r.report), report_path);
    json entry = {{"seed", seed},
                  {"report", report_path.string()},
                  {"realized_macs", r.report.realized_macs},
                  {"total_blocks", r.report.total_blocks},
                  {"wall_ms", r.report.wall_ms}};
    if (cfg.compare) {
      std::vector<double> dev;
      for (const auto& s : r.report.steps) dev.push_back(s.deviation.value_or(0.0));
      entry["deviations"] = dev;
      entry["final_deviation"] = dev.empty() ? 0.0 : dev.back();
    }
    runs.push_back(std::move(entry));
    err << "seed " << seed << ": " << r.report.total_blocks << " blocks, " << std::fixed << std::setprecision(1)
        << r.report.wall_ms << " ms\n";
  }
  out << json{{"out_dir", dir.string()},
              {"solver", to_string(cfg.solver)},
              {"spec", to_json(w.spec)},
              {"plan", to_json(choice.plan, choice.cost)},
              {"runs", std::move(runs)}}
             .dump(2)
      << "\n";
  return kOk;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(e.path().filename());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_compare(const fs::path& a, const fs::path& b, double cutoff, std::ostream& out) {
  const auto fa = list_images(a);
  const auto fb = list_images(b);
  if (fa.empty()) throw ConfigError("no PGM/PPM images in " + a.string());
  if (fa != fb) throw ConfigError("image sets of " + a.string() + " and " + b.string() + " differ");
  json files = json::array();
  double l2 = 0.0, hf = 0.0, ga = 0.0, gb = 0.0;
  for (const auto& name : fa) {
    const auto c = compare_runs(read_pnm(a / name), read_pnm(b / name), cutoff);
    json e = to_json(c);
    e["file"] = name.string();
    files.push_back(std::move(e));
    l2 += c.l2;
    hf += c.high_freq_error;
    ga += c.avg_gradient_a;
    gb += c.avg_gradient_b;
  }
  const double n = static_cast<double>(fa.size());
  MetricsReport mean;
  mean.avg_gradient = gb / n;
  mean.high_freq_error = hf / n;
  out << json{{"dir_a", a.string()},
              {"dir_b", b.string()},
              {"cutoff", cutoff},
              {"files", std::move(files)},
              {"mean", {{"l2", l2 / n},
                        {"avg_gradient_a", ga / n},
                        {"avg_gradient_b", gb / n},
                        {"high_freq_error", finite_or_null(hf / n)}}},
              {"metrics", to_json(mean)}}
             .dump(2)
      << "\n";
  return kOk;
}

int cmd_analyze(const std::vector<std::string>& images, const std::string& ref, double cutoff,
                const std::string& diff_out, const std::string& report, std::ostream& out) {
  std::optional<Tensor> ref_img;
  if (!ref.empty()) ref_img = read_pnm(ref);
  if (!diff_out.empty() && (!ref_img || images.size() != 1)) {
    throw ConfigError("--diff-out needs --ref and exactly one image");
  }
  json entries = json::array();
  for (const auto& path : images) {
    const Tensor img = read_pnm(path);
    MetricsReport m;
    m.avg_gradient = avg_gradient(img);
    if (ref_img) m.high_freq_error = high_freq_error(img, *ref_img, cutoff);
    json e = to_json(m);
    e["file"] = path;
    entries.push_back(std::move(e));
    if (!diff_out.empty()) write_pnm(high_freq_difference_image(img, *ref_img, cutoff), diff_out);
  }
  json j = {{"cutoff", cutoff}, {"images", std::move(entries)}};
  if (!ref.empty()) j["reference"] = ref;
  out << j.dump(2) << "\n";
  if (!report.empty()) write_json_file(j, report);
  return kOk;
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "model",   "spec",        "model_seed", "steps",    "train_steps", "beta_start", "beta_end",
      "solver",  "mode",        "budget",     "interval", "cached_blocks", "boundary", "boundary_direction",
      "region",  "mac_per_block", "full_macs", "plan_file", "out",      "seeds",       "class_id",
      "compare", "guidance", "jobs"};
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    if (j.contains("model") && !j["model"].is_null()) c.model_path = j["model"].get<std::string>();
    if (j.contains("spec")) {
      c.spec = model_spec_from_json(j["spec"], c.spec);
      c.spec_given = true;
    }
    c.model_seed = j.value("model_seed", c.model_seed);
    c.steps = j.value("steps", c.steps);
    c.train_steps = j.value("train_steps", c.train_steps);
    c.beta_start = j.value("beta_start", c.beta_start);
    c.beta_end = j.value("beta_end", c.beta_end);
    if (j.contains("solver")) c.solver = parse_solver(j["solver"].get<std::string>());
    c.mode = j.value("mode", c.mode);
    auto opt_num = [&](const char* key, auto& slot) {
      if (j.contains(key) && !j[key].is_null()) slot = j[key].get<typename std::decay_t<decltype(slot)>::value_type>();
    };
    opt_num("budget", c.budget);
    opt_num("interval", c.interval);
    opt_num("cached_blocks", c.cached_blocks);
    opt_num("mac_per_block", c.mac_per_block);
    opt_num("full_macs", c.full_macs);
    opt_num("region", c.region);
    opt_num("plan_file", c.plan_file);
    opt_num("class_id", c.class_id);
    opt_num("guidance", c.guidance);
    c.boundary = j.value("boundary", c.boundary);
    if (j.contains("boundary_direction")) c.direction = parse_boundary_direction(j["boundary_direction"].get<std::string>());
    c.out_dir = j.value("out", c.out_dir);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.compare = j.value("compare", c.compare);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

CacheRegion parse_region(const std::string& s, std::int64_t n_blocks, std::int64_t cached_blocks) {
  CacheRegion r;
  if (s == "front") {
    r = CacheRegion::front(cached_blocks);
  } else if (s == "back") {
    r = CacheRegion::back(n_blocks, cached_blocks);
  } else if (s == "middle") {
    r = CacheRegion::middle(n_blocks, cached_blocks);
  } else if (s.rfind("I:", 0) == 0) {
    try {
      std::size_t used = 0;
      r = {std::stoll(s.substr(2), &used), cached_blocks};
      if (used != s.size() - 2) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("bad region '" + s + "'");
    }
  } else {
    throw ConfigError("unknown region '" + s + "' (expected front, middle, back or I:<n>)");
  }
  r.validate(n_blocks);
  return r;
}

PlanChoice build_plan(const RunConfig& cfg, std::int64_t n_blocks, double mac_per_block) {
  const auto t = cfg.steps;
  if (t < 1) throw ConfigError("--steps must be >= 1");
  if (!(mac_per_block > 0.0)) throw ConfigError("MACs per block must be positive");
  const double full = static_cast<double>(t * n_blocks) * mac_per_block;
  PlanChoice out{{}, {mac_per_block, n_blocks, t, full}};

  if (cfg.mode == "none") {
    out.plan = full_plan(t, n_blocks);
    return out;
  }
  const CacheMode mode = parse_cache_mode(cfg.mode);
  const bool explicit_plan = cfg.interval.has_value() || cfg.cached_blocks.has_value();
  if (cfg.budget.has_value() == explicit_plan) {
    throw ConfigError("give exactly one of --budget or --interval with --cached-blocks");
  }
  std::int64_t interval = 0, cached = 0;
  if (cfg.budget) {
    out.cost.budget = *cfg.budget;
    interval = compute_interval(out.cost);
    cached = compute_cached_blocks(out.cost, interval);
  } else {
    if (!cfg.interval || !cfg.cached_blocks) throw ConfigError("--interval and --cached-blocks go together");
    interval = *cfg.interval;
    cached = *cfg.cached_blocks;
    if (interval < 1) throw ConfigError("--interval must be >= 1");
    if (cached < 0 || cached > n_blocks) throw ConfigError("--cached-blocks outside [0, N_b]");
  }

  if (mode == CacheMode::feature_map) {
    if (cfg.region && cfg.region != "front" && parse_region(*cfg.region, n_blocks, cached).start != 1) {
      throw ConfigError("feature-map mode only supports the front region");
    }
    out.plan = plan_feature_map_baseline(t, interval, cached, out.cost).plan;
  } else if (cfg.region) {
    out.plan = uniform_plan(t, interval, parse_region(*cfg.region, n_blocks, cached), n_blocks, mode);
  } else {
    out.plan = assign_regions(t, interval, cached, cfg.boundary, n_blocks, cfg.direction);
  }
  out.plan.boundary = cfg.boundary;
  return out;
}

void print_plan_table(const CachePlan& plan, const CostModel& cost, std::ostream& os) {
  const auto pc = plan_macs(plan, cost);
  os << "interval N=" << plan.interval << "  cached blocks N_c=" << plan.cached_blocks << "  boundary b="
     << plan.boundary << "\n";
  os << std::left << std::setw(6) << "step" << std::setw(8) << "kind" << std::setw(13) << "mode"
     << "region\n";
  for (std::int64_t s = 1; s <= plan.steps(); ++s) {
    const auto& d = plan.per_step[static_cast<std::size_t>(s - 1)];
    os << std::left << std::setw(6) << s;
    if (d.kind == StepKind::full) {
      os << std::setw(8) << "full" << std::setw(13) << "-" << "all blocks\n";
    } else {
      os << std::setw(8) << "cached" << std::setw(13) << to_string(d.mode)
         << (d.region.empty() ? std::string("none") : region_label(d.region)) << "\n";
    }
  }
  os << std::fixed << std::setprecision(3) << "MACs " << pc.macs << " of " << cost.full_macs() << "  speedup "
     << std::setprecision(2) << pc.speedup << "x\n";
  os.unsetf(std::ios::fixed);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delta-DiT inference engine: cache planning, sampling and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides plan_ov, sample_ov, init_ov;

  auto* plan_cmd = app.add_subcommand("plan", "Compute N, N_c and the per-step cache plan");
  plan_cmd->add_option("--config", config_path, "JSON config file");
  add_plan_flags(plan_cmd, plan_ov);
  plan_ov.add<std::int64_t>(plan_cmd, "--blocks", "Number of transformer blocks N_b",
                            [](RunConfig& c, auto v) { c.spec.n_blocks = v; });
  plan_ov.add<double>(plan_cmd, "--full-macs", "MACs of a full uncached run (sets M_b)",
                      [](RunConfig& c, auto v) { c.full_macs = v; });
  std::string plan_json_out;
  plan_cmd->add_option("--json-out", plan_json_out, "Also write the plan JSON here");

  auto* init_cmd = app.add_subcommand("init-model", "Write a randomly initialized weight file");
  add_spec_flags(init_cmd, init_ov);
  init_ov.add<std::uint64_t>(init_cmd, "--seed", "Initialization seed", [](RunConfig& c, auto v) { c.model_seed = v; });
  std::string init_out;
  init_cmd->add_option("--out", init_out, "Output weight file")->required();

  auto* sample_cmd = app.add_subcommand("sample", "Generate images under a cache plan");
  sample_cmd->add_option("--config", config_path, "JSON config file");
  add_spec_flags(sample_cmd, sample_ov);
  add_plan_flags(sample_cmd, sample_ov);
  sample_ov.add<std::string>(sample_cmd, "--model", "Weight file (default: random init from --model-seed)",
                             [](RunConfig& c, const std::string& v) { c.model_path = v; });
  sample_ov.add<std::uint64_t>(sample_cmd, "--model-seed", "Seed for random weights",
                               [](RunConfig& c, auto v) { c.model_seed = v; });
  sample_ov.add<std::int64_t>(sample_cmd, "--train-steps", "Training-grid length of the noise schedule",
                              [](RunConfig& c, auto v) { c.train_steps = v; });
  sample_ov.add<std::string>(sample_cmd, "--solver", "ddpm | ddim",
                             [](RunConfig& c, const std::string& v) { c.solver = parse_solver(v); });
  sample_ov.add<std::string>(sample_cmd, "--plan-file", "Use a plan JSON written by `plan`",
                             [](RunConfig& c, const std::string& v) { c.plan_file = v; });
  sample_ov.add<std::string>(sample_cmd, "--out", "Output directory",
                             [](RunConfig& c, const std::string& v) { c.out_dir = v; });
  sample_ov
      .add<std::vector<std::uint64_t>>(sample_cmd, "--seed", "Sampling seed(s); repeat or comma-separate",
                                       [](RunConfig& c, const auto& v) { c.seeds = v; })
      ->delimiter(',');
  sample_ov.add<std::int64_t>(sample_cmd, "--class", "Class id for conditional models",
                              [](RunConfig& c, auto v) { c.class_id = v; });
  sample_ov.flag(sample_cmd, "--compare", "Also run the uncached twin and report per-step deviations",
                 [](RunConfig& c) { c.compare = true; });
  sample_ov.add<double>(sample_cmd, "--guidance",
                        "Experimental classifier-free guidance scale (conditional models; one cache per branch)",
                        [](RunConfig& c, auto v) { c.guidance = v; });
  sample_ov.add<int>(sample_cmd, "--jobs", "Seeds sampled concurrently", [](RunConfig& c, auto v) { c.jobs = v; });

  auto* compare_cmd = app.add_subcommand("compare", "Compare two directories of generated images");
  std::string dir_a, dir_b;
  double cutoff = kDefaultCutoff;
  compare_cmd->add_option("dir_a", dir_a, "Reference directory")->required();
  compare_cmd->add_option("dir_b", dir_b, "Directory to measure")->required();
  compare_cmd->add_option("--cutoff", cutoff, "High-frequency cutoff as a fraction of Nyquist");

  auto* analyze_cmd = app.add_subcommand("analyze", "Image metrics: Sobel gradient, high-frequency error");
  std::vector<std::string> images;
  std::string ref, diff_out, report;
  analyze_cmd->add_option("images", images, "PGM/PPM images")->required();
  analyze_cmd->add_option("--ref", ref, "Reference image for high-frequency error");
  analyze_cmd->add_option("--cutoff", cutoff, "High-frequency cutoff as a fraction of Nyquist");
  analyze_cmd->add_option("--diff-out", diff_out, "Write the high-frequency difference image (PGM/PPM)");
  analyze_cmd->add_option("--report", report, "Also write the metrics JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = config_from_json(read_json_file(config_path));
    if (plan_cmd->parsed()) {
      plan_ov.apply(cfg);
      return cmd_plan(cfg, plan_json_out, out, err);
    }
    if (init_cmd->parsed()) {
      init_ov.apply(cfg);
      return cmd_init_model(cfg, init_out, out);
    }
    if (sample_cmd->parsed()) {
      sample_ov.apply(cfg);
      cfg.spec.validate();
      return cmd_sample(cfg, out, err);
    }
    if (compare_cmd->parsed()) return cmd_compare(dir_a, dir_b, cutoff, out);
    if (analyze_cmd->parsed()) return cmd_analyze(images, ref, cutoff, diff_out, report, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace deltadit::cli
