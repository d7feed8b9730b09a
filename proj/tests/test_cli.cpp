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

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "deltadit/cli.hpp"
#include "deltadit/error.hpp"

using namespace deltadit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  json j() const { return json::parse(out); }
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "deltadit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(DELTADIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("deltadit_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("plan: PIXART budget") {
  const auto r = run_cli({"plan", "--steps", "20", "--blocks", "28", "--full-macs", "85.651", "--budget", "53.532",
                          "--boundary", "12"});
  REQUIRE(r.code == 0);
  const json j = r.j();
  CHECK(j["interval"] == 2);
  CHECK(j["cached_blocks"] == 21);
  CHECK(std::abs(j["macs"].get<double>() - 53.532) < 1e-3);
  CHECK(std::abs(j["speedup"].get<double>() - 1.60) < 5e-3);
  CHECK(j["per_step"].size() == 20);
  CHECK(j["per_step"][1]["region_start"] == 8);
  CHECK(j["per_step"][19]["region_start"] == 1);
  CHECK(r.err.find("speedup 1.60x") != std::string::npos);
}

TEST_CASE("plan: full budget") {
  const auto r = run_cli({"plan", "--steps", "20", "--blocks", "28", "--full-macs", "85.651", "--budget", "85.651"});
  REQUIRE(r.code == 0);
  const json j = r.j();
  CHECK(j["interval"] == 1);
  for (const auto& s : j["per_step"]) CHECK(s["kind"] == "full");
  CHECK(j["speedup"] == 1.0);
}

TEST_CASE("plan: LCM variants") {
  for (const auto& [budget, nc] : {std::pair{"7.953", 4}, std::pair{"7.647", 6}}) {
    const auto r = run_cli({"plan", "--steps", "4", "--blocks", "28", "--full-macs", "8.565", "--budget", budget,
                            "--boundary", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.j()["cached_blocks"] == nc);
  }
}

TEST_CASE("plan: explicit shape, regions and modes") {
  auto r = run_cli({"plan", "--steps", "6", "--blocks", "6", "--interval", "3", "--cached-blocks", "2", "--region",
                    "middle"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["per_step"][1]["region_start"] == 3);
  r = run_cli({"plan", "--steps", "6", "--blocks", "6", "--interval", "3", "--cached-blocks", "2", "--region", "I:5"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["per_step"][2]["region_start"] == 5);
  r = run_cli({"plan", "--steps", "6", "--blocks", "6", "--interval", "2", "--cached-blocks", "3", "--mode",
               "feature-map"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["per_step"][1]["mode"] == "feature-map");
  r = run_cli({"plan", "--steps", "6", "--blocks", "6", "--mode", "none"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["planned_blocks"] == 36);
  r = run_cli({"plan", "--steps", "20", "--blocks", "28", "--interval", "2", "--cached-blocks", "21", "--boundary",
               "12", "--boundary-direction", "literal"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["per_step"][1]["region_start"] == 1);
}

TEST_CASE("plan: configuration errors") {
  CHECK(run_cli({"plan", "--steps", "20", "--blocks", "28", "--full-macs", "85.651", "--budget", "5"}).code == 2);
  CHECK(run_cli({"plan", "--steps", "20", "--blocks", "28", "--budget", "5", "--interval", "2"}).code == 2);
  CHECK(run_cli({"plan", "--steps", "20", "--blocks", "28"}).code == 2);
  CHECK(run_cli({"plan", "--steps", "20", "--blocks", "28", "--interval", "2"}).code == 2);
  CHECK(run_cli({"plan", "--blocks", "6", "--interval", "2", "--cached-blocks", "2", "--region", "sideways"}).code == 2);
  CHECK(run_cli({"plan", "--blocks", "6", "--interval", "2", "--cached-blocks", "2", "--region", "I:6"}).code == 2);
  CHECK(run_cli({"plan", "--blocks", "6", "--interval", "2", "--cached-blocks", "2", "--mode", "feature-map",
                 "--region", "back"})
            .code == 2);
  CHECK(run_cli({"plan", "--blocks", "6", "--interval", "2", "--cached-blocks", "2", "--mode", "kv"}).code == 2);
  CHECK(run_cli({"plan", "--steps", "x"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  const auto cfg = dir / "run.json";
  std::ofstream(cfg) << R"({"steps": 20, "spec": {"n_blocks": 28}, "full_macs": 85.651, "budget": 53.532,
                            "boundary": 12})";
  auto r = run_cli({"plan", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(r.j()["cached_blocks"] == 21);
  r = run_cli({"plan", "--config", cfg.string(), "--boundary", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["boundary"] == 0);
  CHECK(r.j()["per_step"][19]["region_start"] == 8);

  std::ofstream(cfg, std::ios::trunc) << R"({"steps": 20, "bogus": 1})";
  CHECK(run_cli({"plan", "--config", cfg.string()}).code == 2);
  std::ofstream(cfg, std::ios::trunc) << "{not json";
  CHECK(run_cli({"plan", "--config", cfg.string()}).code == 2);
  CHECK(run_cli({"plan", "--config", (dir / "missing.json").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("config_from_json and parse_region") {
  const auto c = cli::config_from_json(json{{"seeds", {3, 4}}, {"solver", "ddim"}, {"region", "back"}, {"jobs", 2}});
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.solver == Solver::ddim);
  CHECK(c.region == "back");
  CHECK(c.jobs == 2);
  CHECK_THROWS_AS(cli::config_from_json(json{{"steps", "many"}}), ConfigError);
  CHECK_THROWS_AS(cli::config_from_json(json::array()), ConfigError);
  CHECK(cli::parse_region("back", 28, 21) == CacheRegion{8, 21});
  CHECK(cli::parse_region("I:3", 28, 21) == CacheRegion{3, 21});
  CHECK_THROWS_AS(cli::parse_region("I:3x", 28, 21), ConfigError);
}

TEST_CASE("init-model") {
  const auto dir = scratch("init");
  fs::create_directories(dir);
  REQUIRE(run_cli({"init-model", "--seed", "4", "--out", (dir / "a.ddit").string()}).code == 0);
  REQUIRE(run_cli({"init-model", "--seed", "4", "--out", (dir / "b.ddit").string()}).code == 0);
  REQUIRE(run_cli({"init-model", "--seed", "5", "--out", (dir / "c.ddit").string()}).code == 0);
  CHECK(slurp(dir / "a.ddit") == slurp(dir / "b.ddit"));
  CHECK(slurp(dir / "a.ddit") != slurp(dir / "c.ddit"));
  CHECK(run_cli({"init-model", "--heads", "5", "--out", (dir / "d.ddit").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("sample") {
  const auto dir = scratch("sample");
  fs::create_directories(dir);
  const auto model = (dir / "m.ddit").string();
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run_cli({"init-model", "--seed", "1", "--blocks", "6", "--out", model}).code == 0);

  const std::vector<std::string> base{"sample", "--model", model, "--steps", "10", "--interval", "2",
                                      "--cached-blocks", "3", "--boundary", "4", "--seed", "1,2,3"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("--out");
    args.push_back((dir / out).string());
    return run_cli(args);
  };

  const auto a = with({}, "a");
  REQUIRE(a.code == 0);
  const auto b = with({"--jobs", "3"}, "b");
  REQUIRE(b.code == 0);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < 60.0);

  for (const char* f : {"seed_1.pgm", "seed_2.pgm", "seed_3.pgm", "report_seed_1.json", "report_seed_3.json"}) {
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const json j = a.j();
  CHECK(j["runs"].size() == 3);
  CHECK(j["plan"]["cached_blocks"] == 3);
  const json rep = json::parse(slurp(dir / "a" / "report_seed_1.json"));
  CHECK(rep["total_blocks"] == rep["planned_blocks"]);
  CHECK(rep["total_blocks"] == 5 * 6 + 5 * 3);
  CHECK_FALSE(rep.contains("wall_ms"));

  SUBCASE("compare emits deviations") {
    const auto c = with({"--compare"}, "c");
    REQUIRE(c.code == 0);
    const json cj = c.j();
    CHECK(cj["runs"][0]["deviations"].size() == 10);
    CHECK(cj["runs"][0]["final_deviation"].get<double>() > 0.0);
    CHECK(slurp(dir / "c" / "seed_1.pgm") == slurp(dir / "a" / "seed_1.pgm"));
  }
  SUBCASE("no-cache run and comparisons") {
    const auto n = with({"--mode", "none"}, "none");
    REQUIRE(n.code == 0);
    CHECK(n.j()["plan"]["planned_blocks"] == 60);
    auto cmp = run_cli({"compare", (dir / "a").string(), (dir / "a").string()});
    REQUIRE(cmp.code == 0);
    CHECK(cmp.j()["mean"]["l2"] == 0.0);
    for (const auto& f : cmp.j()["files"]) CHECK(f["identical"] == true);
    cmp = run_cli({"compare", (dir / "none").string(), (dir / "a").string()});
    REQUIRE(cmp.code == 0);
    CHECK(cmp.j()["mean"]["l2"].get<double>() > 0.0);
    fs::remove(dir / "none" / "seed_3.pgm");
    CHECK(run_cli({"compare", (dir / "none").string(), (dir / "a").string()}).code == 2);
    CHECK(run_cli({"compare", (dir / "nowhere").string(), (dir / "a").string()}).code == 2);
  }
  SUBCASE("plan file") {
    const auto plan_path = (dir / "plan.json").string();
    REQUIRE(run_cli({"plan", "--steps", "10", "--blocks", "6", "--interval", "2", "--cached-blocks", "3",
                     "--boundary", "4", "--json-out", plan_path})
                .code == 0);
    REQUIRE(run_cli({"sample", "--model", model, "--steps", "10", "--plan-file", plan_path, "--seed", "1", "--out",
                     (dir / "pf").string()})
                .code == 0);
    CHECK(slurp(dir / "pf" / "seed_1.pgm") == slurp(dir / "a" / "seed_1.pgm"));
  }
  SUBCASE("errors") {
    CHECK(run_cli({"sample", "--model", (dir / "missing.ddit").string(), "--mode", "none"}).code == 2);
    CHECK(with({"--steps", "0"}, "e").code == 2);
    CHECK(with({"--blocks", "4"}, "e").code == 2);
    CHECK(with({"--jobs", "0"}, "e").code == 2);
    std::ofstream(dir / "junk.ddit") << "junk";
    CHECK(run_cli({"sample", "--model", (dir / "junk.ddit").string(), "--mode", "none"}).code == 3);
  }
  fs::remove_all(dir);
}

TEST_CASE("sample from a random model spec") {
  const auto dir = scratch("spec");
  const auto r = run_cli({"sample", "--channels", "3", "--classes", "3", "--class", "1", "--guidance", "2",
                          "--steps", "6", "--interval", "2", "--cached-blocks", "2", "--region", "front", "--solver",
                          "ddim", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "seed_0.ppm"));
  CHECK(r.j()["runs"][0]["total_blocks"] == 2 * (3 * 4 + 3 * 2));
  CHECK(run_cli({"sample", "--classes", "3", "--class", "3", "--mode", "none", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("analyze") {
  const auto dir = scratch("analyze");
  REQUIRE(run_cli({"sample", "--steps", "5", "--mode", "none", "--seed", "1,2", "--out", dir.string()}).code == 0);
  const auto a = (dir / "seed_1.pgm").string(), b = (dir / "seed_2.pgm").string();
  auto r = run_cli({"analyze", a, b});
  REQUIRE(r.code == 0);
  CHECK(r.j()["images"].size() == 2);
  CHECK(r.j()["images"][0]["avg_gradient"].get<double>() > 0.0);
  CHECK_FALSE(r.j()["images"][0].contains("high_freq_error"));

  const auto diff = (dir / "diff.pgm").string();
  const auto report = (dir / "metrics.json").string();
  r = run_cli({"analyze", b, "--ref", a, "--diff-out", diff, "--report", report, "--cutoff", "0.4"});
  REQUIRE(r.code == 0);
  CHECK(r.j()["images"][0]["high_freq_error"].get<double>() > 0.0);
  CHECK(r.j()["cutoff"] == 0.4);
  CHECK(fs::exists(diff));
  CHECK(json::parse(slurp(report)) == r.j());
  r = run_cli({"analyze", a, "--ref", a});
  CHECK(r.j()["images"][0]["high_freq_error"] == 0.0);

  CHECK(run_cli({"analyze", a, b, "--ref", a, "--diff-out", diff}).code == 2);
  CHECK(run_cli({"analyze", a, "--cutoff", "1.5", "--ref", b}).code == 2);
  CHECK(run_cli({"analyze", (dir / "nope.pgm").string()}).code == 3);
  fs::remove_all(dir);
}

TEST_CASE("executable exit codes") {
  const auto dir = scratch("exe");
  CHECK(run_binary("plan --steps 20 --blocks 28 --full-macs 85.651 --budget 53.532") == 0);
  CHECK(run_binary("plan --steps 20 --blocks 28 --full-macs 85.651 --budget 1") == 2);
  CHECK(run_binary("no-such-command") == 2);
  CHECK(run_binary("init-model --out " + (dir / "m.ddit").string()) == 0);
  CHECK(run_binary("sample --mode none --steps 3 --out " + dir.string()) == 0);
  fs::remove_all(dir);
}
