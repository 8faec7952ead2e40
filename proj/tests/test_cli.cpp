// Copyright 2026 The lpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpn/analysis.hpp"
#include "lpn/cli.hpp"
#include "lpn/config.hpp"
#include "lpn/error.hpp"

using namespace lpn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lpn_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Stats CSV with the wall-clock column blanked; everything else must be
// byte-identical across reruns.
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const size_t last = line.rfind(',');
    out << line.substr(0, last) << "\n";
  }
  return out.str();
}

std::string tiny_train_config(const fs::path& out_dir, uint64_t seed = 3) {
  std::ostringstream cfg;
  cfg << "# desk-scale smoke configuration\n";
  cfg << "env = pendulum-track\n";
  cfg << "policy = lpn\n";
  cfg << "regularizer = jac_pen\n";
  cfg << "seed = " << seed << "\n";
  cfg << "num_envs = 2\n";
  cfg << "samples_per_iter = 32\n";
  cfg << "minibatch = 16\n";
  cfg << "epochs = 2\n";
  cfg << "max_iters = 3\n";
  cfg << "hidden = 8\n";
  cfg << "out_dir = " << out_dir.string() << "\n";
  return cfg.str();
}

int count_substr(const std::string& text, const std::string& needle) {
  int count = 0;
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("a full config round-trips") {
    RunConfig cfg;
    cfg.env_name = "acrobot-track";
    cfg.policy = PolicyKind::FF;
    cfg.train.regularizer = Regularizer::Lipschitz;
    cfg.train.seed = 42;
    cfg.train.lr = 1e-4;
    cfg.train.w_jac = 2.5;
    cfg.train.early_stop = true;
    cfg.out_dir = "runs/x";
    cfg.trace = true;
    cfg.ref_csv = "refs/motion.csv";
    const RunConfig parsed = parse_config_text(config_to_text(cfg), "roundtrip");
    CHECK(parsed == cfg);
  }

  SUBCASE("missing env is named") {
    CHECK_THROWS_WITH_AS(parse_config_text("policy = lpn\n", "cfg"), doctest::Contains("env"),
                         ConfigError);
  }

  SUBCASE("unknown keys are rejected with their line") {
    const char* text = "env = pendulum-track\nwibble = 3\n";
    CHECK_THROWS_WITH_AS(parse_config_text(text, "cfg"), doctest::Contains("cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(text, "cfg"), doctest::Contains("wibble"),
                         ConfigError);
  }

  SUBCASE("malformed values carry line context") {
    CHECK_THROWS_WITH_AS(parse_config_text("env = pendulum-track\nlr = fast\n", "cfg"),
                         doctest::Contains("cfg:2"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("env = pendulum-track\ntrace = maybe\n", "cfg"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("env = pendulum-track\nbroken line\n", "cfg"), ConfigError);
  }

  SUBCASE("comments and blank lines are fine") {
    const char* text =
        "# comment\n"
        "\n"
        "env = pendulum-track  # trailing comment\n";
    CHECK(parse_config_text(text, "cfg").env_name == "pendulum-track");
  }

  SUBCASE("cross-field validation applies") {
    CHECK_THROWS_AS(parse_config_text("env = pendulum-track\nminibatch = 100\n", "cfg"),
                    ConfigError);
  }
}

TEST_CASE("cli train writes artifacts and is deterministic") {
  const fs::path dir = fresh_dir("train");
  const fs::path cfg_path = dir / "run.cfg";
  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";
  std::ofstream(cfg_path) << tiny_train_config(out1);

  REQUIRE(cli_main({"train", cfg_path.string()}) == 0);
  CHECK(fs::exists(out1 / "stats.csv"));
  CHECK(fs::exists(out1 / "checkpoint.json"));
  CHECK(fs::exists(out1 / "config.txt"));

  // The provenance copy re-parses to an equal config.
  const RunConfig original = parse_config_file(cfg_path);
  const RunConfig copy = parse_config_file(out1 / "config.txt");
  CHECK(copy == original);

  // Rerun into a fresh directory: stats identical apart from wall time.
  REQUIRE(cli_main({"train", cfg_path.string(), "--out-dir", out2.string()}) == 0);
  const std::string stats1 = strip_wall_ms(read_file(out1 / "stats.csv"));
  const std::string stats2 = strip_wall_ms(read_file(out2 / "stats.csv"));
  CHECK(stats1 == stats2);
  CHECK(read_file(out1 / "checkpoint.json") == read_file(out2 / "checkpoint.json"));

  SUBCASE("eval metrics match the library path") {
    REQUIRE(cli_main({"eval", (out1 / "checkpoint.json").string(), "--episodes", "2", "--cycles",
                      "5", "--seeds", "11", "--out", (out1 / "metrics.csv").string()}) == 0);
    const std::string metrics = read_file(out1 / "metrics.csv");

    const Policy policy = load_checkpoint(out1 / "checkpoint.json");
    auto env = make_env("pendulum-track", 11);
    env->set_tracing(true);
    const EvalResult ev = eval_policy(policy, *env, 2, 5, 11);
    char expect[64];
    std::snprintf(expect, sizeof(expect), "reward,%.17g", ev.reward_imitation);
    CHECK(metrics.find(expect) != std::string::npos);
    std::snprintf(expect, sizeof(expect), "action_smoothness,%.17g",
                  action_smoothness(ev.actions));
    CHECK(metrics.find(expect) != std::string::npos);
    std::snprintf(expect, sizeof(expect), "high_freq_ratio,%.17g", high_freq_ratio(ev.actions));
    CHECK(metrics.find(expect) != std::string::npos);
    std::snprintf(expect, sizeof(expect), "motion_jerk,%.17g", motion_jerk(env->sim_trace()));
    CHECK(metrics.find(expect) != std::string::npos);

    // Rerunning eval is byte-stable.
    REQUIRE(cli_main({"eval", (out1 / "checkpoint.json").string(), "--episodes", "2", "--cycles",
                      "5", "--seeds", "11", "--out", (out1 / "metrics2.csv").string()}) == 0);
    CHECK(read_file(out1 / "metrics2.csv") == metrics);
  }

  SUBCASE("batch eval emits per-seed and mean rows") {
    REQUIRE(cli_main({"eval", (out1 / "checkpoint.json").string(), "--episodes", "1", "--seeds",
                      "1,2,3", "--out", (out1 / "batch.csv").string()}) == 0);
    const std::string metrics = read_file(out1 / "batch.csv");
    CHECK(metrics.find("reward:seed1,") != std::string::npos);
    CHECK(metrics.find("reward:seed2,") != std::string::npos);
    CHECK(metrics.find("reward:seed3,") != std::string::npos);
    CHECK(metrics.find("reward:mean,") != std::string::npos);
  }
}

TEST_CASE("cli error paths and exit codes") {
  const fs::path dir = fresh_dir("errors");

  SUBCASE("missing config file is an io error") {
    CHECK(cli_main({"train", (dir / "nope.cfg").string()}) == 4);
  }

  SUBCASE("config errors exit with 2") {
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "policy = lpn\n";  // missing env
    CHECK(cli_main({"train", bad.string()}) == 2);
  }

  SUBCASE("unknown subcommand exits with 2") {
    CHECK(cli_main({"frobnicate"}) == 2);
  }

  SUBCASE("export rejects rates that do not divide") {
    const fs::path cfg_path = dir / "run.cfg";
    const fs::path out = dir / "out";
    std::ofstream(cfg_path) << tiny_train_config(out, 5);
    REQUIRE(cli_main({"train", cfg_path.string()}) == 0);
    CHECK(cli_main({"export", (out / "checkpoint.json").string(), "--gain-hz", "20",
                    "--action-hz", "30", "--out", (out / "s.txt").string()}) == 2);
    CHECK(cli_main({"export", (out / "checkpoint.json").string(), "--gain-hz", "15",
                    "--action-hz", "30", "--out", (out / "s.txt").string()}) == 0);
    CHECK(fs::exists(out / "s.txt"));
  }
}

TEST_CASE("cli export, playback and reduce pipeline") {
  const fs::path dir = fresh_dir("pipeline");
  const fs::path cfg_path = dir / "run.cfg";
  const fs::path out = dir / "out";
  std::ofstream(cfg_path) << tiny_train_config(out, 7);
  REQUIRE(cli_main({"train", cfg_path.string()}) == 0);
  const std::string ckpt = (out / "checkpoint.json").string();

  REQUIRE(cli_main({"export", ckpt, "--gain-hz", "30", "--action-hz", "30", "--out",
                    (out / "schedule.txt").string()}) == 0);

  // Export twice: byte-identical.
  REQUIRE(cli_main({"export", ckpt, "--gain-hz", "30", "--action-hz", "30", "--out",
                    (out / "schedule2.txt").string()}) == 0);
  CHECK(read_file(out / "schedule.txt") == read_file(out / "schedule2.txt"));

  REQUIRE(cli_main({"playback", (out / "schedule.txt").string(), "--env", "pendulum-track",
                    "--episodes", "1", "--seed", "3", "--out",
                    (out / "playback.csv").string()}) == 0);
  CHECK(read_file(out / "playback.csv").find("reward,") != std::string::npos);

  REQUIRE(cli_main({"reduce", ckpt, "--rank", "1", "--out-dir", (out / "reduce").string(),
                    "--episodes", "1", "--seed", "3"}) == 0);
  const std::string report = read_file(out / "reduce" / "reduce_report.csv");
  CHECK(report.find("reward_ratio,") != std::string::npos);
  CHECK(fs::exists(out / "reduce" / "schedule_reduced.txt"));
  CHECK(fs::exists(out / "reduce" / "rank_sweep.csv"));

  // Pendulum gains are m=1: rank 1 is already full rank, ratio is exactly 1
  // up to roundoff.
  const size_t pos = report.find("reward_ratio,");
  const double ratio = std::stod(report.substr(pos + 13));
  CHECK(std::abs(ratio - 1.0) <= 1e-9);
}

TEST_CASE("cli plot") {
  const fs::path dir = fresh_dir("plot");

  SUBCASE("empty csv is an io error") {
    const fs::path empty = dir / "empty.csv";
    std::ofstream(empty) << "";
    CHECK(cli_main({"plot", empty.string(), "--out", (dir / "x.svg").string()}) == 4);
  }

  SUBCASE("two-run overlay renders two polylines, deterministically") {
    const fs::path a = dir / "a.csv";
    const fs::path b = dir / "b.csv";
    std::ofstream(a) << "iter,reward_imitation\n1,0.5\n2,0.6\n3,0.7\n";
    std::ofstream(b) << "iter,reward_imitation\n1,0.4\n2,0.5\n3,0.9\n";
    REQUIRE(cli_main({"plot", a.string(), b.string(), "--out", (dir / "c.svg").string()}) == 0);
    const std::string svg = read_file(dir / "c.svg");
    CHECK(count_substr(svg, "<polyline") == 2);

    REQUIRE(cli_main({"plot", a.string(), b.string(), "--out", (dir / "c2.svg").string()}) == 0);
    CHECK(read_file(dir / "c2.svg") == svg);
  }

  SUBCASE("bar chart from a metrics csv") {
    const fs::path m = dir / "metrics.csv";
    std::ofstream(m) << "metric,value\nreward,0.9\naction_smoothness,0.001\n";
    REQUIRE(cli_main({"plot", "--kind", "bars", m.string(), "--out",
                      (dir / "bars.svg").string()}) == 0);
    CHECK(count_substr(read_file(dir / "bars.svg"), "<rect") >= 2);
  }

  SUBCASE("action trace plot") {
    const fs::path t = dir / "trace.csv";
    std::ofstream(t) << "t,a0\n0,0.1\n0.033,0.2\n0.066,0.15\n";
    REQUIRE(cli_main({"plot", "--kind", "actions", t.string(), "--out",
                      (dir / "act.svg").string()}) == 0);
    CHECK(count_substr(read_file(dir / "act.svg"), "<polyline") == 1);
  }
}

TEST_CASE("cli compare smoke run") {
  const fs::path dir = fresh_dir("compare");
  const fs::path cfg_path = dir / "base.cfg";
  std::ofstream(cfg_path) << tiny_train_config(dir / "unused", 9);

  REQUIRE(cli_main({"compare", cfg_path.string(), "--seeds", "1", "--out-dir",
                    (dir / "cmp").string(), "--methods", "lpn_jac", "none", "--episodes",
                    "1"}) == 0);
  const std::string table = read_file(dir / "cmp" / "table1.csv");
  CHECK(table.find("metric,lpn_jac,none") != std::string::npos);
  CHECK(count_substr(table, "\n") == 5);  // header + 4 metric rows

  const std::string runs = read_file(dir / "cmp" / "compare_runs.csv");
  CHECK(runs.find("lpn_jac,1,") != std::string::npos);
  CHECK(runs.find("none,1,") != std::string::npos);
  CHECK(fs::exists(dir / "cmp" / "lpn_jac" / "seed1" / "checkpoint.json"));
}
