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

#include "lpn/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "lpn/analysis.hpp"
#include "lpn/config.hpp"
#include "lpn/error.hpp"
#include "lpn/svgplot.hpp"

namespace lpn {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = cells;
      first = false;
    } else {
      csv.rows.push_back(cells);
    }
  }
  if (csv.header.empty() || csv.rows.empty()) {
    throw IoError("csv " + path.string() + " is empty");
  }
  return csv;
}

int column_index(const Csv& csv, const std::string& name, const fs::path& path) {
  for (size_t i = 0; i < csv.header.size(); ++i) {
    if (csv.header[i] == name) return static_cast<int>(i);
  }
  throw IoError("csv " + path.string() + " has no column '" + name + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

struct Metrics {
  double reward = 0.0;
  double smoothness = 0.0;
  double hf_ratio = 0.0;
  double jerk = 0.0;
};

// Deterministic rollout of a checkpoint and the full metric set over it.
Metrics evaluate_checkpoint(const Policy& policy, const std::string& env_name, int episodes,
                            int cycles, uint64_t seed,
                            const std::optional<std::string>& ref_csv,
                            ActionTrace* trace_out = nullptr) {
  EnvOverrides ov;
  if (ref_csv) ov.reference_csv = *ref_csv;
  auto env = make_env(env_name, seed, ov);
  env->set_tracing(true);
  const EvalResult ev = eval_policy(policy, *env, episodes, cycles, seed);
  Metrics m;
  m.reward = ev.reward_imitation;
  m.smoothness = action_smoothness(ev.actions);
  m.hf_ratio = high_freq_ratio(ev.actions);
  m.jerk = motion_jerk(env->sim_trace());
  if (trace_out) *trace_out = ev.actions;
  return m;
}

// --- train ------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::string& out_dir_override) {
  RunConfig cfg = parse_config_file(config_path);
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  if (cfg.out_dir.empty()) {
    throw ConfigError("train: no output directory (set out_dir in the config or --out-dir)");
  }
  fs::create_directories(cfg.out_dir);
  write_config(cfg, fs::path(cfg.out_dir) / "config.txt");

  const TrainResult result = train(cfg);
  if (result.aborted) {
    throw NumericalError("training aborted on a non-finite gradient; last-good checkpoint kept");
  }
  const IterStats& last = result.stats.back();
  std::cout << "trained " << result.iterations_run << " iterations; final imitation reward "
            << last.reward_imitation << "\n";
  std::cout << "checkpoint: " << (fs::path(cfg.out_dir) / "checkpoint.json").string() << "\n";
  return 0;
}

// --- eval -------------------------------------------------------------

int cmd_eval(const std::string& checkpoint, std::string env_name, int episodes, int cycles,
             const std::vector<uint64_t>& seeds, std::string out_path,
             const std::string& trace_out, const std::optional<std::string>& ref_csv) {
  const Policy policy = load_checkpoint(checkpoint);
  if (env_name.empty()) env_name = policy.env_name;
  if (out_path.empty()) {
    out_path = (fs::path(checkpoint).parent_path() / "metrics.csv").string();
  }

  const std::vector<std::pair<std::string, double Metrics::*>> fields = {
      {"reward", &Metrics::reward},
      {"action_smoothness", &Metrics::smoothness},
      {"high_freq_ratio", &Metrics::hf_ratio},
      {"motion_jerk", &Metrics::jerk}};

  std::ostringstream csv;
  csv << "metric,value\n";
  std::vector<Metrics> all;
  ActionTrace first_trace;
  for (size_t k = 0; k < seeds.size(); ++k) {
    ActionTrace trace;
    const Metrics m =
        evaluate_checkpoint(policy, env_name, episodes, cycles, seeds[k], ref_csv, &trace);
    if (k == 0) first_trace = trace;
    all.push_back(m);
    if (seeds.size() > 1) {
      for (const auto& [name, member] : fields) {
        csv << name << ":seed" << seeds[k] << "," << g17(m.*member) << "\n";
      }
    }
  }
  for (const auto& [name, member] : fields) {
    double mean = 0.0;
    for (const Metrics& m : all) mean += m.*member;
    mean /= static_cast<double>(all.size());
    csv << name << (seeds.size() > 1 ? ":mean" : "") << "," << g17(mean) << "\n";
    std::cout << name << " = " << mean << "\n";
  }
  write_text(out_path, csv.str());

  if (!trace_out.empty()) {
    std::ostringstream tr;
    tr << "t";
    for (int j = 0; j < first_trace.m; ++j) tr << ",a" << j;
    tr << "\n";
    if (!first_trace.episodes.empty()) {
      const Mat& ep = first_trace.episodes.front();
      for (int t = 0; t < ep.rows; ++t) {
        tr << g17(t / first_trace.rate_hz);
        for (int j = 0; j < ep.cols; ++j) tr << "," << g17(ep(t, j));
        tr << "\n";
      }
    }
    write_text(trace_out, tr.str());
  }
  return 0;
}

// --- export / playback / reduce ------------------------------------------

int cmd_export(const std::string& checkpoint, std::string env_name, double gain_hz,
               double action_hz, const std::string& out_path,
               const std::optional<std::string>& ref_csv) {
  const Policy policy = load_checkpoint(checkpoint, PolicyKind::LPN);
  if (env_name.empty()) env_name = policy.env_name;
  EnvOverrides ov;
  if (ref_csv) ov.reference_csv = *ref_csv;
  auto env = make_env(env_name, 0, ov);
  const GainSchedule schedule = export_gain_schedule(policy, *env, gain_hz, action_hz);
  if (out_path.empty()) throw ConfigError("export: --out is required");
  if (fs::path(out_path).has_parent_path()) {
    fs::create_directories(fs::path(out_path).parent_path());
  }
  save_gain_schedule(schedule, out_path);
  std::cout << "wrote " << schedule.gains.size() << " gain entries to " << out_path << "\n";
  return 0;
}

int cmd_playback(const std::string& schedule_path, const std::string& env_name, int episodes,
                 int cycles, uint64_t seed, const std::string& out_path,
                 const std::optional<std::string>& ref_csv) {
  const GainSchedule schedule = load_gain_schedule(schedule_path);
  EnvOverrides ov;
  if (ref_csv) ov.reference_csv = *ref_csv;
  auto env = make_env(env_name, seed, ov);
  const PlaybackResult pb = playback(schedule, *env, episodes, cycles, seed);
  std::cout << "playback reward = " << pb.reward_imitation << "\n";
  if (!out_path.empty()) {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "reward," << g17(pb.reward_imitation) << "\n";
    csv << "action_smoothness," << g17(action_smoothness(pb.actions)) << "\n";
    write_text(out_path, csv.str());
  }
  return 0;
}

int cmd_reduce(const std::string& checkpoint, std::string env_name, int rank,
               const std::string& out_dir, int episodes, uint64_t seed,
               const std::optional<std::string>& ref_csv) {
  const Policy policy = load_checkpoint(checkpoint, PolicyKind::LPN);
  if (env_name.empty()) env_name = policy.env_name;
  if (out_dir.empty()) throw ConfigError("reduce: --out-dir is required");
  fs::create_directories(out_dir);

  EnvOverrides ov;
  if (ref_csv) ov.reference_csv = *ref_csv;
  auto env = make_env(env_name, seed, ov);
  const double control_hz = static_cast<double>(env->spec().control_hz);
  const GainSchedule full = export_gain_schedule(policy, *env, control_hz, control_hz);
  const int max_rank = std::min(full.m, full.n);
  if (rank < 1 || rank > max_rank) {
    throw ArgumentError("reduce: rank must be in [1, " + std::to_string(max_rank) + "]");
  }

  const int cycles = 5;
  const double full_reward = playback(full, *env, episodes, cycles, seed).reward_imitation;

  std::ostringstream sweep;
  sweep << "k,reward,ratio\n";
  for (int k = 1; k <= max_rank; ++k) {
    const GainSchedule reduced = reduce_gains(full, k);
    const double reward = playback(reduced, *env, episodes, cycles, seed).reward_imitation;
    sweep << k << "," << g17(reward) << "," << g17(reward / full_reward) << "\n";
  }
  write_text(fs::path(out_dir) / "rank_sweep.csv", sweep.str());

  const GainSchedule reduced = reduce_gains(full, rank);
  save_gain_schedule(reduced, fs::path(out_dir) / "schedule_reduced.txt");
  const double reduced_reward = playback(reduced, *env, episodes, cycles, seed).reward_imitation;

  std::ostringstream report;
  report << "metric,value\n";
  report << "rank," << rank << "\n";
  report << "reward_full," << g17(full_reward) << "\n";
  report << "reward_reduced," << g17(reduced_reward) << "\n";
  report << "reward_ratio," << g17(reduced_reward / full_reward) << "\n";
  write_text(fs::path(out_dir) / "reduce_report.csv", report.str());
  std::cout << "rank " << rank << " retains " << reduced_reward / full_reward
            << " of the playback reward\n";
  return 0;
}

// --- plot -------------------------------------------------------------

int cmd_plot(const std::string& kind, const std::vector<std::string>& inputs,
             const std::string& y_column, const std::string& out_path) {
  if (inputs.empty()) throw ConfigError("plot: no input csv");
  if (out_path.empty()) throw ConfigError("plot: --out is required");
  std::string svg;

  if (kind == "curve") {
    std::vector<Series> series;
    for (const std::string& input : inputs) {
      const Csv csv = read_csv(input);
      const int xi = 0;
      const int yi = column_index(csv, y_column, input);
      Series s;
      s.label = fs::path(input).stem().string();
      for (const auto& row : csv.rows) {
        s.x.push_back(std::stod(row[xi]));
        s.y.push_back(std::stod(row[yi]));
      }
      series.push_back(std::move(s));
    }
    svg = render_line_chart(series, "learning curve", "iteration", y_column);
  } else if (kind == "actions") {
    std::vector<Series> series;
    for (const std::string& input : inputs) {
      const Csv csv = read_csv(input);
      for (size_t col = 1; col < csv.header.size(); ++col) {
        Series s;
        s.label = fs::path(input).stem().string() + ":" + csv.header[col];
        for (const auto& row : csv.rows) {
          s.x.push_back(std::stod(row[0]));
          s.y.push_back(std::stod(row[col]));
        }
        series.push_back(std::move(s));
      }
    }
    svg = render_line_chart(series, "actions", "time [s]", "target angle [rad]");
  } else if (kind == "bars") {
    if (inputs.size() != 1) throw ConfigError("plot: bars takes exactly one csv");
    const Csv csv = read_csv(inputs[0]);
    std::vector<std::string> labels;
    Vec values;
    for (const auto& row : csv.rows) {
      if (row.size() < 2) throw IoError("csv " + inputs[0] + ": short row");
      labels.push_back(row[0]);
      values.push_back(std::stod(row[1]));
    }
    svg = render_bar_chart(labels, values, fs::path(inputs[0]).stem().string());
  } else {
    throw ConfigError("plot: unknown kind '" + kind + "' (expected curve, actions or bars)");
  }
  write_text(out_path, svg);
  return 0;
}

// --- compare ----------------------------------------------------------

struct Method {
  std::string name;
  PolicyKind kind;
  Regularizer reg;
  double w_action = 0.0;
};

const std::vector<Method>& method_matrix() {
  static const std::vector<Method> methods = {
      {"lpn_jac", PolicyKind::LPN, Regularizer::JacPen, 0.0},
      {"ff_jac", PolicyKind::FF, Regularizer::JacPen, 0.0},
      {"lipschitz", PolicyKind::FF, Regularizer::Lipschitz, 0.0},
      {"none", PolicyKind::FF, Regularizer::None, 0.0},
      {"reward_0.01", PolicyKind::FF, Regularizer::ActionChangeReward, 0.01},
      {"reward_0.1", PolicyKind::FF, Regularizer::ActionChangeReward, 0.1},
      {"reward_1", PolicyKind::FF, Regularizer::ActionChangeReward, 1.0},
  };
  return methods;
}

int cmd_compare(const std::string& config_path, const std::vector<uint64_t>& seeds,
                const std::string& out_dir, const std::vector<std::string>& method_filter,
                int episodes) {
  if (out_dir.empty()) throw ConfigError("compare: --out-dir is required");
  const RunConfig base = parse_config_file(config_path);
  fs::create_directories(out_dir);

  std::vector<Method> methods;
  for (const Method& m : method_matrix()) {
    if (method_filter.empty() ||
        std::find(method_filter.begin(), method_filter.end(), m.name) != method_filter.end()) {
      methods.push_back(m);
    }
  }
  if (methods.empty()) throw ConfigError("compare: no methods selected");

  std::ostringstream runs;
  runs << "method,seed,reward,action_smoothness,high_freq_ratio,motion_jerk\n";
  std::map<std::string, Metrics> means;

  for (const Method& method : methods) {
    Metrics sum;
    for (uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.policy = method.kind;
      cfg.train.regularizer = method.reg;
      if (method.reg == Regularizer::ActionChangeReward) cfg.train.w_action = method.w_action;
      cfg.train.seed = seed;
      cfg.out_dir =
          (fs::path(out_dir) / method.name / ("seed" + std::to_string(seed))).string();
      fs::create_directories(cfg.out_dir);
      write_config(cfg, fs::path(cfg.out_dir) / "config.txt");

      std::cout << "compare: training " << method.name << " seed " << seed << "\n";
      const TrainResult result = train(cfg);
      if (result.aborted) {
        throw NumericalError("compare: training aborted for " + method.name);
      }
      const Metrics m = evaluate_checkpoint(result.policy, base.env_name, episodes, 5,
                                            seed + 7777, base.ref_csv);
      runs << method.name << "," << seed << "," << g17(m.reward) << "," << g17(m.smoothness)
           << "," << g17(m.hf_ratio) << "," << g17(m.jerk) << "\n";
      sum.reward += m.reward;
      sum.smoothness += m.smoothness;
      sum.hf_ratio += m.hf_ratio;
      sum.jerk += m.jerk;
    }
    const double inv = 1.0 / static_cast<double>(seeds.size());
    means[method.name] = {sum.reward * inv, sum.smoothness * inv, sum.hf_ratio * inv,
                          sum.jerk * inv};
  }
  write_text(fs::path(out_dir) / "compare_runs.csv", runs.str());

  std::ostringstream table;
  table << "metric";
  for (const Method& m : methods) table << "," << m.name;
  table << "\n";
  const std::vector<std::pair<std::string, double Metrics::*>> rows = {
      {"reward", &Metrics::reward},
      {"action_smoothness", &Metrics::smoothness},
      {"high_freq_ratio", &Metrics::hf_ratio},
      {"motion_jerk", &Metrics::jerk}};
  for (const auto& [name, member] : rows) {
    table << name;
    for (const Method& m : methods) table << "," << g17(means[m.name].*member);
    table << "\n";
  }
  write_text(fs::path(out_dir) / "table1.csv", table.str());
  std::cout << "wrote " << (fs::path(out_dir) / "table1.csv").string() << "\n";
  return 0;
}

std::vector<uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) seeds.push_back(std::stoull(cell));
  }
  if (seeds.empty()) throw ConfigError("expected a comma-separated seed list");
  return seeds;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"smooth time-varying linear feedback policies for planar motion imitation"};
  app.require_subcommand(1);

  // train
  std::string train_config, train_out;
  CLI::App* train_cmd = app.add_subcommand("train", "train a policy from a config file");
  train_cmd->add_option("config", train_config, "key = value config file")->required();
  train_cmd->add_option("--out-dir", train_out, "override the config's out_dir");

  // eval
  std::string eval_ckpt, eval_env, eval_out, eval_trace_out, eval_seeds = "0", eval_ref;
  int eval_episodes = 3, eval_cycles = 5;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint: reward + smoothness");
  eval_cmd->add_option("checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--env", eval_env, "environment (defaults to the checkpoint's)");
  eval_cmd->add_option("--episodes", eval_episodes);
  eval_cmd->add_option("--cycles", eval_cycles);
  eval_cmd->add_option("--seeds", eval_seeds, "comma-separated evaluation seeds");
  eval_cmd->add_option("--out", eval_out, "metrics csv (default: beside the checkpoint)");
  eval_cmd->add_option("--trace-out", eval_trace_out, "write the first episode's actions");
  eval_cmd->add_option("--ref-csv", eval_ref, "reference motion csv");

  // export
  std::string export_ckpt, export_env, export_out, export_ref;
  double export_gain_hz = 30.0, export_action_hz = 30.0;
  CLI::App* export_cmd = app.add_subcommand("export", "precompute a gain schedule from an LPN");
  export_cmd->add_option("checkpoint", export_ckpt)->required();
  export_cmd->add_option("--env", export_env);
  export_cmd->add_option("--gain-hz", export_gain_hz);
  export_cmd->add_option("--action-hz", export_action_hz);
  export_cmd->add_option("--out", export_out)->required();
  export_cmd->add_option("--ref-csv", export_ref);

  // playback
  std::string pb_schedule, pb_env, pb_out, pb_ref;
  int pb_episodes = 3, pb_cycles = 5;
  uint64_t pb_seed = 0;
  CLI::App* pb_cmd = app.add_subcommand("playback", "run a gain schedule without the network");
  pb_cmd->add_option("schedule", pb_schedule)->required();
  pb_cmd->add_option("--env", pb_env)->required();
  pb_cmd->add_option("--episodes", pb_episodes);
  pb_cmd->add_option("--cycles", pb_cycles);
  pb_cmd->add_option("--seed", pb_seed);
  pb_cmd->add_option("--out", pb_out, "optional metrics csv");
  pb_cmd->add_option("--ref-csv", pb_ref);

  // reduce
  std::string red_ckpt, red_env, red_out, red_ref;
  int red_rank = 1, red_episodes = 3;
  uint64_t red_seed = 0;
  CLI::App* red_cmd = app.add_subcommand("reduce", "rank-reduce the gain schedule via SVD");
  red_cmd->add_option("checkpoint", red_ckpt)->required();
  red_cmd->add_option("--env", red_env);
  red_cmd->add_option("--rank", red_rank)->required();
  red_cmd->add_option("--out-dir", red_out)->required();
  red_cmd->add_option("--episodes", red_episodes);
  red_cmd->add_option("--seed", red_seed);
  red_cmd->add_option("--ref-csv", red_ref);

  // plot
  std::string plot_kind = "curve", plot_y = "reward_imitation", plot_out;
  std::vector<std::string> plot_inputs;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render csv outputs as svg charts");
  plot_cmd->add_option("--kind", plot_kind, "curve, actions or bars");
  plot_cmd->add_option("inputs", plot_inputs, "input csv files")->required();
  plot_cmd->add_option("--y", plot_y, "y column for curve plots");
  plot_cmd->add_option("--out", plot_out)->required();

  // compare
  std::string cmp_config, cmp_out, cmp_seeds = "1,2,3";
  std::vector<std::string> cmp_methods;
  int cmp_episodes = 3;
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "train and evaluate the regularizer baseline matrix");
  cmp_cmd->add_option("config", cmp_config)->required();
  cmp_cmd->add_option("--seeds", cmp_seeds);
  cmp_cmd->add_option("--out-dir", cmp_out)->required();
  cmp_cmd->add_option("--methods", cmp_methods,
                      "subset of: lpn_jac ff_jac lipschitz none reward_0.01 reward_0.1 reward_1");
  cmp_cmd->add_option("--episodes", cmp_episodes);

  std::vector<const char*> argv;
  argv.push_back("lpn");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_config, train_out);
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_ckpt, eval_env, eval_episodes, eval_cycles,
                      parse_seed_list(eval_seeds), eval_out, eval_trace_out,
                      eval_ref.empty() ? std::nullopt : std::optional<std::string>(eval_ref));
    }
    if (export_cmd->parsed()) {
      return cmd_export(export_ckpt, export_env, export_gain_hz, export_action_hz, export_out,
                        export_ref.empty() ? std::nullopt
                                           : std::optional<std::string>(export_ref));
    }
    if (pb_cmd->parsed()) {
      return cmd_playback(pb_schedule, pb_env, pb_episodes, pb_cycles, pb_seed, pb_out,
                          pb_ref.empty() ? std::nullopt : std::optional<std::string>(pb_ref));
    }
    if (red_cmd->parsed()) {
      return cmd_reduce(red_ckpt, red_env, red_rank, red_out, red_episodes, red_seed,
                        red_ref.empty() ? std::nullopt : std::optional<std::string>(red_ref));
    }
    if (plot_cmd->parsed()) return cmd_plot(plot_kind, plot_inputs, plot_y, plot_out);
    if (cmp_cmd->parsed()) {
      return cmd_compare(cmp_config, parse_seed_list(cmp_seeds), cmp_out, cmp_methods,
                         cmp_episodes);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace lpn
