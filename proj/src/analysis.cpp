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

#include "lpn/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lpn/error.hpp"

namespace lpn {

double action_smoothness(const ActionTrace& trace) {
  double acc = 0.0;
  int used = 0;
  for (const Mat& ep : trace.episodes) {
    if (ep.rows < 3) {
      std::cerr << "action_smoothness: skipping episode with " << ep.rows << " actions\n";
      continue;
    }
    double sum = 0.0;
    for (int t = 1; t < ep.rows; ++t) {
      for (int j = 0; j < ep.cols; ++j) {
        const double d = ep(t, j) - ep(t - 1, j);
        sum += d * d;
      }
    }
    acc += sum / static_cast<double>(ep.rows - 2);
    ++used;
  }
  if (used == 0) throw ArgumentError("action_smoothness: no episode with at least 3 actions");
  return acc / used;
}

double high_freq_ratio(const ActionTrace& trace, double cutoff_hz) {
  double acc = 0.0;
  int used = 0;
  for (const Mat& ep : trace.episodes) {
    if (ep.rows < 32) {
      std::cerr << "high_freq_ratio: skipping episode with " << ep.rows << " samples\n";
      continue;
    }
    double ep_acc = 0.0;
    for (int j = 0; j < ep.cols; ++j) {
      Vec x(ep.rows);
      for (int t = 0; t < ep.rows; ++t) x[t] = ep(t, j);
      const Spectrum sp = rdft_energy(x, trace.rate_hz);
      double non_dc = 0.0, high = 0.0, all = sp.energy[0];
      for (size_t k = 1; k < sp.energy.size(); ++k) {
        non_dc += sp.energy[k];
        all += sp.energy[k];
        if (sp.freq_hz[k] > cutoff_hz) high += sp.energy[k];
      }
      // A constant signal has no non-DC energy; define its ratio as zero.
      ep_acc += (non_dc > 1e-12 * std::max(all, 1e-300)) ? high / non_dc : 0.0;
    }
    acc += ep_acc / ep.cols;
    ++used;
  }
  if (used == 0) throw ArgumentError("high_freq_ratio: no episode with at least 32 samples");
  return acc / used;
}

double motion_jerk(const SimRateTrace& trace) {
  if (trace.joints < 1) throw ArgumentError("motion_jerk: empty trace");
  const double rate = trace.rate_hz;
  double metric = 0.0;
  int included = 0;
  for (int j = 0; j < trace.joints; ++j) {
    double jerk_sum = 0.0;
    int64_t jerk_count = 0;
    double peak_speed = 0.0;
    for (const SimRateTrace::Segment& seg : trace.segments) {
      if (seg.samples < 4) continue;
      double prev_vel = seg.vel_at(0, j, trace.joints);
      double prev_acc = 0.0;
      for (int s = 1; s < seg.samples; ++s) {
        const double vel = seg.vel_at(s, j, trace.joints);
        peak_speed = std::max(peak_speed, std::abs(vel));
        const double acc = (vel - prev_vel) * rate;
        if (s >= 2) {
          jerk_sum += std::abs((acc - prev_acc) * rate);
          ++jerk_count;
        }
        prev_vel = vel;
        prev_acc = acc;
      }
      peak_speed = std::max(peak_speed, std::abs(seg.vel_at(0, j, trace.joints)));
    }
    if (jerk_count == 0) continue;
    if (peak_speed < 1e-12) {
      std::cerr << "motion_jerk: joint " << j << " never moves, excluded\n";
      continue;
    }
    metric += (jerk_sum / static_cast<double>(jerk_count)) / peak_speed;
    ++included;
  }
  if (included == 0) {
    std::cerr << "motion_jerk: no joint with nonzero peak speed\n";
    return 0.0;
  }
  return metric / included;
}

// --- Gain schedules ---------------------------------------------------------

GainSchedule export_gain_schedule(const Policy& policy, const Env& env, double gain_hz,
                                  double action_hz) {
  if (policy.kind != PolicyKind::LPN) {
    throw ConfigError("export_gain_schedule: requires an lpn policy");
  }
  const EnvSpec& spec = env.spec();
  if (policy.n != spec.obs_dim || policy.m != spec.action_dim) {
    throw ConfigError("export_gain_schedule: checkpoint dimensions do not match environment");
  }
  if (action_hz != static_cast<double>(spec.control_hz)) {
    throw ConfigError("export_gain_schedule: action rate must equal the control rate");
  }
  if (!(gain_hz > 0.0) || std::fmod(action_hz, gain_hz) != 0.0) {
    throw ConfigError("export_gain_schedule: gain rate must divide the action rate");
  }
  const int ratio = static_cast<int>(action_hz / gain_hz);
  if (spec.cycle_steps % ratio != 0) {
    throw ConfigError("export_gain_schedule: gain rate does not tile the reference cycle");
  }

  GainSchedule out;
  out.n = policy.n;
  out.m = policy.m;
  out.gain_hz = gain_hz;
  out.action_hz = action_hz;
  const int entries = spec.cycle_steps / ratio;
  out.ref_actions = Mat(entries, policy.m);
  out.gains.reserve(entries);
  for (int e = 0; e < entries; ++e) {
    const ReferenceFrame ref = env.reference_at(static_cast<int64_t>(e) * ratio);
    out.gains.push_back(lpn_gains(policy.net, encode_reference(ref), policy.m, policy.n));
    for (int i = 0; i < policy.m; ++i) out.ref_actions(e, i) = ref.actuated_targets[i];
  }
  return out;
}

GainSchedule reduce_gains(const GainSchedule& schedule, int k) {
  if (schedule.gains.empty()) throw ArgumentError("reduce_gains: empty schedule");
  const int full = std::min(schedule.m, schedule.n);
  if (k < 1 || k > full) {
    throw ArgumentError("reduce_gains: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(full) + "]");
  }
  GainSchedule out = schedule;
  for (LinearGains& g : out.gains) {
    g.k_mat = truncate_rank(svd(g.k_mat), k);
  }
  return out;
}

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_gain_schedule(const GainSchedule& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_gain_schedule: cannot write " + path.string());
  out << "n,m,steps,gain_hz,action_hz\n";
  out << s.n << "," << s.m << "," << s.gains.size() << "," << g17(s.gain_hz) << ","
      << g17(s.action_hz) << "\n";
  for (size_t e = 0; e < s.gains.size(); ++e) {
    out << e;
    for (double v : s.gains[e].k_mat.a) out << "," << g17(v);
    for (double v : s.gains[e].k_ff) out << "," << g17(v);
    for (int i = 0; i < s.m; ++i) out << "," << g17(s.ref_actions(static_cast<int>(e), i));
    out << "\n";
  }
  if (!out) throw IoError("save_gain_schedule: write failed for " + path.string());
}

GainSchedule load_gain_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_gain_schedule: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "n,m,steps,gain_hz,action_hz") {
    throw IoError("load_gain_schedule: bad header in " + path.string());
  }
  if (!std::getline(in, line)) throw IoError("load_gain_schedule: missing header values");
  GainSchedule s;
  int steps = 0;
  {
    std::stringstream ss(line);
    char comma;
    if (!(ss >> s.n >> comma >> s.m >> comma >> steps >> comma >> s.gain_hz >> comma >>
          s.action_hz)) {
      throw IoError("load_gain_schedule: malformed header values");
    }
  }
  if (s.n < 1 || s.m < 1 || steps < 1) throw IoError("load_gain_schedule: bad dimensions");
  s.ref_actions = Mat(steps, s.m);
  const int expect = 1 + s.m * s.n + s.m + s.m;
  for (int e = 0; e < steps; ++e) {
    if (!std::getline(in, line)) throw IoError("load_gain_schedule: missing step row " +
                                               std::to_string(e));
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != expect) {
      throw IoError("load_gain_schedule: row " + std::to_string(e) + " has " +
                    std::to_string(vals.size()) + " fields, expected " + std::to_string(expect));
    }
    LinearGains g;
    g.k_mat = Mat(s.m, s.n, Vec(vals.begin() + 1, vals.begin() + 1 + s.m * s.n));
    g.k_ff.assign(vals.begin() + 1 + s.m * s.n, vals.begin() + 1 + s.m * s.n + s.m);
    for (int i = 0; i < s.m; ++i) s.ref_actions(e, i) = vals[1 + s.m * s.n + s.m + i];
    s.gains.push_back(std::move(g));
  }
  return s;
}

// --- Rollout evaluation -----------------------------------------------------

namespace {

Mat rows_to_mat(const std::vector<Vec>& rows, int cols) {
  Mat m(static_cast<int>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) copy(rows[i].begin(), rows[i].end(),
                                                m.a.begin() + i * cols);
  return m;
}

}  // namespace

EvalResult eval_policy(const Policy& policy, Env& env, int episodes, int cycles, uint64_t seed) {
  const EnvSpec& spec = env.spec();
  if (policy.n != spec.obs_dim || policy.m != spec.action_dim) {
    throw ConfigError("eval_policy: checkpoint dimensions do not match environment");
  }
  EvalResult out;
  out.actions.m = policy.m;
  out.actions.rate_hz = static_cast<double>(spec.control_hz);
  Rng master(seed);
  const int steps_target = cycles * spec.cycle_steps;
  double reward_sum = 0.0;
  int64_t step_count = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    Rng ep_rng = master.derive(ep);
    env.reset_rsi(ep_rng);
    std::vector<Vec> actions;
    actions.reserve(steps_target);
    bool failed = false;
    for (int t = 0; t < steps_target; ++t) {
      const Vec obs = env.observe();
      const ReferenceFrame ref = env.current_reference();
      const Vec mean = policy_mean(policy, obs, encode_reference(ref), ref.actuated_targets);
      actions.push_back(mean);
      const StepResult sr = env.step(mean);
      reward_sum += sr.reward;
      ++step_count;
      if (sr.terminated) {
        failed = true;
        break;
      }
      if (sr.truncated) break;
    }
    out.actions.episodes.push_back(rows_to_mat(actions, policy.m));
    if (failed) ++out.failures;
    ++out.episodes;
  }
  out.reward_imitation = step_count > 0 ? reward_sum / static_cast<double>(step_count) : 0.0;
  return out;
}

PlaybackResult playback(const GainSchedule& schedule, Env& env, int episodes, int cycles,
                        uint64_t seed) {
  const EnvSpec& spec = env.spec();
  if (schedule.n != spec.obs_dim || schedule.m != spec.action_dim) {
    throw ConfigError("playback: schedule dimensions do not match environment");
  }
  if (schedule.action_hz != static_cast<double>(spec.control_hz)) {
    throw ConfigError("playback: schedule action rate does not match the control rate");
  }
  const int ratio = static_cast<int>(schedule.action_hz / schedule.gain_hz);
  if (static_cast<int>(schedule.gains.size()) * ratio != spec.cycle_steps) {
    throw ConfigError("playback: schedule does not cover the reference cycle");
  }

  PlaybackResult out;
  out.actions.m = schedule.m;
  out.actions.rate_hz = schedule.action_hz;
  Rng master(seed);
  const int steps_target = cycles * spec.cycle_steps;
  double reward_sum = 0.0;
  int64_t step_count = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    Rng ep_rng = master.derive(ep);
    env.reset_rsi(ep_rng);
    std::vector<Vec> actions;
    for (int t = 0; t < steps_target; ++t) {
      const int64_t cycle_idx = env.time_index() % spec.cycle_steps;
      const int entry = static_cast<int>(cycle_idx) / ratio;
      out.gain_indices.push_back(entry);
      const ReferenceFrame ref = env.current_reference();
      const Vec a = lpn_action(schedule.gains[entry], env.observe(), ref.actuated_targets);
      actions.push_back(a);
      const StepResult sr = env.step(a);
      reward_sum += sr.reward;
      ++step_count;
      if (sr.terminated || sr.truncated) break;
    }
    out.actions.episodes.push_back(rows_to_mat(actions, schedule.m));
  }
  out.reward_imitation = step_count > 0 ? reward_sum / static_cast<double>(step_count) : 0.0;
  return out;
}

PerturbStats perturb_eval(const Policy& policy, Env& env, double push_magnitude, int episodes,
                          uint64_t seed) {
  const EnvSpec& spec = env.spec();
  PerturbStats out;
  Rng master(seed);
  const int steps_target = 5 * spec.cycle_steps;
  double reward_sum = 0.0;
  int64_t step_count = 0;
  int failures = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    Rng ep_rng = master.derive(ep);
    env.reset_rsi(ep_rng);
    const int push_step = ep_rng.uniform_int(steps_target);
    const double sign = ep_rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int t = 0; t < steps_target; ++t) {
      if (t == push_step) {
        if (spec.fixed_base) {
          // 0.1 s spike; torque limits still apply.
          env.queue_joint_torque_bias(0, sign * push_magnitude, 3);
        } else {
          env.queue_root_impulse(sign * push_magnitude, 0.0);
        }
      }
      const Vec obs = env.observe();
      const ReferenceFrame ref = env.current_reference();
      const Vec mean = policy_mean(policy, obs, encode_reference(ref), ref.actuated_targets);
      const StepResult sr = env.step(mean);
      reward_sum += sr.reward;
      ++step_count;
      if (sr.terminated) {
        ++failures;
        break;
      }
      if (sr.truncated) break;
    }
  }
  out.mean_reward = step_count > 0 ? reward_sum / static_cast<double>(step_count) : 0.0;
  out.failure_rate = episodes > 0 ? static_cast<double>(failures) / episodes : 0.0;
  return out;
}

}  // namespace lpn
