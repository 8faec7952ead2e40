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

#ifndef LPN_ANALYSIS_HPP_
#define LPN_ANALYSIS_HPP_

#include <filesystem>
#include <vector>

#include "lpn/env.hpp"
#include "lpn/policy.hpp"

namespace lpn {

// Control-rate actions, one matrix (steps x m) per episode.
struct ActionTrace {
  int m = 0;
  double rate_hz = 30.0;
  std::vector<Mat> episodes;
};

// Mean over episodes of sum ||a_t - a_{t-1}||^2 / (steps - 2); episodes with
// fewer than 3 actions are skipped with a warning.
double action_smoothness(const ActionTrace& trace);

// Fraction of non-DC spectral energy strictly above cutoff_hz, averaged over
// action dimensions and episodes; all-constant signals count as 0.
double high_freq_ratio(const ActionTrace& trace, double cutoff_hz = 10.0);

// Mean |jerk| / peak |velocity| per joint from a sim-rate trace, averaged
// over joints; joints that never move are excluded with a warning.
double motion_jerk(const SimRateTrace& trace);

// Time-indexed gains covering one reference cycle. Entries are spaced at
// gain_hz; actions are evaluated at action_hz with zero-order-held gains.
struct GainSchedule {
  int n = 0, m = 0;
  double gain_hz = 30.0, action_hz = 30.0;
  std::vector<LinearGains> gains;
  Mat ref_actions;  // entries x m, reference actions at the gain steps
};

// Precompute gains from an LPN checkpoint over one cycle. gain_hz must
// divide action_hz, which must equal the env control rate.
GainSchedule export_gain_schedule(const Policy& policy, const Env& env, double gain_hz,
                                  double action_hz);

// Every feedback matrix replaced by its best rank-k approximation.
GainSchedule reduce_gains(const GainSchedule& schedule, int k);

void save_gain_schedule(const GainSchedule& schedule, const std::filesystem::path& path);
GainSchedule load_gain_schedule(const std::filesystem::path& path);

// Deterministic rollout of the mean policy (no exploration noise).
struct EvalResult {
  double reward_imitation = 0.0;  // per-step mean
  ActionTrace actions;
  int episodes = 0;
  int failures = 0;  // episodes cut short by termination
};
EvalResult eval_policy(const Policy& policy, Env& env, int episodes, int cycles, uint64_t seed);

// Linear-feedback playback without any network in the loop.
struct PlaybackResult {
  double reward_imitation = 0.0;
  ActionTrace actions;
  std::vector<int> gain_indices;  // schedule entry used at every control step
};
PlaybackResult playback(const GainSchedule& schedule, Env& env, int episodes, int cycles,
                        uint64_t seed);

// Robustness probe: one impulse (floating base) or joint torque spike
// (fixed base) per episode at a random phase.
struct PerturbStats {
  double mean_reward = 0.0;
  double failure_rate = 0.0;
};
PerturbStats perturb_eval(const Policy& policy, Env& env, double push_magnitude, int episodes,
                          uint64_t seed);

}  // namespace lpn

#endif  // LPN_ANALYSIS_HPP_
