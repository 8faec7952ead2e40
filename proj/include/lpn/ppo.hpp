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

#ifndef LPN_PPO_HPP_
#define LPN_PPO_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpn/env.hpp"
#include "lpn/policy.hpp"

namespace lpn {

enum class Regularizer { None, JacPen, Lipschitz, ActionChangeReward };

std::string to_string(Regularizer r);
Regularizer regularizer_from_string(const std::string& s);

struct TrainConfig {
  int num_envs = 8;
  int samples_per_iter = 512;
  int minibatch = 128;
  int epochs = 5;
  int max_iters = 500;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double lr = 3e-4;
  double value_loss_weight = 0.5;
  double w_jac = 10.0;
  double w_action = 0.1;
  Regularizer regularizer = Regularizer::None;
  uint64_t seed = 0;
  int hidden = 64;
  double sigma = 0.1;
  int num_threads = 0;  // 0 = one per env up to hardware concurrency
  bool early_stop = false;
  double early_stop_reward = 0.95;  // plateau window checked against this
};

// Throws ConfigError on inconsistent settings.
void validate(const TrainConfig& cfg);

// Everything the trainer needs beyond hyperparameters.
struct RunConfig {
  TrainConfig train;
  std::string env_name = "pendulum-track";
  PolicyKind policy = PolicyKind::LPN;
  std::string out_dir;  // empty: keep results in memory only
  bool trace = false;   // enable sim-rate tracing in evaluation commands
  std::optional<std::string> ref_csv;
};

// On-policy batch, env-major: row = env * steps_per_env + step.
struct Rollout {
  int n = 0, m = 0, n_ref = 0;
  int num_envs = 0, steps_per_env = 0;

  Mat obs;         // N x n
  Mat ref_enc;     // N x n_ref
  Mat ref_action;  // N x m
  Mat mean;        // N x m
  Mat action;      // N x m (pre-clamp samples)
  Mat gains;       // N x (m*n + m), LPN only (empty for FF)
  Vec logp;
  Vec value;
  Vec next_value;         // V(s_{t+1}) evaluated before any reset
  Vec reward;             // reward seen by PPO (incl. action-change channel)
  Vec reward_imitation;   // pure imitation reward
  std::vector<uint8_t> terminated, truncated;

  std::vector<int> completed_episode_lengths;
  int diverged_episodes = 0;

  int size() const { return num_envs * steps_per_env; }
};

// Persistent collection state: environments, per-env RNG streams and the
// previous action needed by the action-change reward channel.
class Collector {
 public:
  Collector(const RunConfig& cfg);
  // Caller-supplied environments (one per env slot in the config).
  Collector(std::vector<std::unique_ptr<Env>> envs, const TrainConfig& cfg);

  // Exactly samples_per_iter transitions; episodes reset via RSI. Worker
  // results are merged in env-id order, so the rollout is identical to a
  // serial run regardless of thread count.
  Rollout collect(const Policy& policy, const NetParams& value_net, const TrainConfig& cfg);

  Env& env(int i) { return *workers_[i].env; }

 private:
  struct Worker {
    std::unique_ptr<Env> env;
    Rng rng;
    Vec prev_action;
    bool has_prev = false;
    bool needs_reset = true;
  };
  std::vector<Worker> workers_;
  int threads_ = 1;
};

// GAE over the rollout's env segments; advantages are normalized to zero
// mean / unit variance across the batch, returns use the raw advantages.
void gae(const Rollout& r, double gamma, double lambda, Vec* advantages, Vec* returns);

struct PpoLossResult {
  double surrogate = 0.0;
  double value_loss = 0.0;  // unweighted mean squared error
  double total = 0.0;
  double max_ratio_dev = 0.0;  // max |rho - 1| over the batch
};

// Clipped-surrogate + weighted value loss over the given rows. Accumulates
// gradients into policy_grads / value_grads (means over the batch).
PpoLossResult ppo_loss(const Policy& policy, const NetParams& value_net, const Rollout& r,
                       std::span<const int> idx, const Vec& advantages, const Vec& returns,
                       const TrainConfig& cfg, ParamGrads& policy_grads, ParamGrads& value_grads);

// Mean regularizer penalty and its (unweighted) parameter gradient.
double regularizer_loss(Regularizer kind, const Policy& policy, const Rollout& r,
                        std::span<const int> idx, ParamGrads& policy_grads);

// Fused per-minibatch gradient evaluation used by the training loop: shares
// forward passes between the PPO loss and the regularizer.
struct MinibatchStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double reg_value = 0.0;
  double max_ratio_dev = 0.0;
};
MinibatchStats minibatch_grads(const Policy& policy, const NetParams& value_net, const Rollout& r,
                               std::span<const int> idx, const Vec& advantages,
                               const Vec& returns, const TrainConfig& cfg,
                               ParamGrads& policy_grads, ParamGrads& value_grads);

struct IterStats {
  int iter = 0;
  double reward_imitation = 0.0;
  double ep_len = 0.0;
  double loss_ppo = 0.0;
  double loss_reg = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  Policy policy;
  NetParams value_net;
  std::vector<IterStats> stats;
  bool aborted = false;  // NaN gradient; last-good checkpoint preserved
  int iterations_run = 0;
};

// Stats CSV column order, also used by the plot command.
extern const char* const kStatsCsvHeader;

// Full PPO training. If cfg.out_dir is non-empty, writes stats.csv and
// checkpoint.json there (checkpoint updated after every iteration).
TrainResult train(const RunConfig& cfg);

void write_stats_csv(const std::vector<IterStats>& stats, const std::filesystem::path& path);

}  // namespace lpn

#endif  // LPN_PPO_HPP_
