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

#include "lpn/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "lpn/error.hpp"

namespace lpn {

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::None: return "none";
    case Regularizer::JacPen: return "jac_pen";
    case Regularizer::Lipschitz: return "lipschitz";
    case Regularizer::ActionChangeReward: return "action_change_reward";
  }
  return "none";
}

Regularizer regularizer_from_string(const std::string& s) {
  if (s == "none") return Regularizer::None;
  if (s == "jac_pen") return Regularizer::JacPen;
  if (s == "lipschitz") return Regularizer::Lipschitz;
  if (s == "action_change_reward") return Regularizer::ActionChangeReward;
  throw ConfigError("unknown regularizer '" + s +
                    "' (expected none, jac_pen, lipschitz or action_change_reward)");
}

void validate(const TrainConfig& cfg) {
  if (cfg.num_envs < 1) throw ConfigError("config: num_envs must be positive");
  if (cfg.samples_per_iter < 1) throw ConfigError("config: samples_per_iter must be positive");
  if (cfg.samples_per_iter % cfg.num_envs != 0) {
    throw ConfigError("config: samples_per_iter must be divisible by num_envs");
  }
  if (cfg.minibatch < 1 || cfg.samples_per_iter % cfg.minibatch != 0) {
    throw ConfigError("config: samples_per_iter must be divisible by minibatch");
  }
  if (cfg.epochs < 1) throw ConfigError("config: epochs must be positive");
  if (cfg.max_iters < 1) throw ConfigError("config: max_iters must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("config: gamma must be in (0,1]");
  if (!(cfg.gae_lambda >= 0.0 && cfg.gae_lambda <= 1.0)) {
    throw ConfigError("config: gae_lambda must be in [0,1]");
  }
  if (!(cfg.clip_eps > 0.0)) throw ConfigError("config: clip_eps must be positive");
  if (!(cfg.lr > 0.0)) throw ConfigError("config: lr must be positive");
  if (cfg.value_loss_weight < 0.0) throw ConfigError("config: value_loss_weight must be >= 0");
  if (cfg.w_jac < 0.0) throw ConfigError("config: w_jac must be >= 0");
  if (cfg.w_action < 0.0) throw ConfigError("config: w_action must be >= 0");
  if (cfg.hidden < 1) throw ConfigError("config: hidden must be positive");
  if (!(cfg.sigma > 0.0)) throw ConfigError("config: sigma must be positive");
}

namespace {

// Value input is the FF-style encoding [obs, ref] for both policy kinds.
void value_input(const Vec& obs, const Vec& ref_enc, Vec& out) {
  out.clear();
  out.insert(out.end(), obs.begin(), obs.end());
  out.insert(out.end(), ref_enc.begin(), ref_enc.end());
}

double value_eval(const NetParams& value_net, const Vec& obs, const Vec& ref_enc,
                  ForwardTrace& trace, Vec& scratch) {
  value_input(obs, ref_enc, scratch);
  forward(value_net, scratch, trace);
  return trace.output[0];
}

void copy_row(Mat& dst, int row, const Vec& src) {
  std::copy(src.begin(), src.end(), dst.a.begin() + static_cast<size_t>(row) * dst.cols);
}

Vec row_vec(const Mat& m, int row) {
  const double* p = m.a.data() + static_cast<size_t>(row) * m.cols;
  return Vec(p, p + m.cols);
}

}  // namespace

// --- Collection ------------------------------------------------------------

Collector::Collector(const RunConfig& cfg) {
  validate(cfg.train);
  Rng master(cfg.train.seed);
  EnvOverrides ov;
  if (cfg.ref_csv) ov.reference_csv = *cfg.ref_csv;
  workers_.reserve(cfg.train.num_envs);
  for (int e = 0; e < cfg.train.num_envs; ++e) {
    Worker w{make_env(cfg.env_name, cfg.train.seed + 1000 + e, ov), master.derive(100 + e), {},
             false, true};
    workers_.push_back(std::move(w));
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  threads_ = cfg.train.num_threads > 0 ? cfg.train.num_threads : static_cast<int>(hw);
  threads_ = std::min(threads_, cfg.train.num_envs);
}

Collector::Collector(std::vector<std::unique_ptr<Env>> envs, const TrainConfig& cfg) {
  validate(cfg);
  if (static_cast<int>(envs.size()) != cfg.num_envs) {
    throw ConfigError("collector: expected " + std::to_string(cfg.num_envs) + " envs, got " +
                      std::to_string(envs.size()));
  }
  Rng master(cfg.seed);
  for (size_t e = 0; e < envs.size(); ++e) {
    Worker w{std::move(envs[e]), master.derive(100 + e), {}, false, true};
    workers_.push_back(std::move(w));
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  threads_ = cfg.num_threads > 0 ? cfg.num_threads : static_cast<int>(hw);
  threads_ = std::min(threads_, cfg.num_envs);
}

Rollout Collector::collect(const Policy& policy, const NetParams& value_net,
                           const TrainConfig& cfg) {
  const int steps = cfg.samples_per_iter / cfg.num_envs;
  const int num_envs = cfg.num_envs;
  const EnvSpec& spec = workers_[0].env->spec();

  Rollout r;
  r.n = spec.obs_dim;
  r.m = spec.action_dim;
  r.n_ref = reference_encoding_dim(spec.joints);
  r.num_envs = num_envs;
  r.steps_per_env = steps;
  const int total = r.size();
  r.obs = Mat(total, r.n);
  r.ref_enc = Mat(total, r.n_ref);
  r.ref_action = Mat(total, r.m);
  r.mean = Mat(total, r.m);
  r.action = Mat(total, r.m);
  if (policy.kind == PolicyKind::LPN) r.gains = Mat(total, r.m * r.n + r.m);
  r.logp.assign(total, 0.0);
  r.value.assign(total, 0.0);
  r.next_value.assign(total, 0.0);
  r.reward.assign(total, 0.0);
  r.reward_imitation.assign(total, 0.0);
  r.terminated.assign(total, 0);
  r.truncated.assign(total, 0);

  std::vector<std::vector<int>> episode_lengths(num_envs);
  std::vector<int> diverged(num_envs, 0);

  auto run_worker = [&](int e) {
    Worker& w = workers_[e];
    Env& env = *w.env;
    ForwardTrace vtrace, ptrace;
    Vec vin;
    if (w.needs_reset) {
      env.reset_rsi(w.rng);
      w.has_prev = false;
      w.needs_reset = false;
    }
    int guard = 0;
    for (int t = 0; t < steps; ++t) {
      const int row = e * steps + t;
      const Vec obs = env.observe();
      const ReferenceFrame ref = env.current_reference();
      const Vec ref_enc = encode_reference(ref);

      Vec mean(r.m);
      if (policy.kind == PolicyKind::LPN) {
        forward(policy.net, ref_enc, ptrace);
        const double* k_flat = ptrace.output.data();
        for (int i = 0; i < r.m; ++i) {
          double acc = ptrace.output[static_cast<size_t>(r.m) * r.n + i] + ref.actuated_targets[i];
          const double* krow = k_flat + static_cast<size_t>(i) * r.n;
          for (int j = 0; j < r.n; ++j) acc += krow[j] * obs[j];
          mean[i] = acc;
        }
        copy_row(r.gains, row, ptrace.output);
      } else {
        mean = ff_action(policy.net, obs, ref_enc, ref.actuated_targets);
      }
      auto [act, logp] = sample_action(mean, policy.sigma, w.rng);
      const double v = value_eval(value_net, obs, ref_enc, vtrace, vin);

      StepResult sr;
      try {
        sr = env.step(act);
      } catch (const SimulationDiverged&) {
        // Drop the episode: close the previous recorded step if it belongs to
        // this episode, reset and redo this sample slot.
        if (t > 0 && !r.terminated[row - 1] && !r.truncated[row - 1]) {
          r.terminated[row - 1] = 1;
        }
        env.reset_rsi(w.rng);
        w.has_prev = false;
        ++diverged[e];
        if (++guard > 100) {
          throw NumericalError("collect: environment diverged repeatedly");
        }
        --t;
        continue;
      }

      double reward = sr.reward;
      if (cfg.regularizer == Regularizer::ActionChangeReward && w.has_prev) {
        double change = 0.0;
        for (int j = 0; j < r.m; ++j) {
          const double d = act[j] - w.prev_action[j];
          change += d * d;
        }
        reward -= cfg.w_action * change;
      }

      copy_row(r.obs, row, obs);
      copy_row(r.ref_enc, row, ref_enc);
      copy_row(r.ref_action, row, ref.actuated_targets);
      copy_row(r.mean, row, mean);
      copy_row(r.action, row, act);
      r.logp[row] = logp;
      r.value[row] = v;
      r.reward[row] = reward;
      r.reward_imitation[row] = sr.reward;
      r.terminated[row] = sr.terminated ? 1 : 0;
      r.truncated[row] = sr.truncated ? 1 : 0;

      // Bootstrap value of the successor state, before any reset.
      const Vec next_obs = env.observe();
      const Vec next_ref_enc = encode_reference(env.current_reference());
      r.next_value[row] = value_eval(value_net, next_obs, next_ref_enc, vtrace, vin);

      if (sr.terminated || sr.truncated) {
        episode_lengths[e].push_back(env.episode_steps());
        env.reset_rsi(w.rng);
        w.has_prev = false;
      } else {
        w.prev_action = act;
        w.has_prev = true;
      }
    }
  };

  if (threads_ <= 1 || num_envs == 1) {
    for (int e = 0; e < num_envs; ++e) run_worker(e);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int tid = 0; tid < threads_; ++tid) {
      pool.emplace_back([&, tid]() {
        try {
          for (int e = tid; e < num_envs; e += threads_) run_worker(e);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  for (int e = 0; e < num_envs; ++e) {
    r.completed_episode_lengths.insert(r.completed_episode_lengths.end(),
                                       episode_lengths[e].begin(), episode_lengths[e].end());
    r.diverged_episodes += diverged[e];
  }
  return r;
}

// --- GAE ---------------------------------------------------------------

void gae(const Rollout& r, double gamma, double lambda, Vec* advantages, Vec* returns) {
  const int total = r.size();
  advantages->assign(total, 0.0);
  returns->assign(total, 0.0);

  for (int e = 0; e < r.num_envs; ++e) {
    double carry = 0.0;
    for (int t = r.steps_per_env - 1; t >= 0; --t) {
      const int row = e * r.steps_per_env + t;
      const bool term = r.terminated[row] != 0;
      const bool boundary = term || r.truncated[row] != 0;
      const double next_v = term ? 0.0 : r.next_value[row];
      const double delta = r.reward[row] + gamma * next_v - r.value[row];
      // The future carry belongs to a different episode when this row ends one.
      carry = delta + gamma * lambda * (boundary ? 0.0 : carry);
      (*advantages)[row] = carry;
      (*returns)[row] = carry + r.value[row];
    }
  }

  // Normalize advantages across the batch.
  double mean = 0.0;
  for (double a : *advantages) mean += a;
  mean /= total;
  double var = 0.0;
  for (double a : *advantages) var += (a - mean) * (a - mean);
  var /= total;
  const double denom = std::sqrt(var) + 1e-8;
  for (double& a : *advantages) a = (a - mean) / denom;
}

// --- Losses ------------------------------------------------------------

namespace {

struct CoreOptions {
  bool fused_reg = false;  // apply cfg.regularizer inside the pass
};

MinibatchStats core_loss(const Policy& policy, const NetParams& value_net, const Rollout& r,
                         std::span<const int> idx, const Vec& advantages, const Vec& returns,
                         const TrainConfig& cfg, const CoreOptions& opt, ParamGrads& policy_grads,
                         ParamGrads& value_grads) {
  MinibatchStats out;
  const int batch = static_cast<int>(idx.size());
  if (batch == 0) throw ArgumentError("loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double sigma2 = policy.sigma * policy.sigma;
  const bool lpn = policy.kind == PolicyKind::LPN;
  const int m = r.m, n = r.n;

  ForwardTrace ptrace, vtrace;
  Vec net_in, dy, mean(m), dmean(m);

  for (const int row : idx) {
    const Vec obs = row_vec(r.obs, row);
    const Vec ref_enc = row_vec(r.ref_enc, row);
    const Vec ref_act = row_vec(r.ref_action, row);
    const Vec act = row_vec(r.action, row);

    const double* k_flat = nullptr;
    if (lpn) {
      forward(policy.net, ref_enc, ptrace);
      k_flat = ptrace.output.data();
      for (int i = 0; i < m; ++i) {
        double acc = ptrace.output[static_cast<size_t>(m) * n + i] + ref_act[i];
        const double* krow = k_flat + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += krow[j] * obs[j];
        mean[i] = acc;
      }
    } else {
      value_input(obs, ref_enc, net_in);
      forward(policy.net, net_in, ptrace);
      for (int i = 0; i < m; ++i) mean[i] = ptrace.output[i] + ref_act[i];
    }

    const double logp_new = gaussian_logp(mean, policy.sigma, act);
    const double ratio = std::exp(logp_new - r.logp[row]);
    if (!std::isfinite(ratio)) {
      throw NumericalError("ppo_loss: non-finite importance ratio at row " + std::to_string(row));
    }
    out.max_ratio_dev = std::max(out.max_ratio_dev, std::abs(ratio - 1.0));

    const double adv = advantages[row];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    const double u = ratio * adv;
    const double c = clipped * adv;
    out.surrogate += -std::min(u, c) * inv_b;

    // Subgradient of -min(u, c) wrt the ratio.
    double g_rho = 0.0;
    if (u <= c) {
      g_rho = -adv;
    } else if (std::abs(ratio - 1.0) < cfg.clip_eps) {
      g_rho = -adv;
    }
    const double dlogp = g_rho * ratio * inv_b;

    for (int i = 0; i < m; ++i) dmean[i] = dlogp * (act[i] - mean[i]) / sigma2;

    if (lpn) {
      dy.assign(static_cast<size_t>(m) * n + m, 0.0);
      for (int i = 0; i < m; ++i) {
        double* dyrow = dy.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dyrow[j] = dmean[i] * obs[j];
        dy[static_cast<size_t>(m) * n + i] = dmean[i];
      }
      if (opt.fused_reg && cfg.regularizer == Regularizer::JacPen) {
        // The action jacobian of the LPN is the gains matrix itself; its
        // penalty gradient rides along in the same backward pass.
        double pen = 0.0;
        const double w_eff = cfg.w_jac * inv_b;
        for (int i = 0; i < m * n; ++i) {
          pen += k_flat[i] * k_flat[i];
          dy[i] += w_eff * 2.0 * k_flat[i];
        }
        out.reg_value += pen * inv_b;
      } else if (opt.fused_reg && cfg.regularizer == Regularizer::Lipschitz) {
        Vec d(m);
        for (int i = 0; i < m; ++i) d[i] = act[i] - mean[i];
        Vec v(n, 0.0);
        for (int i = 0; i < m; ++i) {
          const double* krow = k_flat + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) v[j] += krow[j] * d[i];
        }
        double pen = 0.0;
        for (int j = 0; j < n; ++j) pen += v[j] * v[j];
        out.reg_value += pen * inv_b;
        const double w_eff = cfg.w_jac * inv_b;
        for (int i = 0; i < m; ++i) {
          double* dyrow = dy.data() + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) dyrow[j] += w_eff * 2.0 * d[i] * v[j];
        }
      }
      backward_params(policy.net, ptrace, dy, policy_grads);
    } else {
      backward_params(policy.net, ptrace, dmean, policy_grads);
      if (opt.fused_reg && cfg.regularizer == Regularizer::JacPen) {
        out.reg_value +=
            jacobian_penalty_grads(policy.net, ptrace, policy_grads, cfg.w_jac * inv_b, 0, n) *
            inv_b;
      } else if (opt.fused_reg && cfg.regularizer == Regularizer::Lipschitz) {
        Vec d(m);
        for (int i = 0; i < m; ++i) d[i] = act[i] - mean[i];
        out.reg_value += directional_penalty_grads(policy.net, ptrace, d, policy_grads,
                                                   cfg.w_jac * inv_b, 0, n) *
                         inv_b;
      }
    }

    // Critic.
    value_input(obs, ref_enc, net_in);
    forward(value_net, net_in, vtrace);
    const double vdiff = vtrace.output[0] - returns[row];
    out.value_loss += vdiff * vdiff * inv_b;
    const Vec dv{cfg.value_loss_weight * 2.0 * vdiff * inv_b};
    backward_params(value_net, vtrace, dv, value_grads);
  }
  return out;
}

}  // namespace

PpoLossResult ppo_loss(const Policy& policy, const NetParams& value_net, const Rollout& r,
                       std::span<const int> idx, const Vec& advantages, const Vec& returns,
                       const TrainConfig& cfg, ParamGrads& policy_grads, ParamGrads& value_grads) {
  const MinibatchStats s = core_loss(policy, value_net, r, idx, advantages, returns, cfg,
                                     CoreOptions{false}, policy_grads, value_grads);
  PpoLossResult out;
  out.surrogate = s.surrogate;
  out.value_loss = s.value_loss;
  out.total = s.surrogate + cfg.value_loss_weight * s.value_loss;
  out.max_ratio_dev = s.max_ratio_dev;
  return out;
}

MinibatchStats minibatch_grads(const Policy& policy, const NetParams& value_net, const Rollout& r,
                               std::span<const int> idx, const Vec& advantages, const Vec& returns,
                               const TrainConfig& cfg, ParamGrads& policy_grads,
                               ParamGrads& value_grads) {
  return core_loss(policy, value_net, r, idx, advantages, returns, cfg, CoreOptions{true},
                   policy_grads, value_grads);
}

double regularizer_loss(Regularizer kind, const Policy& policy, const Rollout& r,
                        std::span<const int> idx, ParamGrads& policy_grads) {
  if (kind == Regularizer::None || kind == Regularizer::ActionChangeReward) return 0.0;
  const int batch = static_cast<int>(idx.size());
  if (batch == 0) throw ArgumentError("regularizer_loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch);
  const bool lpn = policy.kind == PolicyKind::LPN;
  const int m = r.m, n = r.n;

  ForwardTrace trace;
  Vec net_in, dy;
  double total = 0.0;

  for (const int row : idx) {
    const Vec obs = row_vec(r.obs, row);
    const Vec ref_enc = row_vec(r.ref_enc, row);

    if (lpn) {
      forward(policy.net, ref_enc, trace);
      const double* k_flat = trace.output.data();
      dy.assign(static_cast<size_t>(m) * n + m, 0.0);
      if (kind == Regularizer::JacPen) {
        double pen = 0.0;
        for (int i = 0; i < m * n; ++i) {
          pen += k_flat[i] * k_flat[i];
          dy[i] = 2.0 * k_flat[i] * inv_b;
        }
        total += pen * inv_b;
      } else {  // Lipschitz
        const Vec ref_act = row_vec(r.ref_action, row);
        const Vec act = row_vec(r.action, row);
        Vec d(m);
        for (int i = 0; i < m; ++i) {
          double mean_i = k_flat[static_cast<size_t>(m) * n + i] + ref_act[i];
          const double* krow = k_flat + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) mean_i += krow[j] * obs[j];
          d[i] = act[i] - mean_i;
        }
        Vec v(n, 0.0);
        for (int i = 0; i < m; ++i) {
          const double* krow = k_flat + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) v[j] += krow[j] * d[i];
        }
        double pen = 0.0;
        for (int j = 0; j < n; ++j) pen += v[j] * v[j];
        total += pen * inv_b;
        for (int i = 0; i < m; ++i) {
          double* dyrow = dy.data() + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) dyrow[j] = 2.0 * d[i] * v[j] * inv_b;
        }
      }
      backward_params(policy.net, trace, dy, policy_grads);
    } else {
      value_input(obs, ref_enc, net_in);
      forward(policy.net, net_in, trace);
      if (kind == Regularizer::JacPen) {
        total += jacobian_penalty_grads(policy.net, trace, policy_grads, inv_b, 0, n) * inv_b;
      } else {
        const Vec ref_act = row_vec(r.ref_action, row);
        const Vec act = row_vec(r.action, row);
        Vec d(m);
        for (int i = 0; i < m; ++i) d[i] = act[i] - (trace.output[i] + ref_act[i]);
        total +=
            directional_penalty_grads(policy.net, trace, d, policy_grads, inv_b, 0, n) * inv_b;
      }
    }
  }
  return total;
}

// --- Training loop ----------------------------------------------------------

const char* const kStatsCsvHeader = "iter,reward_imitation,ep_len,loss_ppo,loss_reg,grad_norm,wall_ms";

namespace {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string stats_row(const IterStats& s) {
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", s.wall_ms);
  return std::to_string(s.iter) + "," + format_g17(s.reward_imitation) + "," +
         format_g17(s.ep_len) + "," + format_g17(s.loss_ppo) + "," + format_g17(s.loss_reg) +
         "," + format_g17(s.grad_norm) + "," + wall;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(idx[i], idx[j]);
  }
}

}  // namespace

void write_stats_csv(const std::vector<IterStats>& stats, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_stats_csv: cannot write " + path.string());
  out << kStatsCsvHeader << "\n";
  for (const IterStats& s : stats) out << stats_row(s) << "\n";
}

TrainResult train(const RunConfig& cfg) {
  validate(cfg.train);
  const TrainConfig& tc = cfg.train;

  Rng master(tc.seed);
  Rng policy_rng = master.derive(1);
  Rng value_rng = master.derive(2);
  Rng shuffle_rng = master.derive(3);

  EnvOverrides ov;
  if (cfg.ref_csv) ov.reference_csv = *cfg.ref_csv;
  const EnvSpec spec = make_env(cfg.env_name, tc.seed, ov)->spec();

  TrainResult result;
  result.policy = make_policy(cfg.policy, spec, tc.hidden, tc.sigma, policy_rng);
  result.value_net = init_params(spec.obs_dim + reference_encoding_dim(spec.joints), tc.hidden, 1,
                                 value_rng);

  Collector collector(cfg);
  Adam policy_opt(result.policy.net, tc.lr);
  Adam value_opt(result.value_net, tc.lr);

  const bool persist = !cfg.out_dir.empty();
  std::ofstream csv;
  std::filesystem::path ckpt_path;
  if (persist) {
    std::filesystem::create_directories(cfg.out_dir);
    csv.open(std::filesystem::path(cfg.out_dir) / "stats.csv");
    if (!csv) throw IoError("train: cannot write stats.csv under " + cfg.out_dir);
    csv << kStatsCsvHeader << "\n";
    ckpt_path = std::filesystem::path(cfg.out_dir) / "checkpoint.json";
  }

  std::vector<int> indices(tc.samples_per_iter);
  for (int i = 0; i < tc.samples_per_iter; ++i) indices[i] = i;
  ParamGrads policy_grads(result.policy.net);
  ParamGrads value_grads(result.value_net);
  Vec advantages, returns;

  double last_ep_len = 0.0;
  double best_reward = -1.0;
  int best_iter = 0;

  for (int iter = 1; iter <= tc.max_iters; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    IterStats stats;
    stats.iter = iter;

    try {
      Rollout rollout = collector.collect(result.policy, result.value_net, tc);
      gae(rollout, tc.gamma, tc.gae_lambda, &advantages, &returns);

      double loss_ppo_acc = 0.0, loss_reg_acc = 0.0, grad_norm_acc = 0.0;
      int minibatches = 0;
      for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        shuffle_indices(indices, shuffle_rng);
        for (int start = 0; start < tc.samples_per_iter; start += tc.minibatch) {
          policy_grads.zero();
          value_grads.zero();
          const std::span<const int> mb(indices.data() + start, tc.minibatch);
          const MinibatchStats ms = minibatch_grads(result.policy, result.value_net, rollout, mb,
                                                    advantages, returns, tc, policy_grads,
                                                    value_grads);
          policy_opt.step(result.policy.net, policy_grads);
          value_opt.step(result.value_net, value_grads);
          loss_ppo_acc += ms.surrogate + tc.value_loss_weight * ms.value_loss;
          loss_reg_acc += ms.reg_value;
          grad_norm_acc += std::sqrt(policy_grads.squared_norm());
          ++minibatches;
        }
      }

      double reward_sum = 0.0;
      for (double v : rollout.reward_imitation) reward_sum += v;
      stats.reward_imitation = reward_sum / rollout.size();
      if (!rollout.completed_episode_lengths.empty()) {
        double ep = 0.0;
        for (int len : rollout.completed_episode_lengths) ep += len;
        last_ep_len = ep / static_cast<double>(rollout.completed_episode_lengths.size());
      }
      stats.ep_len = last_ep_len;
      stats.loss_ppo = loss_ppo_acc / minibatches;
      stats.loss_reg = loss_reg_acc / minibatches;
      stats.grad_norm = grad_norm_acc / minibatches;
    } catch (const NumericalError&) {
      // Abort and keep the checkpoint written after the previous iteration.
      result.aborted = true;
      break;
    }

    stats.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    result.stats.push_back(stats);
    result.iterations_run = iter;
    if (persist) {
      csv << stats_row(stats) << "\n";
      csv.flush();
      save_checkpoint(result.policy, ckpt_path);
    }

    if (stats.reward_imitation > best_reward + 1e-3) {
      best_reward = stats.reward_imitation;
      best_iter = iter;
    }
    if (tc.early_stop && iter >= 20) {
      double window = 0.0;
      for (int k = iter - 20; k < iter; ++k) window += result.stats[k].reward_imitation;
      window /= 20.0;
      const bool reached = window >= tc.early_stop_reward;
      const bool plateaued = iter - best_iter >= 80;
      if (reached || plateaued) break;
    }
  }
  return result;
}

}  // namespace lpn
