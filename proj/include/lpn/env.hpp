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

#ifndef LPN_ENV_HPP_
#define LPN_ENV_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "lpn/sim_types.hpp"

namespace lpn {

struct EnvOverrides {
  std::optional<double> kp, kd, torque_limit;
  std::optional<int> max_episode_steps;
  // Reference motion loaded from CSV (columns t, root x, root z, root ori,
  // joint angles) instead of the procedural generator.
  std::optional<std::filesystem::path> reference_csv;
};

// Deterministic planar environment stepped by PD-actuated torques at sim_hz
// with a control interface at control_hz.
class Env {
 public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }
  int64_t time_index() const { return t_; }
  int episode_steps() const { return episode_steps_; }
  const CharacterState& state() const { return state_; }

  ReferenceFrame reference_at(int64_t t) const;
  ReferenceFrame current_reference() const { return reference_at(t_); }
  // Reference pose with velocities obtained by central differences.
  CharacterState reference_state_at(int64_t t) const;

  // Reference state initialization at a uniformly random phase.
  std::pair<CharacterState, ReferenceFrame> reset_rsi(Rng& rng);
  std::pair<CharacterState, ReferenceFrame> reset_rsi();  // internal stream
  std::pair<CharacterState, ReferenceFrame> reset_at(int64_t t0);

  // Runs sim_hz/control_hz PD substeps, advances the reference index and
  // scores the new state. Throws SimulationDiverged on non-finite dynamics.
  StepResult step(const Vec& action);

  // Observation: [root pose error, root velocities,] joint angles, velocities.
  Vec observe() const;

  bool check_termination(const CharacterState& s, const ReferenceFrame& ref) const;
  void reward_components(const CharacterState& s, const ReferenceFrame& ref, double* r_pos,
                         double* r_ori, double* r_joint) const;

  void set_tracing(bool on);
  bool tracing() const { return tracing_; }
  // Throws StateError when tracing was never enabled.
  const SimRateTrace& sim_trace() const;

  // Perturbation hooks, consumed by the next step().
  void queue_root_impulse(double px, double pz);
  void queue_joint_torque_bias(int joint, double torque, int control_steps);

  virtual double mechanical_energy() const = 0;

  // Height of the contact point above ground for contact-model environments;
  // negative while penetrating, nullopt for fixed-base chains.
  virtual std::optional<double> foot_clearance() const { return std::nullopt; }

  // Direct state override for playback experiments and tests.
  void set_state(const CharacterState& s) { state_ = s; }

 protected:
  Env(EnvSpec spec, uint64_t seed, const EnvOverrides& ov);

  // Procedural reference at a phase in [0, 1).
  virtual void reference_pose(double phase, double* root_x, double* root_z, double* root_ori,
                              Vec* joints) const = 0;
  // One semi-implicit Euler substep under the given joint torques.
  virtual void substep(const Vec& tau, double dt) = 0;
  // Consume a queued root impulse; default ignores it (fixed base).
  virtual void apply_root_impulse(double /*px*/, double /*pz*/) {}

  EnvSpec spec_;
  CharacterState state_;

 private:
  void start_trace_segment();
  void record_trace_sample();

  int64_t t_ = 0;
  int episode_steps_ = 0;
  Rng rng_;
  bool tracing_ = false;
  bool trace_ever_enabled_ = false;
  SimRateTrace trace_;

  std::optional<std::pair<double, double>> pending_impulse_;
  int torque_bias_joint_ = -1;
  double torque_bias_ = 0.0;
  int torque_bias_steps_ = 0;

  // Optional CSV reference table, one row per control step of the cycle.
  struct RefTable {
    int rows = 0;
    Vec root;    // rows * 3
    Vec joints;  // rows * J
  };
  std::optional<RefTable> ref_table_;
};

// name in {pendulum-track, acrobot-track, hopper2d}; throws ConfigError.
std::unique_ptr<Env> make_env(const std::string& name, uint64_t seed,
                              const EnvOverrides& overrides = {});

// Wrapped angle difference in (-pi, pi].
double wrap_angle(double a);

}  // namespace lpn

#endif  // LPN_ENV_HPP_
