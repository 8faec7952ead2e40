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

#ifndef LPN_SIM_TYPES_HPP_
#define LPN_SIM_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpn/numerics.hpp"

namespace lpn {

// Planar floating-base pose and twist: x right, z up, pitch about y.
struct RootState {
  double x = 0.0, z = 0.0, ori = 0.0;
  double vx = 0.0, vz = 0.0, ang_vel = 0.0;
};

// Minimal-coordinate simulated state. Fixed-base environments carry only the
// joint coordinates.
struct CharacterState {
  std::optional<RootState> root;
  Vec q;   // joint angles
  Vec qd;  // joint velocities
};

// One frame of the reference motion.
struct ReferenceFrame {
  int64_t t = 0;
  double phase = 0.0;  // (t mod cycle) / cycle, in [0, 1)
  double root_x = 0.0, root_z = 0.0, root_ori = 0.0;
  Vec joints;            // full reference joint angles
  Vec actuated_targets;  // actuated subset of `joints`
};

struct EnvSpec {
  std::string name;
  int joints = 0;      // J
  int action_dim = 0;  // m
  int obs_dim = 0;     // n
  int sim_hz = 120;
  int control_hz = 30;
  bool fixed_base = true;
  Vec kp, kd;  // per joint
  double torque_limit = 40.0;
  Vec action_low, action_high;  // joint limits applied to commanded targets
  int cycle_steps = 0;          // control steps per reference cycle
  int max_episode_steps = 300;
  double ori_termination = 0.8;     // rad
  double joint_termination = 1.5;   // rad, per-joint infinity norm
  double height_termination = 0.6;  // fraction of reference height
};

struct StepResult {
  CharacterState state;
  double reward = 0.0;
  double r_pos = 1.0, r_ori = 1.0, r_joint = 1.0;
  bool terminated = false;
  bool truncated = false;
};

// Joint positions/velocities recorded at the simulation rate, segmented by
// episode. Each segment stores samples x joints, row-major.
struct SimRateTrace {
  double rate_hz = 120.0;
  int joints = 0;

  struct Segment {
    int samples = 0;
    Vec pos;  // samples * joints
    Vec vel;
    double pos_at(int s, int j, int joints_) const { return pos[static_cast<size_t>(s) * joints_ + j]; }
    double vel_at(int s, int j, int joints_) const { return vel[static_cast<size_t>(s) * joints_ + j]; }
  };
  std::vector<Segment> segments;
};

}  // namespace lpn

#endif  // LPN_SIM_TYPES_HPP_
