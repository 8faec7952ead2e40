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

#include "lpn/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lpn/error.hpp"

namespace lpn {

namespace {

constexpr double kGravity = 9.81;

bool state_finite(const CharacterState& s) {
  if (s.root) {
    const RootState& r = *s.root;
    if (!std::isfinite(r.x) || !std::isfinite(r.z) || !std::isfinite(r.ori) ||
        !std::isfinite(r.vx) || !std::isfinite(r.vz) || !std::isfinite(r.ang_vel)) {
      return false;
    }
  }
  return all_finite(s.q) && all_finite(s.qd);
}

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

Env::Env(EnvSpec spec, uint64_t seed, const EnvOverrides& ov) : spec_(std::move(spec)), rng_(seed) {
  if (ov.kp) std::fill(spec_.kp.begin(), spec_.kp.end(), *ov.kp);
  if (ov.kd) std::fill(spec_.kd.begin(), spec_.kd.end(), *ov.kd);
  if (ov.torque_limit) spec_.torque_limit = *ov.torque_limit;
  if (ov.max_episode_steps) spec_.max_episode_steps = *ov.max_episode_steps;
  if (spec_.sim_hz % spec_.control_hz != 0) {
    throw ConfigError("env " + spec_.name + ": sim_hz must be divisible by control_hz");
  }
  if (ov.reference_csv) {
    std::ifstream in(*ov.reference_csv);
    if (!in) throw IoError("reference csv: cannot open " + ov.reference_csv->string());
    RefTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> row;
      bool numeric = true;
      while (std::getline(ss, cell, ',')) {
        try {
          size_t pos = 0;
          row.push_back(std::stod(cell, &pos));
        } catch (const std::exception&) {
          numeric = false;
          break;
        }
      }
      if (!numeric) {
        if (table.rows == 0) continue;  // header line
        throw IoError("reference csv line " + std::to_string(line_no) + ": non-numeric cell");
      }
      if (static_cast<int>(row.size()) != 4 + spec_.joints) {
        throw IoError("reference csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(4 + spec_.joints) + " columns, got " +
                      std::to_string(row.size()));
      }
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw IoError("reference csv line " + std::to_string(line_no) + ": non-finite value");
        }
      }
      table.root.push_back(row[1]);
      table.root.push_back(row[2]);
      table.root.push_back(row[3]);
      for (int j = 0; j < spec_.joints; ++j) table.joints.push_back(row[4 + j]);
      ++table.rows;
    }
    if (table.rows < 2) throw IoError("reference csv: need at least 2 rows");
    ref_table_ = std::move(table);
    spec_.cycle_steps = ref_table_->rows;
  }
}

ReferenceFrame Env::reference_at(int64_t t) const {
  ReferenceFrame ref;
  ref.t = t;
  const int cycle = spec_.cycle_steps;
  const int64_t idx = ((t % cycle) + cycle) % cycle;
  ref.phase = static_cast<double>(idx) / static_cast<double>(cycle);
  ref.joints.resize(spec_.joints);
  if (ref_table_) {
    ref.root_x = ref_table_->root[3 * idx + 0];
    ref.root_z = ref_table_->root[3 * idx + 1];
    ref.root_ori = ref_table_->root[3 * idx + 2];
    for (int j = 0; j < spec_.joints; ++j) {
      ref.joints[j] = ref_table_->joints[idx * spec_.joints + j];
    }
  } else {
    reference_pose(ref.phase, &ref.root_x, &ref.root_z, &ref.root_ori, &ref.joints);
  }
  // All joints are actuated in these environments.
  ref.actuated_targets = ref.joints;
  return ref;
}

CharacterState Env::reference_state_at(int64_t t) const {
  const ReferenceFrame here = reference_at(t);
  const ReferenceFrame prev = reference_at(t - 1);
  const ReferenceFrame next = reference_at(t + 1);
  const double fd = 0.5 * static_cast<double>(spec_.control_hz);

  CharacterState s;
  s.q = here.joints;
  s.qd.resize(spec_.joints);
  for (int j = 0; j < spec_.joints; ++j) s.qd[j] = (next.joints[j] - prev.joints[j]) * fd;
  if (!spec_.fixed_base) {
    RootState r;
    r.x = here.root_x;
    r.z = here.root_z;
    r.ori = here.root_ori;
    r.vx = (next.root_x - prev.root_x) * fd;
    r.vz = (next.root_z - prev.root_z) * fd;
    r.ang_vel = wrap_angle(next.root_ori - prev.root_ori) * fd;
    s.root = r;
  }
  return s;
}

std::pair<CharacterState, ReferenceFrame> Env::reset_rsi(Rng& rng) {
  return reset_at(rng.uniform_int(spec_.cycle_steps));
}

std::pair<CharacterState, ReferenceFrame> Env::reset_rsi() { return reset_rsi(rng_); }

std::pair<CharacterState, ReferenceFrame> Env::reset_at(int64_t t0) {
  t_ = t0;
  episode_steps_ = 0;
  state_ = reference_state_at(t0);
  pending_impulse_.reset();
  torque_bias_steps_ = 0;
  if (tracing_) start_trace_segment();
  return {state_, reference_at(t0)};
}

void Env::set_tracing(bool on) {
  tracing_ = on;
  if (on) {
    trace_ever_enabled_ = true;
    trace_.rate_hz = static_cast<double>(spec_.sim_hz);
    trace_.joints = spec_.joints;
    start_trace_segment();
  }
}

const SimRateTrace& Env::sim_trace() const {
  if (!trace_ever_enabled_) throw StateError("sim_trace: tracing was not enabled");
  return trace_;
}

void Env::start_trace_segment() {
  if (!trace_.segments.empty() && trace_.segments.back().samples == 0) return;
  trace_.segments.emplace_back();
}

void Env::record_trace_sample() {
  SimRateTrace::Segment& seg = trace_.segments.back();
  for (int j = 0; j < spec_.joints; ++j) seg.pos.push_back(state_.q[j]);
  for (int j = 0; j < spec_.joints; ++j) seg.vel.push_back(state_.qd[j]);
  ++seg.samples;
}

void Env::queue_root_impulse(double px, double pz) {
  if (spec_.fixed_base) {
    throw ArgumentError("queue_root_impulse: " + spec_.name + " is fixed-base");
  }
  pending_impulse_ = {px, pz};
}

void Env::queue_joint_torque_bias(int joint, double torque, int control_steps) {
  if (joint < 0 || joint >= spec_.joints) throw ArgumentError("torque bias: joint out of range");
  torque_bias_joint_ = joint;
  torque_bias_ = torque;
  torque_bias_steps_ = control_steps;
}

void Env::reward_components(const CharacterState& s, const ReferenceFrame& ref, double* r_pos,
                            double* r_ori, double* r_joint) const {
  double joint_err2 = 0.0;
  for (int j = 0; j < spec_.joints; ++j) {
    const double d = ref.joints[j] - s.q[j];
    joint_err2 += d * d;
  }
  *r_joint = std::exp(-2.0 * joint_err2);
  if (spec_.fixed_base || !s.root) {
    *r_pos = 1.0;
    *r_ori = 1.0;
    return;
  }
  const double dx = ref.root_x - s.root->x;
  const double dz = ref.root_z - s.root->z;
  *r_pos = std::exp(-50.0 * (dx * dx + dz * dz));
  const double dori = wrap_angle(ref.root_ori - s.root->ori);
  *r_ori = std::exp(-10.0 * dori * dori);
}

bool Env::check_termination(const CharacterState& s, const ReferenceFrame& ref) const {
  for (int j = 0; j < spec_.joints; ++j) {
    if (std::abs(ref.joints[j] - s.q[j]) > spec_.joint_termination) return true;
  }
  if (!spec_.fixed_base && s.root) {
    if (std::abs(wrap_angle(ref.root_ori - s.root->ori)) > spec_.ori_termination) return true;
    if (s.root->z < spec_.height_termination * ref.root_z) return true;
  }
  return false;
}

StepResult Env::step(const Vec& action) {
  if (static_cast<int>(action.size()) != spec_.action_dim) {
    throw ArgumentError("step: action length " + std::to_string(action.size()) +
                        " does not match m = " + std::to_string(spec_.action_dim));
  }
  if (!all_finite(action)) throw ArgumentError("step: non-finite action");

  Vec target(spec_.action_dim);
  for (int j = 0; j < spec_.action_dim; ++j) {
    target[j] = std::clamp(action[j], spec_.action_low[j], spec_.action_high[j]);
  }

  if (pending_impulse_) {
    apply_root_impulse(pending_impulse_->first, pending_impulse_->second);
    pending_impulse_.reset();
  }

  const int substeps = spec_.sim_hz / spec_.control_hz;
  const double dt = 1.0 / static_cast<double>(spec_.sim_hz);
  Vec tau(spec_.joints, 0.0);
  for (int s = 0; s < substeps; ++s) {
    for (int j = 0; j < spec_.joints; ++j) {
      double u = spec_.kp[j] * (target[j] - state_.q[j]) - spec_.kd[j] * state_.qd[j];
      if (torque_bias_steps_ > 0 && j == torque_bias_joint_) u += torque_bias_;
      tau[j] = std::clamp(u, -spec_.torque_limit, spec_.torque_limit);
    }
    substep(tau, dt);
    if (tracing_) record_trace_sample();
  }
  if (torque_bias_steps_ > 0) --torque_bias_steps_;

  if (!state_finite(state_)) {
    throw SimulationDiverged("env " + spec_.name + ": non-finite state at t = " +
                             std::to_string(t_));
  }

  ++t_;
  ++episode_steps_;
  const ReferenceFrame ref = reference_at(t_);

  StepResult out;
  out.state = state_;
  reward_components(state_, ref, &out.r_pos, &out.r_ori, &out.r_joint);
  out.reward = 0.3 * out.r_pos + 0.3 * out.r_ori + 0.4 * out.r_joint;
  out.terminated = check_termination(state_, ref);
  out.truncated = !out.terminated && episode_steps_ >= spec_.max_episode_steps;
  return out;
}

Vec Env::observe() const {
  Vec obs;
  obs.reserve(spec_.obs_dim);
  if (!spec_.fixed_base && state_.root) {
    const ReferenceFrame ref = reference_at(t_);
    obs.push_back(ref.root_x - state_.root->x);
    obs.push_back(ref.root_z - state_.root->z);
    obs.push_back(wrap_angle(ref.root_ori - state_.root->ori));
    obs.push_back(state_.root->vx);
    obs.push_back(state_.root->vz);
    obs.push_back(state_.root->ang_vel);
  }
  obs.insert(obs.end(), state_.q.begin(), state_.q.end());
  obs.insert(obs.end(), state_.qd.begin(), state_.qd.end());
  return obs;
}

// --- Pendulum ------------------------------------------------------------

namespace {

// Single rod pivoting at the origin, angle measured from straight down.
// Reference: j(t) = 0.8 sin(2 pi t / 1 s).
class PendulumEnv final : public Env {
 public:
  PendulumEnv(uint64_t seed, const EnvOverrides& ov) : Env(make_spec(), seed, ov) {
    state_.q.assign(1, 0.0);
    state_.qd.assign(1, 0.0);
  }

  double mechanical_energy() const override {
    return 0.5 * kInertia * state_.qd[0] * state_.qd[0] +
           kMass * kGravity * kComDist * (1.0 - std::cos(state_.q[0]));
  }

 protected:
  void reference_pose(double phase, double* root_x, double* root_z, double* root_ori,
                      Vec* joints) const override {
    *root_x = *root_z = *root_ori = 0.0;
    (*joints)[0] = 0.8 * std::sin(2.0 * M_PI * phase);
  }

  void substep(const Vec& tau, double dt) override {
    const double qdd =
        (tau[0] - kMass * kGravity * kComDist * std::sin(state_.q[0])) / kInertia;
    state_.qd[0] += dt * qdd;
    state_.q[0] += dt * state_.qd[0];
  }

 private:
  static constexpr double kMass = 1.0;
  static constexpr double kComDist = 0.5;       // rod length 1 m
  static constexpr double kInertia = 1.0 / 3.0;  // about the pivot

  static EnvSpec make_spec() {
    EnvSpec s;
    s.name = "pendulum-track";
    s.joints = 1;
    s.action_dim = 1;
    s.obs_dim = 2;
    s.fixed_base = true;
    s.kp.assign(1, 60.0);
    s.kd.assign(1, 6.0);
    s.action_low.assign(1, -2.5);
    s.action_high.assign(1, 2.5);
    s.cycle_steps = 30;  // 1.0 s cycle at 30 Hz
    return s;
  }
};

// --- Acrobot ---------------------------------------------------------------

// Two-link chain hanging from a fixed pivot, both joints actuated, angles
// from straight down. Phase-shifted sinusoid references.
class AcrobotEnv final : public Env {
 public:
  AcrobotEnv(uint64_t seed, const EnvOverrides& ov) : Env(make_spec(), seed, ov) {
    state_.q.assign(2, 0.0);
    state_.qd.assign(2, 0.0);
  }

  double mechanical_energy() const override {
    const double q1 = state_.q[0], q2 = state_.q[1];
    const double qd1 = state_.qd[0], qd2 = state_.qd[1];
    const double c2 = std::cos(q2);
    const double d11 = kM1 * kLc1 * kLc1 + kM2 * (kL1 * kL1 + kLc2 * kLc2 + 2 * kL1 * kLc2 * c2) +
                       kI1 + kI2;
    const double d12 = kM2 * (kLc2 * kLc2 + kL1 * kLc2 * c2) + kI2;
    const double d22 = kM2 * kLc2 * kLc2 + kI2;
    const double ke = 0.5 * (d11 * qd1 * qd1 + 2 * d12 * qd1 * qd2 + d22 * qd2 * qd2);
    const double pe = -kM1 * kGravity * kLc1 * std::cos(q1) -
                      kM2 * kGravity * (kL1 * std::cos(q1) + kLc2 * std::cos(q1 + q2));
    return ke + pe;
  }

 protected:
  void reference_pose(double phase, double* root_x, double* root_z, double* root_ori,
                      Vec* joints) const override {
    *root_x = *root_z = *root_ori = 0.0;
    (*joints)[0] = 0.5 * std::sin(2.0 * M_PI * phase);
    (*joints)[1] = 0.7 * std::cos(2.0 * M_PI * phase);
  }

  void substep(const Vec& tau, double dt) override {
    const double q1 = state_.q[0], q2 = state_.q[1];
    const double qd1 = state_.qd[0], qd2 = state_.qd[1];
    const double c2 = std::cos(q2), s2 = std::sin(q2);

    const double d11 = kM1 * kLc1 * kLc1 + kM2 * (kL1 * kL1 + kLc2 * kLc2 + 2 * kL1 * kLc2 * c2) +
                       kI1 + kI2;
    const double d12 = kM2 * (kLc2 * kLc2 + kL1 * kLc2 * c2) + kI2;
    const double d22 = kM2 * kLc2 * kLc2 + kI2;

    const double h1 = -kM2 * kL1 * kLc2 * s2 * (qd2 * qd2 + 2.0 * qd1 * qd2);
    const double h2 = kM2 * kL1 * kLc2 * s2 * qd1 * qd1;
    const double g1 = (kM1 * kLc1 + kM2 * kL1) * kGravity * std::sin(q1) +
                      kM2 * kLc2 * kGravity * std::sin(q1 + q2);
    const double g2 = kM2 * kLc2 * kGravity * std::sin(q1 + q2);

    const double b1 = tau[0] - h1 - g1;
    const double b2 = tau[1] - h2 - g2;
    const double det = d11 * d22 - d12 * d12;
    const double qdd1 = (d22 * b1 - d12 * b2) / det;
    const double qdd2 = (-d12 * b1 + d11 * b2) / det;

    state_.qd[0] += dt * qdd1;
    state_.qd[1] += dt * qdd2;
    state_.q[0] += dt * state_.qd[0];
    state_.q[1] += dt * state_.qd[1];
  }

 private:
  static constexpr double kM1 = 1.0, kM2 = 1.0;
  static constexpr double kL1 = 0.5, kL2 = 0.5;
  static constexpr double kLc1 = 0.25, kLc2 = 0.25;
  static constexpr double kI1 = kM1 * kL1 * kL1 / 12.0;
  static constexpr double kI2 = kM2 * kL2 * kL2 / 12.0;

  static EnvSpec make_spec() {
    EnvSpec s;
    s.name = "acrobot-track";
    s.joints = 2;
    s.action_dim = 2;
    s.obs_dim = 4;
    s.fixed_base = true;
    s.kp.assign(2, 60.0);
    s.kd.assign(2, 6.0);
    s.action_low.assign(2, -2.5);
    s.action_high.assign(2, 2.5);
    s.cycle_steps = 36;  // 1.2 s cycle at 30 Hz
    return s;
  }
};

// --- Hopper ---------------------------------------------------------------

// Floating torso with a two-joint leg (hip, knee) whose mass sits in a point
// foot; one-sided spring-damper ground contact with Coulomb-clamped friction.
// The reference is a crouch-extend cycle with the foot kept under the torso.
class Hopper2dEnv final : public Env {
 public:
  Hopper2dEnv(uint64_t seed, const EnvOverrides& ov) : Env(make_spec(), seed, ov) {
    state_.root = RootState{};
    state_.q.assign(2, 0.0);
    state_.qd.assign(2, 0.0);
  }

  double mechanical_energy() const override {
    const RootState& r = *state_.root;
    double jac[2][5], foot[2];
    foot_kinematics(jac, foot);
    const double qd[5] = {r.vx, r.vz, r.ang_vel, state_.qd[0], state_.qd[1]};
    double pdot[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 5; ++j) pdot[i] += jac[i][j] * qd[j];

    double ke = 0.5 * kTorsoMass * (r.vx * r.vx + r.vz * r.vz) +
                0.5 * kTorsoInertia * r.ang_vel * r.ang_vel +
                0.5 * kRotorInertia * (qd[3] * qd[3] + qd[4] * qd[4]) +
                0.5 * kFootMass * (pdot[0] * pdot[0] + pdot[1] * pdot[1]);
    double pe = kTorsoMass * kGravity * r.z + kFootMass * kGravity * foot[1];
    if (foot[1] < 0.0) pe += 0.5 * kContactStiffness * foot[1] * foot[1];
    return ke + pe;
  }

  std::optional<double> foot_clearance() const override {
    double jac[2][5], foot[2];
    foot_kinematics(jac, foot);
    return foot[1];
  }

 protected:
  void reference_pose(double phase, double* root_x, double* root_z, double* root_ori,
                      Vec* joints) const override {
    // Symmetric leg: hip -g, knee +2g keeps the foot under the root.
    const double crouch = 0.5 * (1.0 - std::cos(2.0 * M_PI * phase));
    const double g = 0.25 + 0.35 * crouch;
    (*joints)[0] = -g;
    (*joints)[1] = 2.0 * g;
    *root_x = 0.0;
    *root_z = (kThigh + kShank) * std::cos(g);
    *root_ori = 0.0;
  }

  void apply_root_impulse(double px, double pz) override {
    double m[5][5], rhs[5];
    mass_matrix(m);
    rhs[0] = px;
    rhs[1] = pz;
    rhs[2] = rhs[3] = rhs[4] = 0.0;
    double dqd[5];
    solve5(m, rhs, dqd);
    RootState& r = *state_.root;
    r.vx += dqd[0];
    r.vz += dqd[1];
    r.ang_vel += dqd[2];
    state_.qd[0] += dqd[3];
    state_.qd[1] += dqd[4];
  }

  void substep(const Vec& tau, double dt) override {
    RootState& r = *state_.root;
    double jac[2][5], foot[2];
    foot_kinematics(jac, foot);
    const double qd[5] = {r.vx, r.vz, r.ang_vel, state_.qd[0], state_.qd[1]};

    double pdot[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 5; ++j) pdot[i] += jac[i][j] * qd[j];

    // Contact force at the foot.
    double fx = 0.0, fz = 0.0;
    if (foot[1] < 0.0) {
      fz = std::max(0.0, -kContactStiffness * foot[1] - kContactDamping * pdot[1]);
      fx = std::clamp(-kTangentialDamping * pdot[0], -kFriction * fz, kFriction * fz);
    }

    // Generalized forces: torso gravity, joint torques, foot gravity+contact.
    double rhs[5] = {0.0, -kTorsoMass * kGravity, 0.0, tau[0], tau[1]};
    const double foot_force[2] = {fx, fz - kFootMass * kGravity};
    for (int j = 0; j < 5; ++j) {
      rhs[j] += jac[0][j] * foot_force[0] + jac[1][j] * foot_force[1];
    }

    // Velocity-product term: Jdot qd = -l1 d(a1) a1dot^2 - l2 d(a2) a2dot^2.
    const double a1 = r.ori + state_.q[0];
    const double a2 = a1 + state_.q[1];
    const double a1dot = qd[2] + qd[3];
    const double a2dot = a1dot + qd[4];
    const double jdqd[2] = {
        -kThigh * std::sin(a1) * a1dot * a1dot - kShank * std::sin(a2) * a2dot * a2dot,
        kThigh * std::cos(a1) * a1dot * a1dot + kShank * std::cos(a2) * a2dot * a2dot};
    for (int j = 0; j < 5; ++j) {
      rhs[j] -= kFootMass * (jac[0][j] * jdqd[0] + jac[1][j] * jdqd[1]);
    }

    double m[5][5];
    mass_matrix(m);
    double qdd[5];
    solve5(m, rhs, qdd);

    r.vx += dt * qdd[0];
    r.vz += dt * qdd[1];
    r.ang_vel += dt * qdd[2];
    state_.qd[0] += dt * qdd[3];
    state_.qd[1] += dt * qdd[4];
    r.x += dt * r.vx;
    r.z += dt * r.vz;
    r.ori += dt * r.ang_vel;
    state_.q[0] += dt * state_.qd[0];
    state_.q[1] += dt * state_.qd[1];
  }

 private:
  static constexpr double kTorsoMass = 4.0;
  static constexpr double kTorsoInertia = 0.08;
  static constexpr double kFootMass = 0.4;
  static constexpr double kRotorInertia = 0.02;
  static constexpr double kThigh = 0.4;
  static constexpr double kShank = 0.4;
  static constexpr double kContactStiffness = 2.0e4;
  static constexpr double kContactDamping = 200.0;
  static constexpr double kTangentialDamping = 200.0;
  static constexpr double kFriction = 0.8;

  // Foot position and its jacobian wrt (x, z, ori, q1, q2).
  void foot_kinematics(double jac[2][5], double foot[2]) const {
    const RootState& r = *state_.root;
    const double a1 = r.ori + state_.q[0];
    const double a2 = a1 + state_.q[1];
    const double s1 = std::sin(a1), c1 = std::cos(a1);
    const double s2 = std::sin(a2), c2 = std::cos(a2);
    foot[0] = r.x + kThigh * s1 + kShank * s2;
    foot[1] = r.z - kThigh * c1 - kShank * c2;
    jac[0][0] = 1.0;
    jac[0][1] = 0.0;
    jac[0][2] = kThigh * c1 + kShank * c2;
    jac[0][3] = jac[0][2];
    jac[0][4] = kShank * c2;
    jac[1][0] = 0.0;
    jac[1][1] = 1.0;
    jac[1][2] = kThigh * s1 + kShank * s2;
    jac[1][3] = jac[1][2];
    jac[1][4] = kShank * s2;
  }

  void mass_matrix(double m[5][5]) const {
    double jac[2][5], foot[2];
    foot_kinematics(jac, foot);
    const double diag[5] = {kTorsoMass, kTorsoMass, kTorsoInertia, kRotorInertia, kRotorInertia};
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        m[i][j] = kFootMass * (jac[0][i] * jac[0][j] + jac[1][i] * jac[1][j]);
      }
      m[i][i] += diag[i];
    }
  }

  // Gaussian elimination with partial pivoting; the matrix is SPD and tiny.
  static void solve5(double m[5][5], const double* rhs, double* x) {
    double aug[5][6];
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) aug[i][j] = m[i][j];
      aug[i][5] = rhs[i];
    }
    for (int col = 0; col < 5; ++col) {
      int pivot = col;
      for (int i = col + 1; i < 5; ++i) {
        if (std::abs(aug[i][col]) > std::abs(aug[pivot][col])) pivot = i;
      }
      if (pivot != col) {
        for (int j = 0; j < 6; ++j) std::swap(aug[col][j], aug[pivot][j]);
      }
      const double inv = 1.0 / aug[col][col];
      for (int i = col + 1; i < 5; ++i) {
        const double f = aug[i][col] * inv;
        if (f == 0.0) continue;
        for (int j = col; j < 6; ++j) aug[i][j] -= f * aug[col][j];
      }
    }
    for (int i = 4; i >= 0; --i) {
      double acc = aug[i][5];
      for (int j = i + 1; j < 5; ++j) acc -= aug[i][j] * x[j];
      x[i] = acc / aug[i][i];
    }
  }

  static EnvSpec make_spec() {
    EnvSpec s;
    s.name = "hopper2d";
    s.joints = 2;
    s.action_dim = 2;
    s.obs_dim = 10;
    s.fixed_base = false;
    // Stiffer than the fixed-base envs: the leg carries the body weight.
    s.kp.assign(2, 200.0);
    s.kd.assign(2, 8.0);
    s.action_low = {-1.5, -0.2};
    s.action_high = {0.5, 2.2};
    s.cycle_steps = 18;  // 0.6 s hop cycle at 30 Hz
    return s;
  }
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name, uint64_t seed, const EnvOverrides& ov) {
  if (name == "pendulum-track") return std::make_unique<PendulumEnv>(seed, ov);
  if (name == "acrobot-track") return std::make_unique<AcrobotEnv>(seed, ov);
  if (name == "hopper2d") return std::make_unique<Hopper2dEnv>(seed, ov);
  throw ConfigError("unknown environment '" + name +
                    "' (expected pendulum-track, acrobot-track or hopper2d)");
}

}  // namespace lpn
