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

#ifndef LPN_POLICY_HPP_
#define LPN_POLICY_HPP_

#include <filesystem>
#include <string>
#include <utility>

#include "lpn/mlp.hpp"
#include "lpn/sim_types.hpp"

namespace lpn {

enum class PolicyKind { FF, LPN };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

// Time-varying linear feedback: action = k_mat * s + k_ff + reference action.
struct LinearGains {
  Mat k_mat;  // m x n
  Vec k_ff;   // m
};

// Reference encoding fed to the networks:
// [sin 2*pi*phase, cos 2*pi*phase, root x, root z, root ori, joint angles].
Vec encode_reference(const ReferenceFrame& ref);
int reference_encoding_dim(int joints);

struct Policy {
  PolicyKind kind = PolicyKind::LPN;
  NetParams net;
  double sigma = 0.1;  // fixed exploration stddev
  int n = 0;           // character state dimension
  int m = 0;           // action dimension
  int n_ref = 0;       // reference encoding dimension
  std::string env_name;
};

// LPN: net maps ref encoding -> m*n + m outputs; FF: [obs, ref] -> m outputs.
Policy make_policy(PolicyKind kind, const EnvSpec& spec, int hidden, double sigma, Rng& rng);

// Network output reshaped row-major into (k_mat, k_ff). Gains depend only on
// the reference, never on the character state.
LinearGains lpn_gains(const NetParams& net, const Vec& ref_enc, int m, int n);
LinearGains lpn_gains(const NetParams& net, const Vec& ref_enc, int m, int n, ForwardTrace& trace);

Vec lpn_action(const LinearGains& g, const Vec& obs, const Vec& ref_action);
Vec ff_action(const NetParams& net, const Vec& obs, const Vec& ref_enc, const Vec& ref_action);

// Mean action of either head (residual around the reference action).
Vec policy_mean(const Policy& p, const Vec& obs, const Vec& ref_enc, const Vec& ref_action);

// d(mean)/d(obs): the gains matrix itself for LPN (no differentiation), the
// network input jacobian restricted to the obs columns for FF.
Mat policy_jacobian(const Policy& p, const Vec& obs, const Vec& ref_enc);

// a = mean + sigma * z with z ~ N(0, I); returns the sample and its log
// probability under the diagonal Gaussian.
std::pair<Vec, double> sample_action(const Vec& mean, double sigma, Rng& rng);
double gaussian_logp(const Vec& mean, double sigma, const Vec& a);

// Versioned JSON checkpoint; round-trips parameters losslessly.
void save_checkpoint(const Policy& p, const std::filesystem::path& path);
Policy load_checkpoint(const std::filesystem::path& path);
// Also verifies the stored kind.
Policy load_checkpoint(const std::filesystem::path& path, PolicyKind expected);

}  // namespace lpn

#endif  // LPN_POLICY_HPP_
