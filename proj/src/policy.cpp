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

#include "lpn/policy.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lpn/error.hpp"

namespace lpn {

using nlohmann::json;

std::string to_string(PolicyKind kind) { return kind == PolicyKind::FF ? "ff" : "lpn"; }

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "ff") return PolicyKind::FF;
  if (s == "lpn") return PolicyKind::LPN;
  throw ConfigError("unknown policy kind '" + s + "' (expected ff or lpn)");
}

int reference_encoding_dim(int joints) { return 5 + joints; }

Vec encode_reference(const ReferenceFrame& ref) {
  Vec enc;
  enc.reserve(5 + ref.joints.size());
  enc.push_back(std::sin(2.0 * M_PI * ref.phase));
  enc.push_back(std::cos(2.0 * M_PI * ref.phase));
  enc.push_back(ref.root_x);
  enc.push_back(ref.root_z);
  enc.push_back(ref.root_ori);
  enc.insert(enc.end(), ref.joints.begin(), ref.joints.end());
  return enc;
}

Policy make_policy(PolicyKind kind, const EnvSpec& spec, int hidden, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw ConfigError("policy: sigma must be positive");
  Policy p;
  p.kind = kind;
  p.sigma = sigma;
  p.n = spec.obs_dim;
  p.m = spec.action_dim;
  p.n_ref = reference_encoding_dim(spec.joints);
  p.env_name = spec.name;
  const int d_in = (kind == PolicyKind::LPN) ? p.n_ref : p.n + p.n_ref;
  const int d_out = (kind == PolicyKind::LPN) ? p.m * p.n + p.m : p.m;
  p.net = init_params(d_in, hidden, d_out, rng);
  return p;
}

LinearGains lpn_gains(const NetParams& net, const Vec& ref_enc, int m, int n, ForwardTrace& trace) {
  if (net.out_dim() != m * n + m) {
    throw ConfigError("lpn_gains: net output " + std::to_string(net.out_dim()) +
                      " does not match m*n+m = " + std::to_string(m * n + m));
  }
  forward(net, ref_enc, trace);
  LinearGains g;
  g.k_mat = Mat(m, n);
  std::copy(trace.output.begin(), trace.output.begin() + static_cast<long>(m) * n,
            g.k_mat.a.begin());
  g.k_ff.assign(trace.output.begin() + static_cast<long>(m) * n, trace.output.end());
  return g;
}

LinearGains lpn_gains(const NetParams& net, const Vec& ref_enc, int m, int n) {
  ForwardTrace trace;
  return lpn_gains(net, ref_enc, m, n, trace);
}

Vec lpn_action(const LinearGains& g, const Vec& obs, const Vec& ref_action) {
  if (static_cast<int>(obs.size()) != g.k_mat.cols ||
      ref_action.size() != g.k_ff.size()) {
    throw ArgumentError("lpn_action: shape mismatch");
  }
  Vec a = matvec(g.k_mat, obs);
  for (size_t i = 0; i < a.size(); ++i) a[i] += g.k_ff[i] + ref_action[i];
  return a;
}

Vec ff_action(const NetParams& net, const Vec& obs, const Vec& ref_enc, const Vec& ref_action) {
  Vec input;
  input.reserve(obs.size() + ref_enc.size());
  input.insert(input.end(), obs.begin(), obs.end());
  input.insert(input.end(), ref_enc.begin(), ref_enc.end());
  if (static_cast<int>(input.size()) != net.in_dim()) {
    throw ConfigError("ff_action: input " + std::to_string(input.size()) +
                      " does not match net d_in " + std::to_string(net.in_dim()));
  }
  Vec a = forward(net, input).output;
  if (a.size() != ref_action.size()) throw ConfigError("ff_action: output/reference mismatch");
  for (size_t i = 0; i < a.size(); ++i) a[i] += ref_action[i];
  return a;
}

Vec policy_mean(const Policy& p, const Vec& obs, const Vec& ref_enc, const Vec& ref_action) {
  if (p.kind == PolicyKind::LPN) {
    return lpn_action(lpn_gains(p.net, ref_enc, p.m, p.n), obs, ref_action);
  }
  return ff_action(p.net, obs, ref_enc, ref_action);
}

Mat policy_jacobian(const Policy& p, const Vec& obs, const Vec& ref_enc) {
  if (p.kind == PolicyKind::LPN) {
    return lpn_gains(p.net, ref_enc, p.m, p.n).k_mat;
  }
  Vec input;
  input.insert(input.end(), obs.begin(), obs.end());
  input.insert(input.end(), ref_enc.begin(), ref_enc.end());
  const Mat full = input_jacobian(p.net, forward(p.net, input));
  Mat j(p.m, p.n);
  for (int i = 0; i < p.m; ++i)
    for (int c = 0; c < p.n; ++c) j(i, c) = full(i, c);
  return j;
}

std::pair<Vec, double> sample_action(const Vec& mean, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw ArgumentError("sample_action: sigma must be positive");
  Vec a(mean.size());
  for (size_t i = 0; i < mean.size(); ++i) a[i] = mean[i] + sigma * rng.normal();
  return {a, gaussian_logp(mean, sigma, a)};
}

double gaussian_logp(const Vec& mean, double sigma, const Vec& a) {
  if (mean.size() != a.size()) throw ArgumentError("gaussian_logp: length mismatch");
  const double log_norm = std::log(sigma) + 0.5 * std::log(2.0 * M_PI);
  double logp = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - mean[i];
    logp += -d * d / (2.0 * sigma * sigma) - log_norm;
  }
  return logp;
}

// --- Checkpoint I/O -------------------------------------------------------

namespace {

constexpr int kCheckpointVersion = 1;

json mat_to_json(const Mat& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Mat mat_from_json(const json& j, const std::string& field) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw ConfigError("checkpoint: field '" + field + "' is missing rows/cols/data");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<int>(data.size()) != rows * cols) {
    throw ConfigError("checkpoint: field '" + field + "' has inconsistent shape");
  }
  return Mat(rows, cols, std::move(data));
}

template <typename T>
T get_field(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("checkpoint: missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("checkpoint: field '" + field + "' has the wrong type");
  }
}

}  // namespace

void save_checkpoint(const Policy& p, const std::filesystem::path& path) {
  json j;
  j["format_version"] = kCheckpointVersion;
  j["kind"] = to_string(p.kind);
  j["env"] = p.env_name;
  j["n"] = p.n;
  j["m"] = p.m;
  j["n_ref"] = p.n_ref;
  j["hidden"] = p.net.hidden_dim();
  j["activation"] = "tanh";
  j["sigma"] = p.sigma;
  j["params"] = {{"w1", mat_to_json(p.net.w1)}, {"b1", p.net.b1}, {"w2", mat_to_json(p.net.w2)},
                 {"b2", p.net.b2},              {"w3", mat_to_json(p.net.w3)}, {"b3", p.net.b3}};
  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot write " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("save_checkpoint: write failed for " + path.string());
}

Policy load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("load_checkpoint: " + path.string() + " is not valid JSON: " + e.what());
  }

  const int version = get_field<int>(j, "format_version");
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint: unsupported format_version " + std::to_string(version));
  }
  Policy p;
  p.kind = policy_kind_from_string(get_field<std::string>(j, "kind"));
  p.env_name = get_field<std::string>(j, "env");
  p.n = get_field<int>(j, "n");
  p.m = get_field<int>(j, "m");
  p.n_ref = get_field<int>(j, "n_ref");
  const std::string activation = get_field<std::string>(j, "activation");
  if (activation != "tanh") {
    throw ConfigError("checkpoint: unsupported activation '" + activation + "'");
  }
  p.sigma = get_field<double>(j, "sigma");
  if (!j.contains("params")) throw ConfigError("checkpoint: missing field 'params'");
  const json& params = j.at("params");
  for (const char* name : {"w1", "b1", "w2", "b2", "w3", "b3"}) {
    if (!params.contains(name)) {
      throw ConfigError("checkpoint: missing parameter '" + std::string(name) + "'");
    }
  }
  p.net.w1 = mat_from_json(params.at("w1"), "w1");
  p.net.b1 = params.at("b1").get<Vec>();
  p.net.w2 = mat_from_json(params.at("w2"), "w2");
  p.net.b2 = params.at("b2").get<Vec>();
  p.net.w3 = mat_from_json(params.at("w3"), "w3");
  p.net.b3 = params.at("b3").get<Vec>();
  check_shapes(p.net);

  const int hidden = get_field<int>(j, "hidden");
  if (hidden != p.net.hidden_dim()) {
    throw ConfigError("checkpoint: field 'hidden' does not match parameter shapes");
  }
  const int expect_out = (p.kind == PolicyKind::LPN) ? p.m * p.n + p.m : p.m;
  const int expect_in = (p.kind == PolicyKind::LPN) ? p.n_ref : p.n + p.n_ref;
  if (p.net.out_dim() != expect_out || p.net.in_dim() != expect_in) {
    throw ConfigError("checkpoint: parameter shapes do not match kind/n/m/n_ref header");
  }
  return p;
}

Policy load_checkpoint(const std::filesystem::path& path, PolicyKind expected) {
  Policy p = load_checkpoint(path);
  if (p.kind != expected) {
    throw ConfigError("checkpoint: kind is '" + to_string(p.kind) + "', expected '" +
                      to_string(expected) + "'");
  }
  return p;
}

}  // namespace lpn
