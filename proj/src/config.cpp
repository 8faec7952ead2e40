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

#include "lpn/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpn/error.hpp"

namespace lpn {

bool operator==(const TrainConfig& a, const TrainConfig& b) {
  return a.num_envs == b.num_envs && a.samples_per_iter == b.samples_per_iter &&
         a.minibatch == b.minibatch && a.epochs == b.epochs && a.max_iters == b.max_iters &&
         a.gamma == b.gamma && a.gae_lambda == b.gae_lambda && a.clip_eps == b.clip_eps &&
         a.lr == b.lr && a.value_loss_weight == b.value_loss_weight && a.w_jac == b.w_jac &&
         a.w_action == b.w_action && a.regularizer == b.regularizer && a.seed == b.seed &&
         a.hidden == b.hidden && a.sigma == b.sigma && a.num_threads == b.num_threads &&
         a.early_stop == b.early_stop && a.early_stop_reward == b.early_stop_reward;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.train == b.train && a.env_name == b.env_name && a.policy == b.policy &&
         a.out_dir == b.out_dir && a.trace == b.trace && a.ref_csv == b.ref_csv;
}

namespace {

std::string trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Context {
  std::string origin;
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

int parse_int(const std::string& v, const Context& ctx) {
  try {
    size_t pos = 0;
    const long val = std::stol(v, &pos);
    if (pos != v.size()) ctx.fail("expected an integer, got '" + v + "'");
    return static_cast<int>(val);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    ctx.fail("expected an integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& v, const Context& ctx) {
  try {
    size_t pos = 0;
    const unsigned long long val = std::stoull(v, &pos);
    if (pos != v.size()) ctx.fail("expected an unsigned integer, got '" + v + "'");
    return val;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    ctx.fail("expected an unsigned integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const Context& ctx) {
  try {
    size_t pos = 0;
    const double val = std::stod(v, &pos);
    if (pos != v.size()) ctx.fail("expected a number, got '" + v + "'");
    return val;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    ctx.fail("expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const Context& ctx) {
  if (v == "true") return true;
  if (v == "false") return false;
  ctx.fail("expected true or false, got '" + v + "'");
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  bool have_env = false;
  Context ctx{origin, 0};

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++ctx.line;
    std::string line = raw;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) ctx.fail("empty key");
    if (value.empty()) ctx.fail("empty value for key '" + key + "'");

    TrainConfig& t = cfg.train;
    try {
      if (key == "env") {
        cfg.env_name = value;
        have_env = true;
      } else if (key == "policy") {
        cfg.policy = policy_kind_from_string(value);
      } else if (key == "regularizer") {
        t.regularizer = regularizer_from_string(value);
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else if (key == "ref_csv") {
        cfg.ref_csv = value;
      } else if (key == "trace") {
        cfg.trace = parse_bool(value, ctx);
      } else if (key == "seed") {
        t.seed = parse_u64(value, ctx);
      } else if (key == "num_envs") {
        t.num_envs = parse_int(value, ctx);
      } else if (key == "samples_per_iter") {
        t.samples_per_iter = parse_int(value, ctx);
      } else if (key == "minibatch") {
        t.minibatch = parse_int(value, ctx);
      } else if (key == "epochs") {
        t.epochs = parse_int(value, ctx);
      } else if (key == "max_iters") {
        t.max_iters = parse_int(value, ctx);
      } else if (key == "hidden") {
        t.hidden = parse_int(value, ctx);
      } else if (key == "num_threads") {
        t.num_threads = parse_int(value, ctx);
      } else if (key == "gamma") {
        t.gamma = parse_double(value, ctx);
      } else if (key == "gae_lambda") {
        t.gae_lambda = parse_double(value, ctx);
      } else if (key == "clip_eps") {
        t.clip_eps = parse_double(value, ctx);
      } else if (key == "lr") {
        t.lr = parse_double(value, ctx);
      } else if (key == "value_loss_weight") {
        t.value_loss_weight = parse_double(value, ctx);
      } else if (key == "w_jac") {
        t.w_jac = parse_double(value, ctx);
      } else if (key == "w_action") {
        t.w_action = parse_double(value, ctx);
      } else if (key == "sigma") {
        t.sigma = parse_double(value, ctx);
      } else if (key == "early_stop") {
        t.early_stop = parse_bool(value, ctx);
      } else if (key == "early_stop_reward") {
        t.early_stop_reward = parse_double(value, ctx);
      } else {
        ctx.fail("unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    }
  }
  if (!have_env) throw ConfigError(origin + ": missing required key 'env'");
  validate(cfg.train);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string config_to_text(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  std::ostringstream out;
  out << "env = " << cfg.env_name << "\n";
  out << "policy = " << to_string(cfg.policy) << "\n";
  out << "regularizer = " << to_string(t.regularizer) << "\n";
  out << "seed = " << t.seed << "\n";
  out << "num_envs = " << t.num_envs << "\n";
  out << "samples_per_iter = " << t.samples_per_iter << "\n";
  out << "minibatch = " << t.minibatch << "\n";
  out << "epochs = " << t.epochs << "\n";
  out << "max_iters = " << t.max_iters << "\n";
  out << "hidden = " << t.hidden << "\n";
  out << "num_threads = " << t.num_threads << "\n";
  out << "gamma = " << g17(t.gamma) << "\n";
  out << "gae_lambda = " << g17(t.gae_lambda) << "\n";
  out << "clip_eps = " << g17(t.clip_eps) << "\n";
  out << "lr = " << g17(t.lr) << "\n";
  out << "value_loss_weight = " << g17(t.value_loss_weight) << "\n";
  out << "w_jac = " << g17(t.w_jac) << "\n";
  out << "w_action = " << g17(t.w_action) << "\n";
  out << "sigma = " << g17(t.sigma) << "\n";
  out << "early_stop = " << (t.early_stop ? "true" : "false") << "\n";
  out << "early_stop_reward = " << g17(t.early_stop_reward) << "\n";
  out << "trace = " << (cfg.trace ? "true" : "false") << "\n";
  if (!cfg.out_dir.empty()) out << "out_dir = " << cfg.out_dir << "\n";
  if (cfg.ref_csv) out << "ref_csv = " << *cfg.ref_csv << "\n";
  return out.str();
}

void write_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_config: cannot write " + path.string());
  out << config_to_text(cfg);
}

}  // namespace lpn
