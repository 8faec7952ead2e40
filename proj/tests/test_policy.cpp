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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lpn/env.hpp"
#include "lpn/error.hpp"
#include "lpn/policy.hpp"

using namespace lpn;
namespace fs = std::filesystem;

namespace {

Policy random_policy(PolicyKind kind, const std::string& env_name, uint64_t seed,
                     int hidden = 16) {
  auto env = make_env(env_name, 0);
  Rng rng(seed);
  Policy p = make_policy(kind, env->spec(), hidden, 0.1, rng);
  for (double& v : p.net.w3.a) v *= 50.0;  // undo the small-output init
  return p;
}

ReferenceFrame random_ref(int joints, Rng& rng) {
  ReferenceFrame ref;
  ref.t = rng.uniform_int(1000);
  ref.phase = rng.uniform();
  ref.root_x = rng.uniform(-0.2, 0.2);
  ref.root_z = rng.uniform(0.4, 0.9);
  ref.root_ori = rng.uniform(-0.3, 0.3);
  ref.joints.resize(joints);
  for (double& v : ref.joints) v = rng.uniform(-0.8, 0.8);
  ref.actuated_targets = ref.joints;
  return ref;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "lpn_policy_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("reference encoding layout") {
  ReferenceFrame ref;
  ref.phase = 0.25;
  ref.root_x = 1.0;
  ref.root_z = 2.0;
  ref.root_ori = 3.0;
  ref.joints = {4.0, 5.0};
  const Vec enc = encode_reference(ref);
  REQUIRE(enc.size() == 7);
  CHECK(enc[0] == doctest::Approx(1.0));  // sin(pi/2)
  CHECK(enc[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(enc[2] == 1.0);
  CHECK(enc[3] == 2.0);
  CHECK(enc[4] == 3.0);
  CHECK(enc[5] == 4.0);
  CHECK(enc[6] == 5.0);
  CHECK(reference_encoding_dim(2) == 7);
}

TEST_CASE("lpn gains: zero net plays back the reference") {
  Policy p = random_policy(PolicyKind::LPN, "pendulum-track", 3);
  for (double& v : p.net.w3.a) v = 0.0;
  for (double& v : p.net.b3) v = 0.0;

  Rng rng(4);
  const ReferenceFrame ref = random_ref(1, rng);
  const LinearGains g = lpn_gains(p.net, encode_reference(ref), p.m, p.n);
  CHECK(frobenius_sq(g.k_mat) == 0.0);
  CHECK(g.k_ff[0] == 0.0);

  const Vec obs = {0.3, -0.8};
  const Vec a = lpn_action(g, obs, ref.actuated_targets);
  CHECK(a[0] == ref.actuated_targets[0]);
}

TEST_CASE("lpn gains depend only on the reference") {
  Policy p = random_policy(PolicyKind::LPN, "hopper2d", 7);
  Rng rng(8);
  const ReferenceFrame ref = random_ref(2, rng);
  const Vec enc = encode_reference(ref);

  const LinearGains g1 = lpn_gains(p.net, enc, p.m, p.n);
  const LinearGains g2 = lpn_gains(p.net, enc, p.m, p.n);
  CHECK(g1.k_mat == g2.k_mat);
  CHECK(g1.k_ff == g2.k_ff);

  // State-independence: the same gains act on two different states.
  Vec s1(p.n), s2(p.n);
  for (double& v : s1) v = rng.uniform(-1, 1);
  for (double& v : s2) v = rng.uniform(-1, 1);
  const Vec a1 = lpn_action(g1, s1, ref.actuated_targets);
  const Vec a2 = lpn_action(g1, s2, ref.actuated_targets);
  CHECK(a1 != a2);
}

TEST_CASE("lpn gains reshape round-trips the net output") {
  Policy p = random_policy(PolicyKind::LPN, "acrobot-track", 11);
  Rng rng(12);
  const Vec enc = encode_reference(random_ref(2, rng));
  ForwardTrace trace;
  const LinearGains g = lpn_gains(p.net, enc, p.m, p.n, trace);

  Vec flat;
  flat.insert(flat.end(), g.k_mat.a.begin(), g.k_mat.a.end());
  flat.insert(flat.end(), g.k_ff.begin(), g.k_ff.end());
  CHECK(flat == trace.output);
}

TEST_CASE("lpn action matches independent evaluation") {
  Rng rng(21);
  LinearGains g;
  g.k_mat = Mat(2, 4);
  for (double& v : g.k_mat.a) v = rng.uniform(-1, 1);
  g.k_ff = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  Vec s(4), ref(2);
  for (double& v : s) v = rng.uniform(-1, 1);
  for (double& v : ref) v = rng.uniform(-1, 1);

  const Vec a = lpn_action(g, s, ref);
  for (int i = 0; i < 2; ++i) {
    double expect = g.k_ff[i] + ref[i];
    for (int j = 0; j < 4; ++j) expect += g.k_mat(i, j) * s[j];
    CHECK(a[i] == doctest::Approx(expect).epsilon(1e-14));
  }

  SUBCASE("zero state gives k plus reference") {
    const Vec a0 = lpn_action(g, Vec(4, 0.0), ref);
    for (int i = 0; i < 2; ++i) CHECK(a0[i] == g.k_ff[i] + ref[i]);
  }
}

TEST_CASE("ff action is the net output plus the reference") {
  Policy p = random_policy(PolicyKind::FF, "pendulum-track", 31);
  Rng rng(32);
  const ReferenceFrame ref = random_ref(1, rng);
  const Vec enc = encode_reference(ref);
  const Vec obs = {0.4, -0.2};

  SUBCASE("zero net plays back the reference") {
    Policy z = p;
    for (double& v : z.net.w3.a) v = 0.0;
    for (double& v : z.net.b3) v = 0.0;
    const Vec a = ff_action(z.net, obs, enc, ref.actuated_targets);
    CHECK(a[0] == ref.actuated_targets[0]);
  }

  Vec input = obs;
  input.insert(input.end(), enc.begin(), enc.end());
  const Vec net_out = forward(p.net, input).output;
  const Vec a = ff_action(p.net, obs, enc, ref.actuated_targets);
  CHECK(a[0] == net_out[0] + ref.actuated_targets[0]);
}

TEST_CASE("policy jacobian: lpn is the gains matrix, bitwise") {
  Policy p = random_policy(PolicyKind::LPN, "hopper2d", 41);
  Rng rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    const ReferenceFrame ref = random_ref(2, rng);
    const Vec enc = encode_reference(ref);
    Vec obs(p.n);
    for (double& v : obs) v = rng.uniform(-1, 1);
    const Mat j = policy_jacobian(p, obs, enc);
    const LinearGains g = lpn_gains(p.net, enc, p.m, p.n);
    CHECK(j == g.k_mat);

    // Finite-difference sanity at 1e-6: the map is exactly linear in obs.
    const double h = 1e-6;
    for (int col = 0; col < p.n; ++col) {
      Vec op = obs, om = obs;
      op[col] += h;
      om[col] -= h;
      const Vec ap = policy_mean(p, op, enc, ref.actuated_targets);
      const Vec am = policy_mean(p, om, enc, ref.actuated_targets);
      for (int row = 0; row < p.m; ++row) {
        const double fd = (ap[row] - am[row]) / (2.0 * h);
        CHECK(std::abs(fd - j(row, col)) <= 1e-6 * std::max(1.0, std::abs(j(row, col))));
      }
    }
  }
}

TEST_CASE("policy jacobian: ff differentiates the obs columns only") {
  Policy p = random_policy(PolicyKind::FF, "acrobot-track", 51);

  SUBCASE("zero net has zero jacobian") {
    Policy z = p;
    for (double& v : z.net.w1.a) v = 0.0;
    Rng rng(52);
    const ReferenceFrame ref = random_ref(2, rng);
    const Mat j = policy_jacobian(z, Vec(z.n, 0.5), encode_reference(ref));
    CHECK(frobenius_sq(j) == 0.0);
  }

  Rng rng(53);
  const ReferenceFrame ref = random_ref(2, rng);
  const Vec enc = encode_reference(ref);
  Vec obs(p.n);
  for (double& v : obs) v = rng.uniform(-1, 1);
  const Mat j = policy_jacobian(p, obs, enc);
  REQUIRE(j.rows == p.m);
  REQUIRE(j.cols == p.n);

  const double h = 1e-5;
  for (int col = 0; col < p.n; ++col) {
    Vec op = obs, om = obs;
    op[col] += h;
    om[col] -= h;
    const Vec ap = policy_mean(p, op, enc, ref.actuated_targets);
    const Vec am = policy_mean(p, om, enc, ref.actuated_targets);
    for (int row = 0; row < p.m; ++row) {
      const double fd = (ap[row] - am[row]) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(j(row, col)), 1e-7});
      CHECK(std::abs(fd - j(row, col)) / denom <= 1e-4);
    }
  }
}

TEST_CASE("gaussian head log-probabilities") {
  // Zero deviation: logp = -m (ln sigma + ln(2 pi)/2).
  const Vec mean = {0.2, -0.4, 1.0};
  const double sigma = 0.3;
  CHECK(gaussian_logp(mean, sigma, mean) ==
        doctest::Approx(-3.0 * (std::log(sigma) + 0.5 * std::log(2.0 * M_PI))).epsilon(1e-12));

  // sigma = 0.1, one dimension, deviation 0.1.
  const double lp = gaussian_logp({0.0}, 0.1, {0.1});
  CHECK(lp == doctest::Approx(-0.5 - std::log(0.1) - 0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(lp == doctest::Approx(0.8836).epsilon(1e-4));
}

TEST_CASE("sampled actions have the configured spread") {
  Rng rng(61);
  const Vec mean = {0.5};
  const double sigma = 0.1;
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [a, logp] = sample_action(mean, sigma, rng);
    if (i < 100) CHECK(logp == doctest::Approx(gaussian_logp(mean, sigma, a)).epsilon(1e-12));
    sum += a[0];
    sumsq += a[0] * a[0];
  }
  const double m = sum / n;
  const double sd = std::sqrt(sumsq / n - m * m);
  CHECK(sd == doctest::Approx(sigma).epsilon(0.02));
  CHECK(m == doctest::Approx(mean[0]).epsilon(0.01));
}

TEST_CASE("checkpoint round-trip is lossless") {
  const fs::path path = temp_dir() / "ckpt.json";
  Policy p = random_policy(PolicyKind::LPN, "pendulum-track", 71, 8);
  save_checkpoint(p, path);
  const Policy q = load_checkpoint(path);
  CHECK(q.kind == p.kind);
  CHECK(q.env_name == p.env_name);
  CHECK(q.n == p.n);
  CHECK(q.m == p.m);
  CHECK(q.n_ref == p.n_ref);
  CHECK(q.sigma == p.sigma);
  CHECK(q.net.w1 == p.net.w1);
  CHECK(q.net.b1 == p.net.b1);
  CHECK(q.net.w2 == p.net.w2);
  CHECK(q.net.b2 == p.net.b2);
  CHECK(q.net.w3 == p.net.w3);
  CHECK(q.net.b3 == p.net.b3);
}

TEST_CASE("checkpoint rejects bad files naming the offending field") {
  const fs::path dir = temp_dir();
  Policy p = random_policy(PolicyKind::FF, "pendulum-track", 81, 8);
  const fs::path good = dir / "good.json";
  save_checkpoint(p, good);
  std::ifstream in(good);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  SUBCASE("wrong version") {
    const size_t pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"format_version\": 9");
    const fs::path bad = dir / "bad_version.json";
    std::ofstream(bad) << text;
    CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("format_version"), ConfigError);
  }

  SUBCASE("ff checkpoint loaded as lpn") {
    CHECK_THROWS_WITH_AS(load_checkpoint(good, PolicyKind::LPN), doctest::Contains("kind"),
                         ConfigError);
    CHECK_NOTHROW(load_checkpoint(good, PolicyKind::FF));
  }

  SUBCASE("missing field is named") {
    // n_ref sits mid-object, so dropping its whole line keeps the JSON valid.
    const size_t pos = text.find("\"n_ref\"");
    REQUIRE(pos != std::string::npos);
    const size_t end = text.find('\n', pos);
    text.erase(pos, end - pos + 1);
    const fs::path bad = dir / "bad_missing.json";
    std::ofstream(bad) << text;
    CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("n_ref"), ConfigError);
  }

  SUBCASE("not json at all") {
    const fs::path bad = dir / "bad_garbage.json";
    std::ofstream(bad) << "not json";
    CHECK_THROWS_AS(load_checkpoint(bad), ConfigError);
  }
}
