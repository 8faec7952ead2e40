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
#include <vector>

#include "lpn/error.hpp"
#include "lpn/numerics.hpp"

using namespace lpn;

namespace {

Mat random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.uniform(-scale, scale);
  return m;
}

double frob_diff(const Mat& x, const Mat& y) {
  REQUIRE(x.rows == y.rows);
  REQUIRE(x.cols == y.cols);
  double acc = 0.0;
  for (size_t i = 0; i < x.a.size(); ++i) {
    const double d = x.a[i] - y.a[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Independent oracle: eigenvalues of the symmetric matrix A^T A via classic
// two-sided Jacobi rotations. Deliberately separate from the SVD under test.
std::vector<double> symmetric_eigenvalues(Mat s) {
  REQUIRE(s.rows == s.cols);
  const int n = s.rows;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-30) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = s(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

Mat reconstruct(const SvdResult& s) {
  Mat us = s.u;
  for (int i = 0; i < us.rows; ++i)
    for (int j = 0; j < us.cols; ++j) us(i, j) *= s.sigma[j];
  return matmul(us, s.vt);
}

}  // namespace

TEST_CASE("svd diagonal and identity cases") {
  Mat d(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  SvdResult s = svd(d);
  CHECK(s.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
  // Rank-1 truncation of diag(3, 1): error is the dropped singular value.
  Mat t = truncate_rank(s, 1);
  CHECK(frob_diff(t, d) == doctest::Approx(1.0).epsilon(1e-12));
  Mat expect(2, 2);
  expect(0, 0) = 3.0;
  CHECK(frob_diff(t, expect) < 1e-10);

  SvdResult id = svd(identity(2));
  CHECK(id.sigma[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
  Mat uv = matmul(id.u, id.vt);
  Mat utu = matmul(transpose(uv), uv);
  CHECK(frob_diff(utu, identity(2)) < 1e-10);
}

TEST_CASE("svd reconstructs and matches eigenvalue oracle") {
  Rng rng(7);
  Mat a = random_mat(4, 6, rng);
  SvdResult s = svd(a);
  CHECK(frob_diff(reconstruct(s), a) < 1e-10);

  // sigma_i^2 are the eigenvalues of A^T A (top min(m,n) of them).
  std::vector<double> eig = symmetric_eigenvalues(matmul(transpose(a), a));
  REQUIRE(s.sigma.size() == 4);
  for (size_t i = 0; i < s.sigma.size(); ++i) {
    CHECK(s.sigma[i] * s.sigma[i] == doctest::Approx(eig[i]).epsilon(1e-9));
  }
}

TEST_CASE("svd orthogonality up to 64x64") {
  Rng rng(21);
  for (auto [m, n] : {std::pair{3, 3}, {8, 5}, {5, 8}, {64, 64}, {64, 17}}) {
    Mat a = random_mat(m, n, rng);
    SvdResult s = svd(a);
    Mat utu = matmul(transpose(s.u), s.u);
    Mat vvt = matmul(s.vt, transpose(s.vt));
    const int r = static_cast<int>(s.sigma.size());
    CHECK(frob_diff(utu, identity(r)) <= 1e-10);
    CHECK(frob_diff(vvt, identity(r)) <= 1e-10);
    CHECK(frob_diff(reconstruct(s), a) <= 1e-9);
    for (int i = 1; i < r; ++i) CHECK(s.sigma[i - 1] >= s.sigma[i]);
  }
}

TEST_CASE("eckart-young equality for every k") {
  Rng rng(3);
  for (auto [m, n] : {std::pair{5, 5}, {6, 9}, {12, 7}}) {
    Mat a = random_mat(m, n, rng);
    SvdResult s = svd(a);
    const int r = static_cast<int>(s.sigma.size());
    for (int k = 1; k <= r; ++k) {
      Mat t = truncate_rank(s, k);
      double tail = 0.0;
      for (int i = k; i < r; ++i) tail += s.sigma[i] * s.sigma[i];
      const double expected = std::sqrt(tail);
      const double err = frob_diff(t, a);
      CHECK(err == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("truncate_rank specific cases") {
  Rng rng(3);
  Mat a = random_mat(5, 5, rng);
  SvdResult s = svd(a);
  CHECK(frob_diff(truncate_rank(s, 5), a) < 1e-10);

  const double expected =
      std::sqrt(s.sigma[2] * s.sigma[2] + s.sigma[3] * s.sigma[3] + s.sigma[4] * s.sigma[4]);
  CHECK(frob_diff(truncate_rank(s, 2), a) == doctest::Approx(expected).epsilon(1e-9));

  CHECK_THROWS_AS(truncate_rank(s, 0), ArgumentError);
  CHECK_THROWS_AS(truncate_rank(s, 6), ArgumentError);
}

TEST_CASE("rdft constant signal is pure DC") {
  Vec x(50, 2.5);
  Spectrum sp = rdft_energy(x, 30.0);
  CHECK(sp.energy[0] == doctest::Approx(50 * 2.5 * 2.5).epsilon(1e-12));
  for (size_t k = 1; k < sp.energy.size(); ++k) CHECK(std::abs(sp.energy[k]) < 1e-12);
  CHECK(sp.freq_hz[0] == 0.0);
}

TEST_CASE("rdft integer-bin tone lands in its bin") {
  const int n = 300;
  const double rate = 30.0;
  Vec x(n);
  for (int t = 0; t < n; ++t) x[t] = std::sin(2.0 * M_PI * 3.0 * t / rate);
  Spectrum sp = rdft_energy(x, rate);
  double total = 0.0;
  for (double e : sp.energy) total += e;
  // 3 Hz at 0.1 Hz spacing: bin 30.
  CHECK(sp.freq_hz[30] == doctest::Approx(3.0));
  CHECK(sp.energy[30] == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("rdft matches naive dft and parseval") {
  Rng rng(11);
  for (int n : {64, 150, 37}) {
    Vec x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Spectrum sp = rdft_energy(x, 30.0);

    // Brute-force oracle.
    double sumsq = 0.0;
    for (double v : x) sumsq += v * v;
    for (size_t k = 0; k < sp.energy.size(); ++k) {
      double re = 0.0, im = 0.0;
      for (int t = 0; t < n; ++t) {
        const double ang = -2.0 * M_PI * static_cast<double>(k) * t / n;
        re += x[t] * std::cos(ang);
        im += x[t] * std::sin(ang);
      }
      double e = (re * re + im * im) / n;
      if (k != 0 && !(n % 2 == 0 && static_cast<int>(k) == n / 2)) e *= 2.0;
      CHECK(sp.energy[k] == doctest::Approx(e).epsilon(1e-8));
    }
    double total = 0.0;
    for (double e : sp.energy) total += e;
    CHECK(total == doctest::Approx(sumsq).epsilon(1e-8));
  }
}

TEST_CASE("rdft rejects short input") {
  CHECK_THROWS_AS(rdft_energy(Vec{}, 30.0), ArgumentError);
  CHECK_THROWS_AS(rdft_energy(Vec{1.0}, 30.0), ArgumentError);
  CHECK_THROWS_AS(rdft_energy(Vec{1.0, 2.0, 3.0}, 30.0), ArgumentError);
  CHECK_THROWS_AS(rdft_energy(Vec{1.0, 2.0, 3.0, 4.0}, 0.0), ArgumentError);
}

TEST_CASE("finite differences on simple functions") {
  auto quad = [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; };
  Vec g = finite_diff_grad(quad, {1.0, 2.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

  auto constant = [](const Vec&) { return 42.0; };
  Vec gz = finite_diff_grad(constant, {0.3, -0.7, 10.0}, 1e-4);
  for (double v : gz) CHECK(v == 0.0);

  auto bad = [](const Vec& v) { return std::log(v[0]); };
  CHECK_THROWS_AS(finite_diff_grad(bad, {0.0}, 1e-3), NumericalError);
}

TEST_CASE("rng reproducibility and stream independence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 64; ++i) {
    if (c.next_u64() != d.next_u64()) all_equal = false;
  }
  CHECK_FALSE(all_equal);

  Rng parent(9);
  Rng s0 = parent.derive(0), s0b = parent.derive(0), s1 = parent.derive(1);
  CHECK(s0.next_u64() == s0b.next_u64());
  CHECK(s0.next_u64() != s1.next_u64());
}

TEST_CASE("rng normal stream has sane moments") {
  Rng rng(5);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}
