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

#ifndef LPN_NUMERICS_HPP_
#define LPN_NUMERICS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

namespace lpn {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::vector<double> data);

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  size_t size() const { return a.size(); }
};

bool operator==(const Mat& x, const Mat& y);

// y = A x
Vec matvec(const Mat& m, const Vec& x);
// y = A^T x
Vec matvec_t(const Mat& m, const Vec& x);
Mat matmul(const Mat& x, const Mat& y);
Mat transpose(const Mat& m);
Mat identity(int n);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double frobenius_norm(const Mat& m);
double frobenius_sq(const Mat& m);
bool all_finite(const Vec& x);
bool all_finite(const Mat& m);

// --- Singular value decomposition --------------------------------------

struct SvdResult {
  Mat u;      // m x r, orthonormal columns
  Vec sigma;  // r, nonincreasing and nonnegative, r = min(m, n)
  Mat vt;     // r x n, orthonormal rows
};

// One-sided Jacobi SVD. Throws NumericalError if the rotation sweeps do not
// converge and ArgumentError for empty or non-finite inputs.
SvdResult svd(const Mat& a);

// Best rank-k approximation sum_{i<k} sigma_i u_i v_i^T. 1 <= k <= len(sigma).
Mat truncate_rank(const SvdResult& s, int k);

// --- Real DFT spectral energy -------------------------------------------

struct Spectrum {
  Vec energy;  // one-sided per-bin energies, conjugate pairs folded
  Vec freq_hz; // bin center frequencies
};

// One-sided energy spectrum of a real signal sampled at rate_hz. The bin
// energies satisfy Parseval: sum(energy) == sum(x_t^2). Requires len >= 4.
Spectrum rdft_energy(const Vec& x, double rate_hz);

// --- Finite differences ---------------------------------------------------

// Central-difference gradient of a scalar function. Throws NumericalError on
// a non-finite function evaluation.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h);

// --- Seeded RNG ------------------------------------------------------------

// Counter-based generator: output_i = mix(key + i * gamma). Identical seeds
// give bitwise-identical streams on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  int uniform_int(int n);
  // Standard normal via Box-Muller.
  double normal();

  // Independent child stream; deterministic in (seed, id).
  Rng derive(uint64_t stream_id) const;

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lpn

#endif  // LPN_NUMERICS_HPP_
