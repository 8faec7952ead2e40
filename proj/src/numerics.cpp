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

#include "lpn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "lpn/error.hpp"

namespace lpn {

Mat::Mat(int r, int c, std::vector<double> data) : rows(r), cols(c), a(std::move(data)) {
  if (a.size() != static_cast<size_t>(r) * c) {
    throw ArgumentError("Mat: data length " + std::to_string(a.size()) + " does not match " +
                        std::to_string(r) + "x" + std::to_string(c));
  }
}

bool operator==(const Mat& x, const Mat& y) {
  return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
}

Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.cols) {
    throw ArgumentError("matvec: vector length " + std::to_string(x.size()) +
                        " does not match cols " + std::to_string(m.cols));
  }
  Vec y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_t(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.rows) {
    throw ArgumentError("matvec_t: vector length " + std::to_string(x.size()) +
                        " does not match rows " + std::to_string(m.rows));
  }
  Vec y(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
    const double xi = x[i];
    for (int j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) {
    throw ArgumentError("matmul: inner dimensions " + std::to_string(x.cols) + " and " +
                        std::to_string(y.rows) + " differ");
  }
  Mat out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      const double* yrow = y.a.data() + static_cast<size_t>(k) * y.cols;
      double* orow = out.a.data() + static_cast<size_t>(i) * out.cols;
      for (int j = 0; j < y.cols; ++j) orow[j] += xik * yrow[j];
    }
  }
  return out;
}

Mat transpose(const Mat& m) {
  Mat out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

Mat identity(int n) {
  Mat out(n, n);
  for (int i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw ArgumentError("dot: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double frobenius_sq(const Mat& m) {
  double acc = 0.0;
  for (double v : m.a) acc += v * v;
  return acc;
}

double frobenius_norm(const Mat& m) { return std::sqrt(frobenius_sq(m)); }

bool all_finite(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(const Mat& m) { return all_finite(m.a); }

// --- SVD ---------------------------------------------------------------

namespace {

// One-sided Jacobi on the columns of a (rows >= cols). Returns U (rows x cols,
// orthonormal up to zero singular values), sigma (cols) and V (cols x cols).
struct JacobiFactors {
  Mat u;
  Vec sigma;
  Mat v;
};

constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;

JacobiFactors jacobi_tall(Mat work) {
  const int m = work.rows;
  const int n = work.cols;
  Mat v = identity(n);

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < m; ++i) {
          const double ap = work(i, p), aq = work(i, q);
          alpha += ap * ap;
          beta += aq * aq;
          gamma += ap * aq;
        }
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        converged = false;

        // Rotation that orthogonalizes columns p and q.
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double ap = work(i, p), aq = work(i, q);
          work(i, p) = c * ap - s * aq;
          work(i, q) = s * ap + c * aq;
        }
        for (int i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericalError("svd: Jacobi sweeps did not converge for " + std::to_string(m) + "x" +
                         std::to_string(n) + " matrix");
  }

  Vec sigma(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += work(i, j) * work(i, j);
    sigma[j] = std::sqrt(acc);
  }

  // Sort singular values in nonincreasing order, permuting columns.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return sigma[i] > sigma[j]; });

  Mat u(m, n);
  Mat v_sorted(n, n);
  Vec sigma_sorted(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    sigma_sorted[j] = sigma[src];
    for (int i = 0; i < n; ++i) v_sorted(i, j) = v(i, src);
    if (sigma[src] > 0.0) {
      for (int i = 0; i < m; ++i) u(i, j) = work(i, src) / sigma[src];
    }
  }

  // Complete zero-sigma columns of U to an orthonormal set.
  for (int j = 0; j < n; ++j) {
    if (sigma_sorted[j] > 0.0) continue;
    for (int cand = 0; cand < m; ++cand) {
      Vec col(m, 0.0);
      col[cand] = 1.0;
      for (int prev = 0; prev < n; ++prev) {
        if (prev == j) continue;
        double proj = 0.0;
        for (int i = 0; i < m; ++i) proj += u(i, prev) * col[i];
        for (int i = 0; i < m; ++i) col[i] -= proj * u(i, prev);
      }
      const double nrm = norm2(col);
      if (nrm > 1e-8) {
        for (int i = 0; i < m; ++i) u(i, j) = col[i] / nrm;
        break;
      }
    }
  }

  return {std::move(u), std::move(sigma_sorted), std::move(v_sorted)};
}

}  // namespace

SvdResult svd(const Mat& a) {
  if (a.rows < 1 || a.cols < 1) throw ArgumentError("svd: matrix must be at least 1x1");
  if (!all_finite(a)) throw ArgumentError("svd: input has non-finite entries");

  if (a.rows >= a.cols) {
    JacobiFactors f = jacobi_tall(a);
    return {std::move(f.u), std::move(f.sigma), transpose(f.v)};
  }
  // Wide matrix: factor the transpose and swap the roles of U and V.
  JacobiFactors f = jacobi_tall(transpose(a));
  return {std::move(f.v), std::move(f.sigma), transpose(f.u)};
}

Mat truncate_rank(const SvdResult& s, int k) {
  const int r = static_cast<int>(s.sigma.size());
  if (k < 1 || k > r) {
    throw ArgumentError("truncate_rank: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(r) + "]");
  }
  const int m = s.u.rows;
  const int n = s.vt.cols;
  Mat out(m, n);
  for (int t = 0; t < k; ++t) {
    const double sv = s.sigma[t];
    for (int i = 0; i < m; ++i) {
      const double scaled = sv * s.u(i, t);
      for (int j = 0; j < n; ++j) out(i, j) += scaled * s.vt(t, j);
    }
  }
  return out;
}

// --- Real DFT ------------------------------------------------------------

namespace {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative in-place radix-2 Cooley-Tukey.
void fft_pow2(std::vector<std::complex<double>>& x) {
  const size_t n = x.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Exact-length transform: radix-2 when possible, direct evaluation otherwise.
// Metric windows have arbitrary length, so no zero padding is allowed here.
std::vector<std::complex<double>> dft(const Vec& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  if (is_power_of_two(n)) {
    for (size_t i = 0; i < n; ++i) out[i] = {x[i], 0.0};
    fft_pow2(out);
    return out;
  }
  for (size_t k = 0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    const double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    for (size_t t = 0; t < n; ++t) {
      const double ang = w * static_cast<double>(t);
      re += x[t] * std::cos(ang);
      im += x[t] * std::sin(ang);
    }
    out[k] = {re, im};
  }
  return out;
}

}  // namespace

Spectrum rdft_energy(const Vec& x, double rate_hz) {
  if (x.size() < 4) {
    throw ArgumentError("rdft_energy: need at least 4 samples, got " + std::to_string(x.size()));
  }
  if (!(rate_hz > 0.0)) throw ArgumentError("rdft_energy: rate must be positive");

  const size_t n = x.size();
  const std::vector<std::complex<double>> spec = dft(x);

  const size_t bins = n / 2 + 1;
  Spectrum out;
  out.energy.resize(bins);
  out.freq_hz.resize(bins);
  for (size_t k = 0; k < bins; ++k) {
    double e = std::norm(spec[k]) / static_cast<double>(n);
    // Fold the conjugate pair, except for DC and (even n) Nyquist.
    if (k != 0 && !(n % 2 == 0 && k == n / 2)) e *= 2.0;
    out.energy[k] = e;
    out.freq_hz[k] = static_cast<double>(k) * rate_hz / static_cast<double>(n);
  }
  return out;
}

// --- Finite differences ----------------------------------------------------

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_grad: step must be positive");
  Vec grad(x.size(), 0.0);
  Vec probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("finite_diff_grad: non-finite function value at coordinate " +
                           std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// --- RNG ---------------------------------------------------------------

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : key_(mix64(seed + kGolden)) {}

uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw ArgumentError("uniform_int: n must be positive");
  return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

Rng Rng::derive(uint64_t stream_id) const {
  Rng child(0);
  child.key_ = mix64(key_ ^ mix64(stream_id + 0xD6E8FEB86659FD93ULL));
  return child;
}

}  // namespace lpn
