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

#include "lpn/mlp.hpp"

#include <cmath>
#include <string>

#include "lpn/error.hpp"

namespace lpn {

namespace {

double tanh_deriv(double h) { return 1.0 - h * h; }           // from tanh(z)
double tanh_deriv2(double h) { return -2.0 * h * (1.0 - h * h); }  // d/dz of tanh'

void fill_uniform(Mat& m, double bound, Rng& rng) {
  for (double& v : m.a) v = rng.uniform(-bound, bound);
}

}  // namespace

NetParams init_params(int d_in, int hidden, int d_out, Rng& rng) {
  if (d_in < 1 || hidden < 1 || d_out < 1) {
    throw ArgumentError("init_params: dimensions must be positive");
  }
  NetParams p;
  p.w1 = Mat(hidden, d_in);
  p.b1 = Vec(hidden, 0.0);
  p.w2 = Mat(hidden, hidden);
  p.b2 = Vec(hidden, 0.0);
  p.w3 = Mat(d_out, hidden);
  p.b3 = Vec(d_out, 0.0);
  fill_uniform(p.w1, 1.0 / std::sqrt(static_cast<double>(d_in)), rng);
  fill_uniform(p.w2, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  fill_uniform(p.w3, 0.01 / std::sqrt(static_cast<double>(hidden)), rng);
  return p;
}

void check_shapes(const NetParams& p) {
  const int h = p.w1.rows, d_in = p.w1.cols, d_out = p.w3.rows;
  if (static_cast<int>(p.b1.size()) != h || p.w2.rows != h || p.w2.cols != h ||
      static_cast<int>(p.b2.size()) != h || p.w3.cols != h ||
      static_cast<int>(p.b3.size()) != d_out || d_in < 1) {
    throw ArgumentError("NetParams: inconsistent shapes");
  }
}

ParamGrads::ParamGrads(const NetParams& p)
    : w1(p.w1.rows, p.w1.cols),
      b1(p.b1.size(), 0.0),
      w2(p.w2.rows, p.w2.cols),
      b2(p.b2.size(), 0.0),
      w3(p.w3.rows, p.w3.cols),
      b3(p.b3.size(), 0.0) {}

void ParamGrads::zero() {
  std::fill(w1.a.begin(), w1.a.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.a.begin(), w2.a.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
  std::fill(w3.a.begin(), w3.a.end(), 0.0);
  std::fill(b3.begin(), b3.end(), 0.0);
}

void ParamGrads::add_scaled(double scale, const ParamGrads& other) {
  auto axpy = [scale](Vec& dst, const Vec& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  axpy(w1.a, other.w1.a);
  axpy(b1, other.b1);
  axpy(w2.a, other.w2.a);
  axpy(b2, other.b2);
  axpy(w3.a, other.w3.a);
  axpy(b3, other.b3);
}

double ParamGrads::squared_norm() const {
  double acc = 0.0;
  auto add = [&acc](const Vec& v) {
    for (double x : v) acc += x * x;
  };
  add(w1.a);
  add(b1);
  add(w2.a);
  add(b2);
  add(w3.a);
  add(b3);
  return acc;
}

bool ParamGrads::finite() const {
  return all_finite(w1) && all_finite(b1) && all_finite(w2) && all_finite(b2) && all_finite(w3) &&
         all_finite(b3);
}

void forward(const NetParams& p, const Vec& x, ForwardTrace& t) {
  if (static_cast<int>(x.size()) != p.in_dim()) {
    throw ArgumentError("forward: input length " + std::to_string(x.size()) +
                        " does not match d_in " + std::to_string(p.in_dim()));
  }
  t.input = x;
  t.z1 = matvec(p.w1, x);
  for (size_t i = 0; i < t.z1.size(); ++i) t.z1[i] += p.b1[i];
  t.h1.resize(t.z1.size());
  for (size_t i = 0; i < t.z1.size(); ++i) t.h1[i] = std::tanh(t.z1[i]);

  t.z2 = matvec(p.w2, t.h1);
  for (size_t i = 0; i < t.z2.size(); ++i) t.z2[i] += p.b2[i];
  t.h2.resize(t.z2.size());
  for (size_t i = 0; i < t.z2.size(); ++i) t.h2[i] = std::tanh(t.z2[i]);

  t.output = matvec(p.w3, t.h2);
  for (size_t i = 0; i < t.output.size(); ++i) t.output[i] += p.b3[i];
}

ForwardTrace forward(const NetParams& p, const Vec& x) {
  ForwardTrace t;
  forward(p, x, t);
  return t;
}

void backward_params(const NetParams& p, const ForwardTrace& t, const Vec& dy, ParamGrads& g) {
  const int h = p.hidden_dim();
  const int d_out = p.out_dim();
  const int d_in = p.in_dim();
  if (static_cast<int>(dy.size()) != d_out || static_cast<int>(t.input.size()) != d_in ||
      static_cast<int>(t.h1.size()) != h || static_cast<int>(t.h2.size()) != h) {
    throw ArgumentError("backward_params: trace/dy shapes do not match parameters");
  }

  for (int i = 0; i < d_out; ++i) {
    g.b3[i] += dy[i];
    for (int j = 0; j < h; ++j) g.w3(i, j) += dy[i] * t.h2[j];
  }

  Vec delta2 = matvec_t(p.w3, dy);
  for (int i = 0; i < h; ++i) delta2[i] *= tanh_deriv(t.h2[i]);
  for (int i = 0; i < h; ++i) {
    g.b2[i] += delta2[i];
    for (int j = 0; j < h; ++j) g.w2(i, j) += delta2[i] * t.h1[j];
  }

  Vec delta1 = matvec_t(p.w2, delta2);
  for (int i = 0; i < h; ++i) delta1[i] *= tanh_deriv(t.h1[i]);
  for (int i = 0; i < h; ++i) {
    g.b1[i] += delta1[i];
    for (int j = 0; j < d_in; ++j) g.w1(i, j) += delta1[i] * t.input[j];
  }
}

Mat input_jacobian(const NetParams& p, const ForwardTrace& t) {
  const int h = p.hidden_dim();
  // m1 = D1 w1, m2 = D2 w2, J = w3 m2 m1
  Mat m1 = p.w1;
  for (int i = 0; i < h; ++i) {
    const double s = tanh_deriv(t.h1[i]);
    for (int j = 0; j < m1.cols; ++j) m1(i, j) *= s;
  }
  Mat m2 = p.w2;
  for (int i = 0; i < h; ++i) {
    const double s = tanh_deriv(t.h2[i]);
    for (int j = 0; j < m2.cols; ++j) m2(i, j) *= s;
  }
  return matmul(matmul(p.w3, m2), m1);
}

void jacobian_product_grads(const NetParams& p, const ForwardTrace& t, const Mat& q, double scale,
                            ParamGrads& g) {
  const int h = p.hidden_dim();
  const int d_in = p.in_dim();
  const int d_out = p.out_dim();
  if (q.rows != d_out || q.cols != d_in) {
    throw ArgumentError("jacobian_product_grads: q must be d_out x d_in");
  }

  Vec d1(h), d2(h), dd1(h), dd2(h);
  for (int i = 0; i < h; ++i) {
    d1[i] = tanh_deriv(t.h1[i]);
    d2[i] = tanh_deriv(t.h2[i]);
    dd1[i] = tanh_deriv2(t.h1[i]);
    dd2[i] = tanh_deriv2(t.h2[i]);
  }

  // m1 = D1 w1;  w2m1 = w2 m1;  b = w3 D2 w2
  Mat m1 = p.w1;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < d_in; ++j) m1(i, j) *= d1[i];
  Mat w2m1 = matmul(p.w2, m1);

  Mat d2w2 = p.w2;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) d2w2(i, j) *= d2[i];
  Mat b = matmul(p.w3, d2w2);

  // t2 = w3^T q (h x d_in); t3 = b^T q (h x d_in)
  Mat t2(h, d_in), t3(h, d_in);
  for (int i = 0; i < d_out; ++i) {
    for (int k = 0; k < h; ++k) {
      const double w3ik = p.w3(i, k);
      const double bik = b(i, k);
      for (int j = 0; j < d_in; ++j) {
        t2(k, j) += w3ik * q(i, j);
        t3(k, j) += bik * q(i, j);
      }
    }
  }

  // dP/dw3 = q (m2 m1)^T where m2 m1 = D2 w2m1.
  for (int i = 0; i < d_out; ++i) {
    for (int k = 0; k < h; ++k) {
      double acc = 0.0;
      const double* qrow = q.a.data() + static_cast<size_t>(i) * d_in;
      const double* mrow = w2m1.a.data() + static_cast<size_t>(k) * d_in;
      for (int j = 0; j < d_in; ++j) acc += qrow[j] * mrow[j];
      g.w3(i, k) += scale * acc * d2[k];
    }
  }

  // Direct w2 term: D2 (w3^T q) m1^T.
  for (int k = 0; k < h; ++k) {
    for (int l = 0; l < h; ++l) {
      double acc = 0.0;
      const double* t2row = t2.a.data() + static_cast<size_t>(k) * d_in;
      const double* m1row = m1.a.data() + static_cast<size_t>(l) * d_in;
      for (int j = 0; j < d_in; ++j) acc += t2row[j] * m1row[j];
      g.w2(k, l) += scale * d2[k] * acc;
    }
  }

  // Direct w1 term: (b D1)^T q = D1 b^T q.
  for (int k = 0; k < h; ++k) {
    for (int j = 0; j < d_in; ++j) g.w1(k, j) += scale * d1[k] * t3(k, j);
  }

  // Diagonal chain terms. c2_k = row_k(w3^T q) . row_k(w2 m1),
  // c1_k = row_k(b^T q) . row_k(w1).
  Vec c2(h, 0.0), c1(h, 0.0);
  for (int k = 0; k < h; ++k) {
    const double* t2row = t2.a.data() + static_cast<size_t>(k) * d_in;
    const double* t3row = t3.a.data() + static_cast<size_t>(k) * d_in;
    const double* wrow = w2m1.a.data() + static_cast<size_t>(k) * d_in;
    const double* w1row = p.w1.a.data() + static_cast<size_t>(k) * d_in;
    double a2 = 0.0, a1 = 0.0;
    for (int j = 0; j < d_in; ++j) {
      a2 += t2row[j] * wrow[j];
      a1 += t3row[j] * w1row[j];
    }
    c2[k] = a2;
    c1[k] = a1;
  }

  Vec s2(h);
  for (int k = 0; k < h; ++k) s2[k] = c2[k] * dd2[k];
  for (int k = 0; k < h; ++k) {
    g.b2[k] += scale * s2[k];
    for (int j = 0; j < h; ++j) g.w2(k, j) += scale * s2[k] * t.h1[j];
  }

  Vec s1 = matvec_t(p.w2, s2);
  for (int k = 0; k < h; ++k) s1[k] = c1[k] * dd1[k] + d1[k] * s1[k];
  for (int k = 0; k < h; ++k) {
    g.b1[k] += scale * s1[k];
    for (int j = 0; j < d_in; ++j) g.w1(k, j) += scale * s1[k] * t.input[j];
  }
}

namespace {

void resolve_cols(const NetParams& p, int& col_begin, int& col_end) {
  if (col_end < 0) col_end = p.in_dim();
  if (col_begin < 0 || col_begin >= col_end || col_end > p.in_dim()) {
    throw ArgumentError("penalty: column range [" + std::to_string(col_begin) + ", " +
                        std::to_string(col_end) + ") invalid for d_in " +
                        std::to_string(p.in_dim()));
  }
}

}  // namespace

double jacobian_penalty_grads(const NetParams& p, const ForwardTrace& t, ParamGrads& g,
                              double scale, int col_begin, int col_end) {
  resolve_cols(p, col_begin, col_end);
  const Mat jac = input_jacobian(p, t);
  double penalty = 0.0;
  Mat q(jac.rows, jac.cols);
  for (int i = 0; i < jac.rows; ++i) {
    for (int j = col_begin; j < col_end; ++j) {
      penalty += jac(i, j) * jac(i, j);
      q(i, j) = 2.0 * jac(i, j);
    }
  }
  jacobian_product_grads(p, t, q, scale, g);
  return penalty;
}

double directional_penalty_grads(const NetParams& p, const ForwardTrace& t, const Vec& d,
                                 ParamGrads& g, double scale, int col_begin, int col_end) {
  resolve_cols(p, col_begin, col_end);
  if (static_cast<int>(d.size()) != p.out_dim()) {
    throw ArgumentError("directional_penalty_grads: direction length must equal d_out");
  }
  const Mat jac = input_jacobian(p, t);

  // v_j = sum_i J_ij d_i over the column range; P = ||v||^2.
  Vec v(jac.cols, 0.0);
  for (int i = 0; i < jac.rows; ++i) {
    for (int j = col_begin; j < col_end; ++j) v[j] += jac(i, j) * d[i];
  }
  double penalty = 0.0;
  for (int j = col_begin; j < col_end; ++j) penalty += v[j] * v[j];

  Mat q(jac.rows, jac.cols);
  for (int i = 0; i < jac.rows; ++i) {
    for (int j = col_begin; j < col_end; ++j) q(i, j) = 2.0 * d[i] * v[j];
  }
  jacobian_product_grads(p, t, q, scale, g);
  return penalty;
}

// --- Adam -------------------------------------------------------------

Adam::Adam(const NetParams& shape, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(shape), v_(shape) {}

void Adam::step(NetParams& params, const ParamGrads& grads) {
  if (!grads.finite()) throw NumericalError("adam: non-finite gradient");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

  auto update = [&](Vec& p, Vec& m, Vec& v, const Vec& g) {
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  };
  update(params.w1.a, m_.w1.a, v_.w1.a, grads.w1.a);
  update(params.b1, m_.b1, v_.b1, grads.b1);
  update(params.w2.a, m_.w2.a, v_.w2.a, grads.w2.a);
  update(params.b2, m_.b2, v_.b2, grads.b2);
  update(params.w3.a, m_.w3.a, v_.w3.a, grads.w3.a);
  update(params.b3, m_.b3, v_.b3, grads.b3);
}

}  // namespace lpn
