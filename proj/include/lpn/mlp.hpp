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

#ifndef LPN_MLP_HPP_
#define LPN_MLP_HPP_

#include "lpn/numerics.hpp"

namespace lpn {

// Fixed two-hidden-layer fully connected network with tanh activations:
//   y = w3 * tanh(w2 * tanh(w1 * x + b1) + b2) + b3
struct NetParams {
  Mat w1;  // h x d_in
  Vec b1;  // h
  Mat w2;  // h x h
  Vec b2;  // h
  Mat w3;  // d_out x h
  Vec b3;  // d_out

  int in_dim() const { return w1.cols; }
  int hidden_dim() const { return w1.rows; }
  int out_dim() const { return w3.rows; }
};

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; the output layer is
// scaled by 0.01 so initial actions stay near the reference.
NetParams init_params(int d_in, int hidden, int d_out, Rng& rng);

void check_shapes(const NetParams& p);

// Cached intermediate values of one forward pass.
struct ForwardTrace {
  Vec input;
  Vec z1, h1;  // pre/post activation, first hidden layer
  Vec z2, h2;  // pre/post activation, second hidden layer
  Vec output;
};

// Gradient accumulator with the same shapes as NetParams.
struct ParamGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
  Mat w3;
  Vec b3;

  explicit ParamGrads(const NetParams& p);
  void zero();
  // this += scale * other
  void add_scaled(double scale, const ParamGrads& other);
  double squared_norm() const;
  bool finite() const;
};

void forward(const NetParams& p, const Vec& x, ForwardTrace& trace);
ForwardTrace forward(const NetParams& p, const Vec& x);

// Accumulates d(dy . y)/dtheta into grads.
void backward_params(const NetParams& p, const ForwardTrace& trace, const Vec& dy,
                     ParamGrads& grads);

// J = w3 D2 w2 D1 w1 with D_i = diag(tanh'(z_i)); shape d_out x d_in.
Mat input_jacobian(const NetParams& p, const ForwardTrace& trace);

// Accumulates dP/dtheta for any penalty P(J) given q = dP/dJ, including the
// dependence of the activation diagonals on the parameters through z1, z2.
void jacobian_product_grads(const NetParams& p, const ForwardTrace& trace, const Mat& q,
                            double scale, ParamGrads& grads);

// P = sum over columns [col_begin, col_end) of the squared entries of J
// (the full squared Frobenius norm by default). Returns P and accumulates
// scale * dP/dtheta.
double jacobian_penalty_grads(const NetParams& p, const ForwardTrace& trace, ParamGrads& grads,
                              double scale = 1.0, int col_begin = 0, int col_end = -1);

// P = || (J restricted to the column range)^T d ||^2 with d held constant.
double directional_penalty_grads(const NetParams& p, const ForwardTrace& trace, const Vec& d,
                                 ParamGrads& grads, double scale = 1.0, int col_begin = 0,
                                 int col_end = -1);

// --- Adam -------------------------------------------------------------

// Adaptive moment estimation over a NetParams parameter set.
class Adam {
 public:
  Adam(const NetParams& shape, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // One update; throws NumericalError if the gradient has non-finite entries.
  void step(NetParams& params, const ParamGrads& grads);

  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  ParamGrads m_, v_;
};

}  // namespace lpn

#endif  // LPN_MLP_HPP_
