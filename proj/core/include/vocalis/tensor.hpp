// Copyright 2026 The Vocalis Authors
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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vocalis/rng.hpp"

namespace vocalis::tensor {

/// Dense row-major matrix of doubles. A column vector is an n x 1 Mat.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v);
  void resize(std::size_t rows, std::size_t cols);

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat transpose(const Mat& m);
Mat matmul(const Mat& a, const Mat& b);
bool all_finite(const Mat& m);

/// Glorot-uniform draw in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Mat& w, Rng& rng);

// ---- affine map ----------------------------------------------------------

/// y = W x + b
std::vector<double> dense_forward(const Mat& w, std::span<const double> b,
                                  std::span<const double> x);

struct DenseGrads {
  Mat dw;
  std::vector<double> db;
  std::vector<double> dx;
};

/// Chain-rule gradients of y = W x + b given dL/dy.
DenseGrads dense_backward(const Mat& w, std::span<const double> x, std::span<const double> dy);

// ---- activations ---------------------------------------------------------

double relu(double x);
double sigmoid(double x);
void relu_inplace(std::span<double> x);
/// dL/dx given the relu output y and dL/dy.
void relu_backward(std::span<const double> y, std::span<double> grad);
void sigmoid_inplace(std::span<double> x);
void sigmoid_backward(std::span<const double> y, std::span<double> grad);
void tanh_inplace(std::span<double> x);
void tanh_backward(std::span<const double> y, std::span<double> grad);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> x);
/// dL/dlogits given softmax output p and dL/dp.
std::vector<double> softmax_backward(std::span<const double> p, std::span<const double> grad);

// ---- loss ----------------------------------------------------------------

inline constexpr double kProbEps = 1e-12;

/// -log p[label], with p clamped to [eps, 1 - eps].
double cross_entropy(std::span<const double> prob, std::size_t label);
/// Fused softmax + cross-entropy gradient w.r.t. the logits: p - onehot.
std::vector<double> softmax_cross_entropy_grad(std::span<const double> prob, std::size_t label);

// ---- parameters and optimisation -----------------------------------------

struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
  void zero_grad() { grad.fill(0.0); }
};

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;
};

AdamState make_adam(std::span<Param* const> params, double learning_rate);
/// Bias-corrected Adam update of every param from its `grad`.
void adam_step(std::span<Param* const> params, AdamState& state);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<Param* const> params, double max_norm);

// ---- dropout -------------------------------------------------------------

/// Inverted dropout. In training mode each unit is kept with probability
/// 1 - rate and scaled by 1/(1 - rate); the applied per-unit multipliers are
/// written to `mask` (if non-null) for the backward pass. Inference mode is
/// the identity.
void dropout_inplace(std::span<double> x, double rate, Rng& rng, bool training,
                     std::vector<double>* mask = nullptr);
std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training);

// ---- gradient checking ---------------------------------------------------

struct GradCheckResult {
  std::vector<std::string> names;
  std::vector<double> max_rel_error;  // per parameter block
  double worst() const;
};

/// Central finite differences (step 1e-4) against the analytic gradients
/// stored in each Param's `grad`. `loss` must evaluate the model at the
/// current parameter values; analytic gradients must already be filled.
/// At most `max_entries` coordinates per block are probed (0 = all). The
/// loss is taken as long double so callers can supply an extended-precision
/// evaluation.
GradCheckResult grad_check(std::span<Param* const> params, const std::function<long double()>& loss,
                           std::size_t max_entries = 0, double step = 1e-4);

double relative_error(double analytic, double numeric);

}  // namespace vocalis::tensor
