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

#include "vocalis/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "vocalis/error.hpp"

namespace vocalis::tensor {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw Error(ErrorCode::ShapeMismatch, "Mat storage size");
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Mat::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Mat::resize(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

Mat transpose(const Mat& m) {
  Mat t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matmul inner dimension");
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.data() + i * out.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* src = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

bool all_finite(const Mat& m) {
  return std::all_of(m.storage().begin(), m.storage().end(),
                     [](double v) { return std::isfinite(v); });
}

void glorot_uniform(Mat& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
}

std::vector<double> dense_forward(const Mat& w, std::span<const double> b,
                                  std::span<const double> x) {
  if (w.cols() != x.size() || w.rows() != b.size())
    throw Error(ErrorCode::ShapeMismatch, "dense_forward");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto wr = w.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
  return y;
}

DenseGrads dense_backward(const Mat& w, std::span<const double> x, std::span<const double> dy) {
  if (w.cols() != x.size() || w.rows() != dy.size())
    throw Error(ErrorCode::ShapeMismatch, "dense_backward");
  DenseGrads g{Mat(w.rows(), w.cols()), std::vector<double>(dy.begin(), dy.end()),
               std::vector<double>(x.size(), 0.0)};
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto wr = w.row(r);
    auto gr = g.dw.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) {
      gr[c] = dy[r] * x[c];
      g.dx[c] += wr[c] * dy[r];
    }
  }
  return g;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void relu_inplace(std::span<double> x) {
  for (auto& v : x) v = relu(v);
}

void relu_backward(std::span<const double> y, std::span<double> grad) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] <= 0.0) grad[i] = 0.0;
}

void sigmoid_inplace(std::span<double> x) {
  for (auto& v : x) v = sigmoid(v);
}

void sigmoid_backward(std::span<const double> y, std::span<double> grad) {
  for (std::size_t i = 0; i < y.size(); ++i) grad[i] *= y[i] * (1.0 - y[i]);
}

void tanh_inplace(std::span<double> x) {
  for (auto& v : x) v = std::tanh(v);
}

void tanh_backward(std::span<const double> y, std::span<double> grad) {
  for (std::size_t i = 0; i < y.size(); ++i) grad[i] *= 1.0 - y[i] * y[i];
}

void softmax_inplace(std::span<double> x) {
  if (x.empty()) return;
  const double peak = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (auto& v : x) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (auto& v : x) v /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  softmax_inplace(p);
  return p;
}

std::vector<double> softmax_backward(std::span<const double> p, std::span<const double> grad) {
  double dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * grad[i];
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * (grad[i] - dot);
  return out;
}

double cross_entropy(std::span<const double> prob, std::size_t label) {
  if (label >= prob.size()) throw Error(ErrorCode::LabelOutOfRange, "cross_entropy label");
  return -std::log(std::clamp(prob[label], kProbEps, 1.0 - kProbEps));
}

std::vector<double> softmax_cross_entropy_grad(std::span<const double> prob, std::size_t label) {
  if (label >= prob.size()) throw Error(ErrorCode::LabelOutOfRange, "cross_entropy label");
  std::vector<double> g(prob.begin(), prob.end());
  g[label] -= 1.0;
  return g;
}

AdamState make_adam(std::span<Param* const> params, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const Param* p : params) {
    state.m.emplace_back(p->value.rows(), p->value.cols());
    state.v.emplace_back(p->value.rows(), p->value.cols());
  }
  return state;
}

void adam_step(std::span<Param* const> params, AdamState& state) {
  if (params.size() != state.m.size()) throw Error(ErrorCode::ShapeMismatch, "adam_step params");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    if (p.grad.size() != p.value.size() || m.size() != p.value.size())
      throw Error(ErrorCode::ShapeMismatch, "adam_step " + p.name);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p.value[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double clip_grad_norm(std::span<Param* const> params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params)
    for (std::size_t j = 0; j < p->grad.size(); ++j) sq += p->grad[j] * p->grad[j];
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Param* p : params)
      for (std::size_t j = 0; j < p->grad.size(); ++j) p->grad[j] *= scale;
  }
  return norm;
}

void dropout_inplace(std::span<double> x, double rate, Rng& rng, bool training,
                     std::vector<double>* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout rate");
  if (mask) mask->assign(x.size(), 1.0);
  if (!training || rate == 0.0) return;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    x[i] *= m;
    if (mask) (*mask)[i] = m;
  }
}

std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training) {
  std::vector<double> y(x.begin(), x.end());
  dropout_inplace(y, rate, rng, training);
  return y;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

double GradCheckResult::worst() const {
  double w = 0.0;
  for (double e : max_rel_error) w = std::max(w, e);
  return w;
}

GradCheckResult grad_check(std::span<Param* const> params, const std::function<long double()>& loss,
                           std::size_t max_entries, double step) {
  GradCheckResult result;
  for (Param* p : params) {
    const std::size_t n = p->value.size();
    const std::size_t stride =
        (max_entries == 0 || n <= max_entries) ? 1 : (n + max_entries - 1) / max_entries;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; j += stride) {
      const double saved = p->value[j];
      p->value[j] = saved + step;
      const long double up = loss();
      p->value[j] = saved - step;
      const long double down = loss();
      p->value[j] = saved;
      const auto numeric = static_cast<double>((up - down) / (2.0L * step));
      worst = std::max(worst, relative_error(p->grad[j], numeric));
    }
    result.names.push_back(p->name);
    result.max_rel_error.push_back(worst);
  }
  return result;
}

}  // namespace vocalis::tensor
