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

#include "vocalis/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binio.hpp"
#include "vocalis/error.hpp"

namespace vocalis::nets {

using tensor::Mat;
using tensor::Param;

namespace {

// y[t] = W x[t] + b for every row of x
Mat affine_rows(const Mat& x, const Mat& w, const Mat& b) {
  if (x.cols() != w.cols()) throw Error(ErrorCode::ShapeMismatch, "layer input width");
  const std::size_t out = w.rows(), in = w.cols();
  Mat y(x.rows(), out);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const double* xt = x.data() + t * in;
    double* yt = y.data() + t * out;
    for (std::size_t r = 0; r < out; ++r) {
      const double* wr = w.data() + r * in;
      double acc = b[r];
      for (std::size_t c = 0; c < in; ++c) acc += wr[c] * xt[c];
      yt[r] = acc;
    }
  }
  return y;
}

// y[rows] += M[row_begin .. row_begin+n) * v
void matvec_add(const Mat& m, std::size_t row_begin, std::size_t n, const double* v, double* y) {
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double* mr = m.data() + (row_begin + r) * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * v[c];
    y[r] += acc;
  }
}

// y += M[row_begin .. row_begin+n)^T * v
void matvec_t_add(const Mat& m, std::size_t row_begin, std::size_t n, const double* v, double* y) {
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const double* mr = m.data() + (row_begin + r) * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += mr[c] * vr;
  }
}

// G[row_begin .. row_begin+n) += v (outer) u
void outer_add(Mat& g, std::size_t row_begin, std::size_t n, const double* v, const double* u) {
  const std::size_t cols = g.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    double* gr = g.data() + (row_begin + r) * cols;
    for (std::size_t c = 0; c < cols; ++c) gr[c] += vr * u[c];
  }
}

double sig(double x) { return tensor::sigmoid(x); }

// Applies output dropout in training mode; the mask is kept for backward.
void apply_output_dropout(Mat& y, double rate, Rng* rng, Mat* mask_out) {
  if (!rng || rate <= 0.0) return;
  std::vector<double> mask;
  tensor::dropout_inplace({y.data(), y.size()}, rate, *rng, true, &mask);
  if (mask_out) *mask_out = Mat(y.rows(), y.cols(), std::move(mask));
}

Mat masked(const Mat& dy, const Mat& mask) {
  if (mask.empty()) return dy;
  Mat out = dy;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

}  // namespace

std::string_view arch_name(ArchKind kind) {
  switch (kind) {
    case ArchKind::DNN: return "dnn";
    case ArchKind::LSTM: return "lstm";
    case ArchKind::BiLSTM: return "bilstm";
    case ArchKind::GRU: return "gru";
  }
  return "unknown";
}

ArchKind parse_arch(std::string_view name) {
  for (auto k : {ArchKind::DNN, ArchKind::LSTM, ArchKind::BiLSTM, ArchKind::GRU})
    if (arch_name(k) == name) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(name) + "'");
}

ArchSpec ArchSpec::defaults(ArchKind kind, std::size_t n_classes) {
  ArchSpec a;
  a.kind = kind;
  a.n_classes = n_classes;
  if (kind == ArchKind::DNN) {
    a.hidden = {200, 200, 200};
    a.dropout = 0.0;
  } else {
    a.hidden = {50, 50};
    a.dropout = 0.2;
  }
  return a;
}

void ArchSpec::validate() const {
  if (hidden.empty()) throw Error(ErrorCode::InvalidArgument, "architecture needs a hidden layer");
  for (auto h : hidden)
    if (h == 0) throw Error(ErrorCode::InvalidArgument, "hidden sizes must be positive");
  if (n_classes < 2 || input_dim == 0) throw Error(ErrorCode::InvalidArgument, "bad class/input size");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout rate");
}

TrainConfig TrainConfig::defaults(ArchKind kind) {
  TrainConfig c;
  c.learning_rate = (kind == ArchKind::LSTM || kind == ArchKind::BiLSTM) ? 5e-4 : 1e-3;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (clip_norm < 0.0) throw Error(ErrorCode::InvalidArgument, "clip_norm must be >= 0");
}

// ---- DenseReluLayer --------------------------------------------------------

DenseReluLayer::DenseReluLayer(std::size_t in, std::size_t out, const std::string& name)
    : w_(name + ".W", out, in), b_(name + ".b", out, 1) {}

Mat DenseReluLayer::forward(const Mat& x, Cache* cache, Rng*) const {
  Mat y = affine_rows(x, w_.value, b_.value);
  tensor::relu_inplace({y.data(), y.size()});
  if (cache) cache->mats = {x, y};
  return y;
}

Mat DenseReluLayer::backward(const Mat& dy, const Cache& cache) {
  const Mat& x = cache.mats[0];
  const Mat& y = cache.mats[1];
  const std::size_t out = output_dim(), in = input_dim();
  Mat dx(x.rows(), in);
  std::vector<double> dz(out);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t r = 0; r < out; ++r) dz[r] = y(t, r) > 0.0 ? dy(t, r) : 0.0;
    outer_add(w_.grad, 0, out, dz.data(), x.data() + t * in);
    for (std::size_t r = 0; r < out; ++r) b_.grad[r] += dz[r];
    matvec_t_add(w_.value, 0, out, dz.data(), dx.data() + t * in);
  }
  return dx;
}

// ---- LstmLayer -------------------------------------------------------------

LstmLayer::LstmLayer(std::size_t in, std::size_t hidden, bool reverse, double dropout,
                     const std::string& name)
    : w_(name + ".W", 4 * hidden, in),
      u_(name + ".U", 4 * hidden, hidden),
      b_(name + ".b", 4 * hidden, 1),
      reverse_(reverse),
      dropout_(dropout) {}

// cache.mats: x, gates (i f g o, post-activation), cell, tanh(cell), h, dropout mask
Mat LstmLayer::forward(const Mat& x, Cache* cache, Rng* dropout_rng) const {
  const std::size_t steps = x.rows(), hidden = output_dim(), g4 = 4 * hidden;
  if (steps == 0) throw Error(ErrorCode::EmptyInput, "LSTM on empty sequence");
  const Mat pre = affine_rows(x, w_.value, b_.value);
  Mat gates(steps, g4), cell(steps, hidden), tanh_c(steps, hidden), out(steps, hidden);
  std::vector<double> h(hidden, 0.0), c(hidden, 0.0), a(g4);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse_ ? steps - 1 - s : s;
    std::copy_n(pre.data() + t * g4, g4, a.data());
    matvec_add(u_.value, 0, g4, h.data(), a.data());
    double* gt = gates.data() + t * g4;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double i = sig(a[j]);
      const double f = sig(a[hidden + j]);
      const double g = std::tanh(a[2 * hidden + j]);
      const double o = sig(a[3 * hidden + j]);
      gt[j] = i;
      gt[hidden + j] = f;
      gt[2 * hidden + j] = g;
      gt[3 * hidden + j] = o;
      c[j] = f * c[j] + i * g;
      const double tc = std::tanh(c[j]);
      h[j] = o * tc;
      cell(t, j) = c[j];
      tanh_c(t, j) = tc;
      out(t, j) = h[j];
    }
  }
  Mat y = out;
  Mat mask;
  apply_output_dropout(y, dropout_, dropout_rng, &mask);
  if (cache)
    cache->mats = {x, std::move(gates), std::move(cell), std::move(tanh_c), std::move(out),
                   std::move(mask)};
  return y;
}

Mat LstmLayer::backward(const Mat& dy, const Cache& cache) {
  const Mat& x = cache.mats[0];
  const Mat& gates = cache.mats[1];
  const Mat& cell = cache.mats[2];
  const Mat& tanh_c = cache.mats[3];
  const Mat& out = cache.mats[4];
  const Mat dh_out = masked(dy, cache.mats[5]);
  const std::size_t steps = x.rows(), hidden = output_dim(), g4 = 4 * hidden, in = input_dim();

  Mat dx(steps, in);
  std::vector<double> dh_next(hidden, 0.0), dc_next(hidden, 0.0), da(g4), dh(hidden);
  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = reverse_ ? steps - 1 - s : s;
    const bool has_prev = s > 0;
    const std::size_t tp = reverse_ ? t + 1 : t - 1;
    const double* gt = gates.data() + t * g4;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double i = gt[j], f = gt[hidden + j], g = gt[2 * hidden + j], o = gt[3 * hidden + j];
      const double tc = tanh_c(t, j);
      const double dhj = dh_out(t, j) + dh_next[j];
      const double d_o = dhj * tc;
      const double dc = dhj * o * (1.0 - tc * tc) + dc_next[j];
      const double c_prev = has_prev ? cell(tp, j) : 0.0;
      da[j] = dc * g * i * (1.0 - i);
      da[hidden + j] = dc * c_prev * f * (1.0 - f);
      da[2 * hidden + j] = dc * i * (1.0 - g * g);
      da[3 * hidden + j] = d_o * o * (1.0 - o);
      dc_next[j] = dc * f;
    }
    outer_add(w_.grad, 0, g4, da.data(), x.data() + t * in);
    for (std::size_t r = 0; r < g4; ++r) b_.grad[r] += da[r];
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    if (has_prev) {
      outer_add(u_.grad, 0, g4, da.data(), out.data() + tp * hidden);
      matvec_t_add(u_.value, 0, g4, da.data(), dh_next.data());
    }
    matvec_t_add(w_.value, 0, g4, da.data(), dx.data() + t * in);
  }
  return dx;
}

// ---- GruLayer --------------------------------------------------------------

GruLayer::GruLayer(std::size_t in, std::size_t hidden, double dropout, const std::string& name)
    : w_(name + ".W", 3 * hidden, in),
      u_(name + ".U", 3 * hidden, hidden),
      b_(name + ".b", 3 * hidden, 1),
      dropout_(dropout) {}

// cache.mats: x, gates (z r n), h, dropout mask
Mat GruLayer::forward(const Mat& x, Cache* cache, Rng* dropout_rng) const {
  const std::size_t steps = x.rows(), hidden = output_dim(), g3 = 3 * hidden;
  if (steps == 0) throw Error(ErrorCode::EmptyInput, "GRU on empty sequence");
  const Mat pre = affine_rows(x, w_.value, b_.value);
  Mat gates(steps, g3), out(steps, hidden);
  std::vector<double> h(hidden, 0.0), a(2 * hidden), rh(hidden), an(hidden);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* pt = pre.data() + t * g3;
    std::copy_n(pt, 2 * hidden, a.data());
    matvec_add(u_.value, 0, 2 * hidden, h.data(), a.data());
    double* gt = gates.data() + t * g3;
    for (std::size_t j = 0; j < hidden; ++j) {
      gt[j] = sig(a[j]);
      gt[hidden + j] = sig(a[hidden + j]);
      rh[j] = gt[hidden + j] * h[j];
    }
    std::copy_n(pt + 2 * hidden, hidden, an.data());
    matvec_add(u_.value, 2 * hidden, hidden, rh.data(), an.data());
    for (std::size_t j = 0; j < hidden; ++j) {
      const double n = std::tanh(an[j]);
      const double z = gt[j];
      gt[2 * hidden + j] = n;
      h[j] = z * h[j] + (1.0 - z) * n;
      out(t, j) = h[j];
    }
  }
  Mat y = out;
  Mat mask;
  apply_output_dropout(y, dropout_, dropout_rng, &mask);
  if (cache) cache->mats = {x, std::move(gates), std::move(out), std::move(mask)};
  return y;
}

Mat GruLayer::backward(const Mat& dy, const Cache& cache) {
  const Mat& x = cache.mats[0];
  const Mat& gates = cache.mats[1];
  const Mat& out = cache.mats[2];
  const Mat dh_out = masked(dy, cache.mats[3]);
  const std::size_t steps = x.rows(), hidden = output_dim(), g3 = 3 * hidden, in = input_dim();

  Mat dx(steps, in);
  const std::vector<double> zeros(hidden, 0.0);
  std::vector<double> dh_next(hidden, 0.0), da(g3), drh(hidden), rh(hidden), dh_prev(hidden);
  for (std::size_t t = steps; t-- > 0;) {
    const double* gt = gates.data() + t * g3;
    const double* h_prev = t > 0 ? out.data() + (t - 1) * hidden : zeros.data();
    for (std::size_t j = 0; j < hidden; ++j) {
      const double z = gt[j], n = gt[2 * hidden + j];
      const double dh = dh_out(t, j) + dh_next[j];
      da[j] = dh * (h_prev[j] - n) * z * (1.0 - z);
      da[2 * hidden + j] = dh * (1.0 - z) * (1.0 - n * n);
      dh_prev[j] = dh * z;
      rh[j] = gt[hidden + j] * h_prev[j];
    }
    std::fill(drh.begin(), drh.end(), 0.0);
    matvec_t_add(u_.value, 2 * hidden, hidden, da.data() + 2 * hidden, drh.data());
    outer_add(u_.grad, 2 * hidden, hidden, da.data() + 2 * hidden, rh.data());
    for (std::size_t j = 0; j < hidden; ++j) {
      const double r = gt[hidden + j];
      da[hidden + j] = drh[j] * h_prev[j] * r * (1.0 - r);
      dh_prev[j] += drh[j] * r;
    }
    if (t > 0) {
      outer_add(u_.grad, 0, 2 * hidden, da.data(), h_prev);
      matvec_t_add(u_.value, 0, 2 * hidden, da.data(), dh_prev.data());
    }
    outer_add(w_.grad, 0, g3, da.data(), x.data() + t * in);
    for (std::size_t r = 0; r < g3; ++r) b_.grad[r] += da[r];
    matvec_t_add(w_.value, 0, g3, da.data(), dx.data() + t * in);
    dh_next = dh_prev;
  }
  return dx;
}

// ---- BiLstmBlock -----------------------------------------------------------

BiLstmBlock::BiLstmBlock(std::size_t in, std::size_t hidden, double dropout, const std::string& name)
    : fwd_(in, hidden, false, dropout, name + ".fwd"), bwd_(in, hidden, true, dropout, name + ".bwd") {}

Mat BiLstmBlock::forward(const Mat& x, Cache* cache, Rng* dropout_rng) const {
  Cache* cf = nullptr;
  Cache* cb = nullptr;
  if (cache) {
    cache->children.resize(2);
    cf = &cache->children[0];
    cb = &cache->children[1];
  }
  Mat y = fwd_.forward(x, cf, dropout_rng);
  const Mat yb = bwd_.forward(x, cb, dropout_rng);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += yb[i];
  return y;
}

Mat BiLstmBlock::backward(const Mat& dy, const Cache& cache) {
  Mat dx = fwd_.backward(dy, cache.children[0]);
  const Mat dxb = bwd_.backward(dy, cache.children[1]);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxb[i];
  return dx;
}

std::vector<Param*> BiLstmBlock::params() {
  auto p = fwd_.params();
  for (auto* q : bwd_.params()) p.push_back(q);
  return p;
}

// ---- SequenceModel ---------------------------------------------------------

SequenceModel::SequenceModel(const ArchSpec& arch, std::uint64_t init_seed) : arch_(arch) {
  arch_.validate();
  mean_.assign(arch_.input_dim, 0.0);
  std_.assign(arch_.input_dim, 1.0);
  std::size_t in = arch_.input_dim;
  for (std::size_t l = 0; l < arch_.hidden.size(); ++l) {
    const std::size_t h = arch_.hidden[l];
    const std::string name = "layer" + std::to_string(l);
    switch (arch_.kind) {
      case ArchKind::DNN: layers_.push_back(std::make_unique<DenseReluLayer>(in, h, name)); break;
      case ArchKind::LSTM:
        layers_.push_back(std::make_unique<LstmLayer>(in, h, false, arch_.dropout, name));
        break;
      case ArchKind::BiLSTM:
        layers_.push_back(std::make_unique<BiLstmBlock>(in, h, arch_.dropout, name));
        break;
      case ArchKind::GRU: layers_.push_back(std::make_unique<GruLayer>(in, h, arch_.dropout, name)); break;
    }
    in = h;
  }
  head_w_ = Param("head.W", arch_.n_classes, in);
  head_b_ = Param("head.b", arch_.n_classes, 1);

  Rng rng(init_seed);
  for (Param* p : params()) {
    const bool is_bias = p->value.cols() == 1;
    if (!is_bias) tensor::glorot_uniform(p->value, rng);
  }
  // forget-gate bias
  for (auto& layer : layers_) {
    auto set_forget = [](LstmLayer& lstm) {
      const std::size_t h = lstm.output_dim();
      for (std::size_t j = 0; j < h; ++j) lstm.bias().value[h + j] = 1.0;
    };
    if (auto* lstm = dynamic_cast<LstmLayer*>(layer.get())) set_forget(*lstm);
    if (auto* bi = dynamic_cast<BiLstmBlock*>(layer.get())) {
      set_forget(bi->forward_lstm());
      set_forget(bi->backward_lstm());
    }
  }
}

SequenceModel::SequenceModel(const SequenceModel& other)
    : arch_(other.arch_), mean_(other.mean_), std_(other.std_), head_w_(other.head_w_), head_b_(other.head_b_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

SequenceModel& SequenceModel::operator=(const SequenceModel& other) {
  if (this != &other) {
    SequenceModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void SequenceModel::set_normalization(std::vector<double> mean, std::vector<double> stddev) {
  if (mean.size() != arch_.input_dim || stddev.size() != arch_.input_dim)
    throw Error(ErrorCode::ShapeMismatch, "normalization size");
  for (double s : stddev)
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "normalization std must be positive");
  mean_ = std::move(mean);
  std_ = std::move(stddev);
}

Mat SequenceModel::normalize(const Mat& frames) const {
  if (frames.cols() != arch_.input_dim)
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(arch_.input_dim) +
                                              "-dim frames, got " + std::to_string(frames.cols()));
  if (frames.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty feature sequence");
  Mat x = frames;
  for (std::size_t t = 0; t < x.rows(); ++t)
    for (std::size_t c = 0; c < x.cols(); ++c) x(t, c) = (x(t, c) - mean_[c]) / std_[c];
  return x;
}

Mat SequenceModel::run_hidden(const Mat& x, std::vector<Cache>* caches, Rng* dropout_rng) const {
  if (caches) caches->assign(layers_.size(), Cache{});
  Mat z = x;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    z = layers_[l]->forward(z, caches ? &(*caches)[l] : nullptr, dropout_rng);
  return z;
}

Mat SequenceModel::hidden_features(const Mat& frames) const {
  return run_hidden(normalize(frames), nullptr, nullptr);
}

Mat SequenceModel::head_probabilities(const Mat& hidden) const {
  Mat p = affine_rows(hidden, head_w_.value, head_b_.value);
  for (std::size_t t = 0; t < p.rows(); ++t) tensor::softmax_inplace(p.row(t));
  return p;
}

Mat SequenceModel::frame_probabilities(const Mat& frames) const {
  return head_probabilities(hidden_features(frames));
}

namespace {

int label_at(std::span<const int> labels, std::size_t t, std::size_t steps, std::size_t classes) {
  if (labels.size() != 1 && labels.size() != steps)
    throw Error(ErrorCode::ShapeMismatch, "labels must be per-frame or a single label");
  const int y = labels.size() == 1 ? labels[0] : labels[t];
  if (y < 0 || static_cast<std::size_t>(y) >= classes)
    throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y));
  return y;
}

}  // namespace

long double SequenceModel::loss_extended(const Mat& frames, std::span<const int> labels) const {
  const Mat z = hidden_features(frames);
  const std::size_t classes = arch_.n_classes, h = z.cols();
  std::vector<long double> logit(classes);
  long double total = 0.0L;
  for (std::size_t t = 0; t < z.rows(); ++t) {
    const auto y = static_cast<std::size_t>(label_at(labels, t, z.rows(), classes));
    for (std::size_t k = 0; k < classes; ++k) {
      long double s = head_b_.value[k];
      for (std::size_t j = 0; j < h; ++j) s += static_cast<long double>(head_w_.value(k, j)) * z(t, j);
      logit[k] = s;
    }
    const long double top = *std::max_element(logit.begin(), logit.end());
    long double sum = 0.0L;
    for (long double v : logit) sum += std::exp(v - top);
    total += std::log(sum) + top - logit[y];
  }
  return total / static_cast<long double>(z.rows());
}

double SequenceModel::loss(const Mat& frames, std::span<const int> labels) const {
  return static_cast<double>(loss_extended(frames, labels));
}

double SequenceModel::loss_and_grad(const Mat& frames, std::span<const int> labels, Rng* dropout_rng) {
  std::vector<Cache> caches;
  const Mat z = run_hidden(normalize(frames), &caches, dropout_rng);
  const std::size_t steps = z.rows(), classes = arch_.n_classes, h = z.cols();
  Mat p = affine_rows(z, head_w_.value, head_b_.value);
  double total = 0.0;
  Mat dz(steps, h);
  const double inv_t = 1.0 / static_cast<double>(steps);
  std::vector<double> dlogit(classes);
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = p.row(t);
    tensor::softmax_inplace(row);
    const auto y = static_cast<std::size_t>(label_at(labels, t, steps, classes));
    total += tensor::cross_entropy(row, y);
    for (std::size_t k = 0; k < classes; ++k) dlogit[k] = (row[k] - (k == y ? 1.0 : 0.0)) * inv_t;
    outer_add(head_w_.grad, 0, classes, dlogit.data(), z.data() + t * h);
    for (std::size_t k = 0; k < classes; ++k) head_b_.grad[k] += dlogit[k];
    matvec_t_add(head_w_.value, 0, classes, dlogit.data(), dz.data() + t * h);
  }
  Mat grad = std::move(dz);
  for (std::size_t l = layers_.size(); l-- > 0;) grad = layers_[l]->backward(grad, caches[l]);
  return total * inv_t;
}

std::vector<Param*> SequenceModel::params() {
  std::vector<Param*> out;
  for (auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

void SequenceModel::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

std::vector<double> dnn_forward(const SequenceModel& model, std::span<const double> frame) {
  if (model.arch().kind != ArchKind::DNN) throw Error(ErrorCode::InvalidArgument, "model is not a DNN");
  if (frame.size() != model.arch().input_dim) throw Error(ErrorCode::ShapeMismatch, "frame width");
  const Mat p = model.frame_probabilities(Mat(1, frame.size(), {frame.begin(), frame.end()}));
  return {p.row(0).begin(), p.row(0).end()};
}

namespace {
Mat kind_checked(const SequenceModel& model, const Mat& seq, ArchKind kind) {
  if (model.arch().kind != kind)
    throw Error(ErrorCode::InvalidArgument, "model is not " + std::string(arch_name(kind)));
  if (seq.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty sequence");
  return model.frame_probabilities(seq);
}
}  // namespace

Mat lstm_forward(const SequenceModel& model, const Mat& seq) { return kind_checked(model, seq, ArchKind::LSTM); }
Mat bilstm_forward(const SequenceModel& model, const Mat& seq) { return kind_checked(model, seq, ArchKind::BiLSTM); }
Mat gru_forward(const SequenceModel& model, const Mat& seq) { return kind_checked(model, seq, ArchKind::GRU); }

// ---- training --------------------------------------------------------------

std::vector<LabeledSequence> labeled(std::span<const features::FeatureSequence> dataset) {
  std::vector<LabeledSequence> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].label)
      throw Error(ErrorCode::UnlabeledSequence, "sequence " + std::to_string(i) + " (" +
                                                    dataset[i].speaker_id + ") has no label");
    if (dataset[i].frames.rows() == 0)
      throw Error(ErrorCode::EmptyInput, "sequence " + std::to_string(i) + " is empty");
    out.push_back({&dataset[i].frames, corpus::code(*dataset[i].label)});
  }
  return out;
}

TrainResult train(SequenceModel& model, std::span<const features::FeatureSequence> dataset,
                  const TrainConfig& config) {
  config.validate();
  const auto data = labeled(dataset);
  std::set<int> classes;
  for (const auto& d : data) classes.insert(d.label);
  if (classes.size() < 2) throw Error(ErrorCode::SingleClassDataset, "training data has one class");
  if (static_cast<std::size_t>(*classes.rbegin()) >= model.num_classes())
    throw Error(ErrorCode::LabelOutOfRange, "label exceeds model classes");

  const std::size_t dim = model.arch().input_dim;
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  std::size_t total_frames = 0;
  for (const auto& d : data) {
    if (d.frames->cols() != dim) throw Error(ErrorCode::ShapeMismatch, "feature width");
    for (std::size_t t = 0; t < d.frames->rows(); ++t)
      for (std::size_t c = 0; c < dim; ++c) mean[c] += (*d.frames)(t, c);
    total_frames += d.frames->rows();
  }
  for (auto& m : mean) m /= static_cast<double>(total_frames);
  for (const auto& d : data)
    for (std::size_t t = 0; t < d.frames->rows(); ++t)
      for (std::size_t c = 0; c < dim; ++c) {
        const double e = (*d.frames)(t, c) - mean[c];
        var[c] += e * e;
      }
  std::vector<double> stddev(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const double s = std::sqrt(var[c] / static_cast<double>(total_frames));
    stddev[c] = s > 1e-8 ? s : 1.0;
  }
  model.set_normalization(std::move(mean), std::move(stddev));

  TrainResult result;
  {
    double sum = 0.0;
    for (const auto& d : data) {
      const int y = d.label;
      sum += model.loss(*d.frames, {&y, 1}) * static_cast<double>(d.frames->rows());
    }
    result.initial_loss = sum / static_cast<double>(total_frames);
  }

  Rng rng(config.seed);
  auto params = model.params();
  auto adam = tensor::make_adam(params, config.learning_rate);
  auto step = [&](const Mat& x, std::span<const int> labels) {
    model.zero_grad();
    const double l = model.loss_and_grad(x, labels, &rng);
    if (!std::isfinite(l)) throw Error(ErrorCode::NumericFailure, "non-finite training loss");
    if (config.clip_norm > 0.0) tensor::clip_grad_norm(params, config.clip_norm);
    tensor::adam_step(params, adam);
    return l;
  };

  if (model.arch().kind == ArchKind::DNN) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> index;  // (sequence, frame)
    index.reserve(total_frames);
    for (std::size_t i = 0; i < data.size(); ++i)
      for (std::size_t t = 0; t < data[i].frames->rows(); ++t)
        index.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(t));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      if (config.shuffle) rng.shuffle(std::span(index));
      double sum = 0.0;
      for (std::size_t start = 0; start < index.size(); start += config.batch_size) {
        const std::size_t n = std::min(config.batch_size, index.size() - start);
        Mat batch(n, dim);
        std::vector<int> labels(n);
        for (std::size_t r = 0; r < n; ++r) {
          const auto [seq, t] = index[start + r];
          const auto src = data[seq].frames->row(t);
          std::copy(src.begin(), src.end(), batch.row(r).begin());
          labels[r] = data[seq].label;
        }
        sum += step(batch, labels) * static_cast<double>(n);
      }
      result.epoch_loss.push_back(sum / static_cast<double>(total_frames));
    }
  } else {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      if (config.shuffle) rng.shuffle(std::span(order));
      double sum = 0.0;
      for (const std::size_t i : order) {
        const int y = data[i].label;
        sum += step(*data[i].frames, {&y, 1}) * static_cast<double>(data[i].frames->rows());
      }
      result.epoch_loss.push_back(sum / static_cast<double>(total_frames));
    }
  }
  return result;
}

// ---- serialization -----------------------------------------------------------

namespace {
constexpr std::string_view kModelMagic = "VOCMODL1";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const SequenceModel& model, const std::filesystem::path& path) {
  auto& m = const_cast<SequenceModel&>(model);  // params() is non-const; nothing is modified
  const auto& arch = model.arch();
  binio::Writer w(path);
  w.magic(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(arch.kind));
  w.u32(static_cast<std::uint32_t>(arch.input_dim));
  w.u32(static_cast<std::uint32_t>(arch.n_classes));
  w.u32(static_cast<std::uint32_t>(arch.hidden.size()));
  for (auto h : arch.hidden) w.u32(static_cast<std::uint32_t>(h));
  w.f64(arch.dropout);
  w.f64s(model.norm_mean());
  w.f64s(model.norm_std());
  const auto params = m.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->value.rows()));
    w.u32(static_cast<std::uint32_t>(p->value.cols()));
    w.f64s(p->value.storage());
  }
  w.finish();
}

SequenceModel load_model(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic(kModelMagic);
  if (r.u32() != kModelVersion) throw Error(ErrorCode::BadFormat, path.string() + ": model version");
  ArchSpec arch;
  const auto tag = r.u32();
  if (tag > 3) throw Error(ErrorCode::BadFormat, path.string() + ": arch tag");
  arch.kind = static_cast<ArchKind>(tag);
  arch.input_dim = r.u32();
  arch.n_classes = r.u32();
  const auto layers = r.u32();
  if (layers == 0 || layers > 64) throw Error(ErrorCode::BadFormat, path.string() + ": layer count");
  for (std::uint32_t i = 0; i < layers; ++i) arch.hidden.push_back(r.u32());
  arch.dropout = r.f64();
  try {
    arch.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.detail());
  }
  SequenceModel model(arch, 0);
  std::vector<double> mean(arch.input_dim), stddev(arch.input_dim);
  r.f64s(mean);
  r.f64s(stddev);
  model.set_normalization(std::move(mean), std::move(stddev));
  auto params = model.params();
  if (r.u32() != params.size()) throw Error(ErrorCode::BadFormat, path.string() + ": parameter count");
  for (auto* p : params) {
    const auto name = r.str();
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw Error(ErrorCode::BadFormat, path.string() + ": parameter block " + name);
    r.f64s({p->value.data(), p->value.size()});
  }
  return model;
}

}  // namespace vocalis::nets
