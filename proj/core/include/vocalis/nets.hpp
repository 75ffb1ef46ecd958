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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocalis/classifier.hpp"
#include "vocalis/features.hpp"
#include "vocalis/rng.hpp"
#include "vocalis/tensor.hpp"

namespace vocalis::nets {

enum class ArchKind : std::uint32_t { DNN = 0, LSTM = 1, BiLSTM = 2, GRU = 3 };

std::string_view arch_name(ArchKind kind);
ArchKind parse_arch(std::string_view name);

struct ArchSpec {
  ArchKind kind = ArchKind::BiLSTM;
  /// DNN: widths of the relu layers. LSTM/GRU: cells per layer.
  /// BiLSTM: cells per direction in each block.
  std::vector<std::size_t> hidden;
  double dropout = 0.0;
  std::size_t n_classes = 4;
  std::size_t input_dim = features::kFeatureDim;

  /// DNN 3x200; LSTM and GRU 2x50 with dropout 0.2; BiLSTM 2 blocks of
  /// 50-cell forward/backward LSTMs with dropout 0.2.
  static ArchSpec defaults(ArchKind kind, std::size_t n_classes = 4);
  void validate() const;
  std::size_t hidden_dim() const { return hidden.back(); }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  std::uint64_t seed = 1;
  bool shuffle = true;
  /// Frames per optimizer step for the DNN; recurrent models take one
  /// utterance per step.
  std::size_t batch_size = 64;
  /// Joint gradient-norm clip; 0 disables.
  double clip_norm = 0.0;

  /// 0.001 for DNN and GRU, 0.0005 for LSTM and BiLSTM.
  static TrainConfig defaults(ArchKind kind);
  void validate() const;
};

/// Per-layer forward cache. Layers decide what each slot holds.
struct Cache {
  std::vector<tensor::Mat> mats;
  std::vector<Cache> children;
};

/// A sequence-to-sequence layer mapping T x in to T x out.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  /// `cache` may be null for inference. `dropout_rng` non-null selects
  /// training mode.
  virtual tensor::Mat forward(const tensor::Mat& x, Cache* cache, Rng* dropout_rng) const = 0;
  /// Accumulates parameter gradients and returns dL/dx.
  virtual tensor::Mat backward(const tensor::Mat& dy, const Cache& cache) = 0;
  virtual std::vector<tensor::Param*> params() = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
};

/// relu(W x + b), applied frame by frame.
class DenseReluLayer final : public Layer {
 public:
  DenseReluLayer(std::size_t in, std::size_t out, const std::string& name);
  std::size_t input_dim() const override { return w_.value.cols(); }
  std::size_t output_dim() const override { return w_.value.rows(); }
  tensor::Mat forward(const tensor::Mat& x, Cache* cache, Rng* dropout_rng) const override;
  tensor::Mat backward(const tensor::Mat& dy, const Cache& cache) override;
  std::vector<tensor::Param*> params() override { return {&w_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseReluLayer>(*this); }

  tensor::Param& weight() { return w_; }
  tensor::Param& bias() { return b_; }

 private:
  tensor::Param w_, b_;
};

/// LSTM with gate order (input, forget, candidate, output):
///   a = W x + U h_prev + b
///   c = sigmoid(a_f) * c_prev + sigmoid(a_i) * tanh(a_g)
///   h = sigmoid(a_o) * tanh(c)
/// Zero initial state. `reverse` runs from the last frame to the first.
/// Inverted dropout is applied to the output sequence during training.
class LstmLayer final : public Layer {
 public:
  LstmLayer(std::size_t in, std::size_t hidden, bool reverse, double dropout, const std::string& name);
  std::size_t input_dim() const override { return w_.value.cols(); }
  std::size_t output_dim() const override { return u_.value.cols(); }
  tensor::Mat forward(const tensor::Mat& x, Cache* cache, Rng* dropout_rng) const override;
  tensor::Mat backward(const tensor::Mat& dy, const Cache& cache) override;
  std::vector<tensor::Param*> params() override { return {&w_, &u_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LstmLayer>(*this); }

  tensor::Param& input_weights() { return w_; }
  tensor::Param& recurrent_weights() { return u_; }
  tensor::Param& bias() { return b_; }
  bool reverse() const { return reverse_; }

 private:
  tensor::Param w_, u_, b_;
  bool reverse_;
  double dropout_;
};

/// GRU after Cho et al. with gate order (update, reset, candidate):
///   z = sigmoid(W_z x + U_z h_prev + b_z)
///   r = sigmoid(W_r x + U_r h_prev + b_r)
///   n = tanh(W_n x + U_n (r * h_prev) + b_n)
///   h = z * h_prev + (1 - z) * n
class GruLayer final : public Layer {
 public:
  GruLayer(std::size_t in, std::size_t hidden, double dropout, const std::string& name);
  std::size_t input_dim() const override { return w_.value.cols(); }
  std::size_t output_dim() const override { return u_.value.cols(); }
  tensor::Mat forward(const tensor::Mat& x, Cache* cache, Rng* dropout_rng) const override;
  tensor::Mat backward(const tensor::Mat& dy, const Cache& cache) override;
  std::vector<tensor::Param*> params() override { return {&w_, &u_, &b_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GruLayer>(*this); }

  tensor::Param& input_weights() { return w_; }
  tensor::Param& recurrent_weights() { return u_; }
  tensor::Param& bias() { return b_; }

 private:
  tensor::Param w_, u_, b_;
  double dropout_;
};

/// Forward-direction and backward-direction LSTMs over the same input whose
/// outputs are summed element-wise (not concatenated).
class BiLstmBlock final : public Layer {
 public:
  BiLstmBlock(std::size_t in, std::size_t hidden, double dropout, const std::string& name);
  std::size_t input_dim() const override { return fwd_.input_dim(); }
  std::size_t output_dim() const override { return fwd_.output_dim(); }
  tensor::Mat forward(const tensor::Mat& x, Cache* cache, Rng* dropout_rng) const override;
  tensor::Mat backward(const tensor::Mat& dy, const Cache& cache) override;
  std::vector<tensor::Param*> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BiLstmBlock>(*this); }

  LstmLayer& forward_lstm() { return fwd_; }
  LstmLayer& backward_lstm() { return bwd_; }

 private:
  LstmLayer fwd_, bwd_;
};

struct TrainResult {
  /// Mean frame cross-entropy over the training set before any update.
  double initial_loss = 0.0;
  /// Mean frame cross-entropy observed during each epoch.
  std::vector<double> epoch_loss;
};

/// One of the four neural classifiers: per-feature standardization, the
/// hidden stack, and a softmax head p = softmax(W z + b) on every frame.
class SequenceModel final : public FrameClassifier {
 public:
  /// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.
  SequenceModel(const ArchSpec& arch, std::uint64_t init_seed);
  SequenceModel(const SequenceModel& other);
  SequenceModel& operator=(const SequenceModel& other);
  SequenceModel(SequenceModel&&) noexcept = default;
  SequenceModel& operator=(SequenceModel&&) noexcept = default;

  const ArchSpec& arch() const { return arch_; }

  /// T x K class probabilities (inference mode).
  tensor::Mat frame_probabilities(const tensor::Mat& frames) const override;
  std::size_t num_classes() const override { return arch_.n_classes; }

  /// Head inputs (last hidden layer activations), T x H.
  tensor::Mat hidden_features(const tensor::Mat& frames) const;
  /// Applies only the softmax head to hidden features.
  tensor::Mat head_probabilities(const tensor::Mat& hidden) const;

  /// Mean frame cross-entropy in inference mode.
  double loss(const tensor::Mat& frames, std::span<const int> labels) const;
  /// Same loss with the head and log-sum-exp accumulated in long double.
  /// Finite differences of a double-rounded loss cannot resolve gradients
  /// much below 1e-8; this keeps the rounding of the loss value out of them.
  long double loss_extended(const tensor::Mat& frames, std::span<const int> labels) const;
  /// Forward + backward; gradients are accumulated into the params (call
  /// zero_grad first). `dropout_rng` non-null enables dropout.
  double loss_and_grad(const tensor::Mat& frames, std::span<const int> labels, Rng* dropout_rng);

  std::vector<tensor::Param*> params();
  void zero_grad();

  tensor::Param& head_weight() { return head_w_; }
  tensor::Param& head_bias() { return head_b_; }
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

  /// Per-feature standardization applied before the first layer.
  void set_normalization(std::vector<double> mean, std::vector<double> stddev);
  const std::vector<double>& norm_mean() const { return mean_; }
  const std::vector<double>& norm_std() const { return std_; }

 private:
  tensor::Mat normalize(const tensor::Mat& frames) const;
  tensor::Mat run_hidden(const tensor::Mat& x, std::vector<Cache>* caches, Rng* dropout_rng) const;

  ArchSpec arch_;
  std::vector<double> mean_, std_;
  std::vector<std::unique_ptr<Layer>> layers_;
  tensor::Param head_w_, head_b_;
};

/// Single-frame DNN evaluation; the model must be a DNN.
std::vector<double> dnn_forward(const SequenceModel& model, std::span<const double> frame);
/// Kind-checked sequence evaluation, T x K.
tensor::Mat lstm_forward(const SequenceModel& model, const tensor::Mat& seq);
tensor::Mat bilstm_forward(const SequenceModel& model, const tensor::Mat& seq);
tensor::Mat gru_forward(const SequenceModel& model, const tensor::Mat& seq);

struct LabeledSequence {
  const tensor::Mat* frames;
  int label;
};

/// Labeled sequences from feature data; throws UnlabeledSequence.
std::vector<LabeledSequence> labeled(std::span<const features::FeatureSequence> dataset);

/// Fits normalization statistics on the training frames, then runs Adam.
/// Each frame inherits its utterance's label. The DNN draws shuffled
/// mini-batches of frames; recurrent models take one whole utterance per
/// step (full backpropagation through time).
TrainResult train(SequenceModel& model, std::span<const features::FeatureSequence> dataset,
                  const TrainConfig& config);

// Binary container "VOCMODL1"; layout in docs/formats.md.
void save_model(const SequenceModel& model, const std::filesystem::path& path);
SequenceModel load_model(const std::filesystem::path& path);

}  // namespace vocalis::nets
