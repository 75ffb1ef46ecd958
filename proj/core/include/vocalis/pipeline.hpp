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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vocalis/classifier.hpp"
#include "vocalis/corpus.hpp"
#include "vocalis/eval.hpp"
#include "vocalis/features.hpp"
#include "vocalis/forest.hpp"
#include "vocalis/nets.hpp"
#include "vocalis/vad.hpp"

// Glue shared by the command-line tool and the end-to-end harnesses.
namespace vocalis::pipeline {

/// Runs task(i) for i in [0, n) on `jobs` threads. Every index is attempted;
/// afterwards the exception of the lowest failing index, if any, is rethrown.
/// Callers write results by index, so output never depends on `jobs`.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task);

/// In-memory manifest for waveforms that were never written to disk; the
/// path column holds the speaker id.
corpus::Manifest manifest_of(std::span<const corpus::Waveform> waves);

std::vector<corpus::Waveform> load_waveforms(const corpus::Manifest& manifest, std::size_t jobs = 1);

std::vector<features::FeatureSequence> extract_all(std::span<const corpus::Waveform> waves,
                                                   const vad::VadConfig& vad_config = {}, std::size_t jobs = 1);

/// Writes one binary feature file per sequence plus `index.csv` with header
/// `feature_path,speaker_id,label,utterance_kind,source_path`. `manifest`
/// entries are aligned with `data`.
void save_feature_set(const std::filesystem::path& dir, const corpus::Manifest& manifest,
                      std::span<const features::FeatureSequence> data);
/// Reads the sequences listed in `<dir>/index.csv`, in index order.
std::vector<features::FeatureSequence> load_feature_set(const std::filesystem::path& dir);

struct Partition {
  std::vector<features::FeatureSequence> train;
  std::vector<features::FeatureSequence> test;
};

/// Train/test by the plan's speaker sets; sequences of unknown speakers are
/// dropped.
Partition partition(std::span<const features::FeatureSequence> data, const corpus::SplitPlan& plan);

/// Fold `fold` of the plan's train speakers becomes the test side.
Partition fold_partition(std::span<const features::FeatureSequence> data, const corpus::SplitPlan& plan, int fold);

enum class ModelKind { DNN, LSTM, BiLSTM, GRU, RF };

/// "dnn", "lstm", "bilstm", "gru", "rf".
ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

struct TrainOptions {
  ModelKind kind = ModelKind::BiLSTM;
  std::optional<double> learning_rate;  // unset: architecture default
  std::optional<int> epochs;            // unset: 30
  std::uint64_t seed = 1;
  double clip_norm = 0.0;
  std::size_t trees = 26;
  std::size_t n_classes = 4;
};

/// Either a neural sequence model or a random forest.
class Model final : public FrameClassifier {
 public:
  explicit Model(nets::SequenceModel model) : impl_(std::move(model)) {}
  explicit Model(forest::Forest forest) : impl_(std::move(forest)) {}

  tensor::Mat frame_probabilities(const tensor::Mat& frames) const override;
  std::size_t num_classes() const override;

  bool is_forest() const { return std::holds_alternative<forest::Forest>(impl_); }
  const nets::SequenceModel* network() const { return std::get_if<nets::SequenceModel>(&impl_); }
  const forest::Forest* forest() const { return std::get_if<forest::Forest>(&impl_); }

  void save(const std::filesystem::path& path) const;
  /// Dispatches on the file magic.
  static Model load(const std::filesystem::path& path);

 private:
  std::variant<nets::SequenceModel, forest::Forest> impl_;
};

struct TrainOutcome {
  Model model;
  std::optional<nets::TrainResult> history;  // networks only
};

TrainOutcome train_model(const TrainOptions& options, std::span<const features::FeatureSequence> train_set);

struct CrossValidation {
  std::vector<eval::EvalReport> folds;
  eval::FoldSummary summary;
};

/// Trains one model per fold on the other four folds and scores it on the
/// held-out fold. Folds run on `jobs` threads; results do not depend on it.
CrossValidation cross_validate(const TrainOptions& options, std::span<const features::FeatureSequence> data,
                               const corpus::SplitPlan& plan, std::size_t jobs = 1);

}  // namespace vocalis::pipeline
