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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocalis/classifier.hpp"
#include "vocalis/features.hpp"
#include "vocalis/tensor.hpp"

namespace vocalis::eval {

/// K x K counts; rows are the true class, columns the prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 4) : k_(classes), counts_(classes * classes, 0) {}
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major);

  std::size_t classes() const { return k_; }
  void add(int truth, int predicted, std::uint64_t n = 1);
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_total(std::size_t truth) const;
  const std::vector<std::uint64_t>& row_major() const { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

/// 100 * trace / total. Throws EmptyInput for an empty matrix.
double accuracy(const ConfusionMatrix& cm);
/// 100 * TP / (TP + FN) for one class. Throws NotEvaluated when the class
/// never occurs in the truth.
double sensitivity(const ConfusionMatrix& cm, std::size_t cls);
/// Unweighted mean of all K sensitivities. Throws NotEvaluated if any class
/// is absent from the truth.
double uar(const ConfusionMatrix& cm);

/// Utterance label from a T x K matrix of frame probabilities: each frame
/// votes its argmax (lowest class wins frame ties); the modal class wins;
/// ties between modal classes go to the larger summed probability, then to
/// the lowest class code.
int majority_vote(const tensor::Mat& frame_probs);

int predict_utterance(const FrameClassifier& classifier, const features::FeatureSequence& seq);

struct EvalReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  /// nullopt = NotEvaluated (class absent from the test truth).
  std::vector<std::optional<double>> sensitivity;
  /// Mean over evaluated classes; equals the full UAR when none are missing.
  double uar = 0.0;
  std::vector<std::string> warnings;
  std::vector<int> predictions;  // per evaluated utterance

  std::size_t classes() const { return confusion.classes(); }
};

EvalReport make_report(const ConfusionMatrix& cm);

/// Predicts every labeled sequence and scores the predictions.
EvalReport evaluate(const FrameClassifier& classifier, std::span<const features::FeatureSequence> test_set);

/// "fd" ... for K = 4, otherwise "class<k>".
std::string class_name(std::size_t cls, std::size_t classes);

/// Keys: classes, accuracy, uar, sensitivity.<class> (null if not evaluated),
/// confusion (row-major), warnings.
std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

struct FoldSummary {
  std::size_t folds = 0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double uar_mean = 0.0, uar_std = 0.0;
};

/// Mean and sample standard deviation over fold reports.
FoldSummary summarize_folds(std::span<const EvalReport> reports);
std::string summary_json(const FoldSummary& summary);

}  // namespace vocalis::eval
