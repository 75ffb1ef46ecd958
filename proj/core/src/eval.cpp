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

#include "vocalis/eval.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vocalis/corpus.hpp"
#include "vocalis/error.hpp"

namespace vocalis::eval {

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major)
    : k_(classes), counts_(std::move(row_major)) {
  if (counts_.size() != k_ * k_) throw Error(ErrorCode::ShapeMismatch, "confusion matrix size");
}

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t n) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= k_ ||
      static_cast<std::size_t>(predicted) >= k_)
    throw Error(ErrorCode::LabelOutOfRange, "confusion matrix index");
  counts_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(predicted)] += n;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
  return t;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t t = 0;
  for (std::size_t j = 0; j < k_; ++j) t += at(truth, j);
  return t;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error(ErrorCode::EmptyInput, "accuracy of an empty confusion matrix");
  return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double sensitivity(const ConfusionMatrix& cm, std::size_t cls) {
  if (cls >= cm.classes()) throw Error(ErrorCode::LabelOutOfRange, "class index");
  const auto row = cm.row_total(cls);
  if (row == 0) throw Error(ErrorCode::NotEvaluated, class_name(cls, cm.classes()) + " absent from truth");
  return 100.0 * static_cast<double>(cm.at(cls, cls)) / static_cast<double>(row);
}

double uar(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (std::size_t k = 0; k < cm.classes(); ++k) sum += sensitivity(cm, k);
  return sum / static_cast<double>(cm.classes());
}

int majority_vote(const tensor::Mat& frame_probs) {
  const std::size_t steps = frame_probs.rows(), classes = frame_probs.cols();
  if (steps == 0 || classes == 0) throw Error(ErrorCode::EmptyInput, "no frames to vote");
  std::vector<std::size_t> votes(classes, 0);
  std::vector<double> mass(classes, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto row = frame_probs.row(t);
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes; ++k)
      if (row[k] > row[best]) best = k;
    ++votes[best];
    for (std::size_t k = 0; k < classes; ++k) mass[k] += row[k];
  }
  std::size_t winner = 0;
  for (std::size_t k = 1; k < classes; ++k) {
    if (votes[k] > votes[winner] || (votes[k] == votes[winner] && mass[k] > mass[winner])) winner = k;
  }
  return static_cast<int>(winner);
}

int predict_utterance(const FrameClassifier& classifier, const features::FeatureSequence& seq) {
  if (seq.frames.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty feature sequence");
  return majority_vote(classifier.frame_probabilities(seq.frames));
}

std::string class_name(std::size_t cls, std::size_t classes) {
  if (classes == static_cast<std::size_t>(corpus::kNumLabels))
    return std::string(corpus::label_name(corpus::label_from_code(static_cast<int>(cls))));
  return "class" + std::to_string(cls);
}

EvalReport make_report(const ConfusionMatrix& cm) {
  EvalReport r;
  r.confusion = cm;
  r.accuracy = accuracy(cm);
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    if (cm.row_total(k) == 0) {
      r.sensitivity.push_back(std::nullopt);
      r.warnings.push_back(class_name(k, cm.classes()) + " absent from test truth; excluded from UAR");
      continue;
    }
    const double s = sensitivity(cm, k);
    r.sensitivity.push_back(s);
    sum += s;
    ++evaluated;
  }
  r.uar = evaluated ? sum / static_cast<double>(evaluated) : 0.0;
  return r;
}

EvalReport evaluate(const FrameClassifier& classifier, std::span<const features::FeatureSequence> test_set) {
  if (test_set.empty()) throw Error(ErrorCode::EmptyInput, "empty test set");
  ConfusionMatrix cm(classifier.num_classes());
  std::vector<int> predictions;
  for (const auto& seq : test_set) {
    if (!seq.label) throw Error(ErrorCode::UnlabeledSequence, seq.speaker_id + " has no label");
    const int p = predict_utterance(classifier, seq);
    cm.add(corpus::code(*seq.label), p);
    predictions.push_back(p);
  }
  auto report = make_report(cm);
  report.predictions = std::move(predictions);
  return report;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["classes"] = report.classes();
  j["accuracy"] = report.accuracy;
  j["uar"] = report.uar;
  for (std::size_t k = 0; k < report.classes(); ++k) {
    const auto key = "sensitivity." + class_name(k, report.classes());
    if (report.sensitivity[k]) j[key] = *report.sensitivity[k];
    else j[key] = nullptr;
  }
  j["confusion"] = report.confusion.row_major();
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  const std::size_t k = report.classes();
  out << std::fixed << std::setprecision(2);
  out << std::setw(14) << "truth\\pred";
  for (std::size_t j = 0; j < k; ++j) out << std::setw(13) << class_name(j, k);
  out << std::setw(13) << "sens(%)" << '\n';
  for (std::size_t i = 0; i < k; ++i) {
    out << std::setw(14) << class_name(i, k);
    for (std::size_t j = 0; j < k; ++j) out << std::setw(13) << report.confusion.at(i, j);
    if (report.sensitivity[i]) out << std::setw(13) << *report.sensitivity[i];
    else out << std::setw(13) << "n/a";
    out << '\n';
  }
  out << "accuracy " << report.accuracy << "%  UAR " << report.uar << "%\n";
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

FoldSummary summarize_folds(std::span<const EvalReport> reports) {
  FoldSummary s;
  s.folds = reports.size();
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no fold reports to summarize");
  auto mean_std = [&](auto get, double& mean, double& sd) {
    double sum = 0.0;
    for (const auto& r : reports) sum += get(r);
    mean = sum / static_cast<double>(reports.size());
    double sq = 0.0;
    for (const auto& r : reports) sq += (get(r) - mean) * (get(r) - mean);
    sd = reports.size() > 1 ? std::sqrt(sq / static_cast<double>(reports.size() - 1)) : 0.0;
  };
  mean_std([](const EvalReport& r) { return r.accuracy; }, s.accuracy_mean, s.accuracy_std);
  mean_std([](const EvalReport& r) { return r.uar; }, s.uar_mean, s.uar_std);
  return s;
}

std::string summary_json(const FoldSummary& summary) {
  nlohmann::ordered_json j;
  j["folds"] = summary.folds;
  j["accuracy_mean"] = summary.accuracy_mean;
  j["accuracy_std"] = summary.accuracy_std;
  j["uar_mean"] = summary.uar_mean;
  j["uar_std"] = summary.uar_std;
  return j.dump(2) + "\n";
}

}  // namespace vocalis::eval
