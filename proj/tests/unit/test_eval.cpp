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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "support/test_support.hpp"
#include "vocalis/error.hpp"
#include "vocalis/eval.hpp"

namespace vocalis::eval {
namespace {

using tensor::Mat;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "nothing thrown";
  return ErrorCode::InvalidArgument;
}

ConfusionMatrix random_cm(Rng& rng, std::size_t k, bool allow_empty_rows = false) {
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) cm.add(static_cast<int>(i), static_cast<int>(j), rng.below(20));
    if (!allow_empty_rows && cm.row_total(i) == 0) cm.add(static_cast<int>(i), static_cast<int>(i));
  }
  return cm;
}

TEST(Confusion, CountsAndTotals) {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(0, 2, 4);
  cm.add(2, 2, 3);
  EXPECT_EQ(cm.at(0, 2), 4u);
  EXPECT_EQ(cm.total(), 8u);
  EXPECT_EQ(cm.trace(), 4u);
  EXPECT_EQ(cm.row_total(0), 5u);
  EXPECT_EQ(cm.row_total(1), 0u);
  EXPECT_THROW(cm.add(3, 0), Error);
  EXPECT_THROW(cm.add(0, -1), Error);
  EXPECT_THROW(ConfusionMatrix(2, {1, 2, 3}), Error);
}

TEST(Metrics, WorkedExample) {
  // sensitivities 100, 50, 75, 75
  const ConfusionMatrix cm(4, {4, 0, 0, 0,
                               1, 2, 1, 0,
                               0, 1, 3, 0,
                               1, 0, 0, 3});
  EXPECT_DOUBLE_EQ(sensitivity(cm, 0), 100.0);
  EXPECT_DOUBLE_EQ(sensitivity(cm, 1), 50.0);
  EXPECT_DOUBLE_EQ(sensitivity(cm, 2), 75.0);
  EXPECT_DOUBLE_EQ(uar(cm), 75.0);
  EXPECT_DOUBLE_EQ(accuracy(cm), 100.0 * 12.0 / 16.0);
}

TEST(Metrics, ImbalancedAccuracyDiffersFromUar) {
  const ConfusionMatrix cm(2, {90, 0, 10, 0});
  EXPECT_DOUBLE_EQ(accuracy(cm), 90.0);
  EXPECT_DOUBLE_EQ(uar(cm), 50.0);
}

TEST(Metrics, EmptyAndMissingClasses) {
  EXPECT_EQ(code_of([] { accuracy(ConfusionMatrix(3)); }), ErrorCode::EmptyInput);
  const ConfusionMatrix cm(3, {2, 0, 0, 0, 0, 0, 1, 0, 1});
  EXPECT_EQ(code_of([&] { sensitivity(cm, 1); }), ErrorCode::NotEvaluated);
  EXPECT_EQ(code_of([&] { uar(cm); }), ErrorCode::NotEvaluated);
  const auto r = make_report(cm);
  EXPECT_FALSE(r.sensitivity[1].has_value());
  EXPECT_DOUBLE_EQ(*r.sensitivity[2], 50.0);
  EXPECT_DOUBLE_EQ(r.uar, 75.0);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Metrics, CountingOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(300);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(i < k ? i : rng.below(k));  // every class present
      pred[i] = static_cast<int>(rng.below(k));
    }
    if (n < k) continue;
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < n; ++i) cm.add(truth[i], pred[i]);
    std::size_t hits = 0;
    std::vector<double> tp(k, 0), support(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      hits += truth[i] == pred[i];
      support[truth[i]] += 1;
      tp[truth[i]] += truth[i] == pred[i];
    }
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) mean += 100.0 * tp[c] / support[c];
    EXPECT_NEAR(accuracy(cm), 100.0 * hits / n, 1e-9);
    EXPECT_NEAR(uar(cm), mean / k, 1e-9);
  }
}

TEST(Metrics, IdentitiesOnRandomMatrices) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const auto cm = random_cm(rng, k);
    double lo = 1e9, hi = -1e9, weighted = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double s = sensitivity(cm, c);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      weighted += s * cm.row_total(c) / static_cast<double>(cm.total());
    }
    const double u = uar(cm);
    EXPECT_GE(u, lo - 1e-9);
    EXPECT_LE(u, hi + 1e-9);
    EXPECT_NEAR(accuracy(cm), weighted, 1e-9);
    EXPECT_GE(u, 0.0);
    EXPECT_LE(u, 100.0);
  }
}

TEST(Metrics, RowScalingAndPermutationInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(4);
    const auto cm = random_cm(rng, k);
    // scale each true-class row independently
    ConfusionMatrix scaled(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto f = 1 + rng.below(5);
      for (std::size_t j = 0; j < k; ++j) scaled.add(static_cast<int>(i), static_cast<int>(j), cm.at(i, j) * f);
    }
    EXPECT_NEAR(uar(scaled), uar(cm), 1e-9);
    // relabel classes consistently on both axes
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    ConfusionMatrix permuted(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        permuted.add(static_cast<int>(perm[i]), static_cast<int>(perm[j]), cm.at(i, j));
    EXPECT_NEAR(uar(permuted), uar(cm), 1e-9);
    EXPECT_NEAR(accuracy(permuted), accuracy(cm), 1e-9);
  }
}

TEST(Metrics, BalancedRowsMakeUarEqualAccuracy) {
  const ConfusionMatrix cm(3, {5, 3, 2, 1, 8, 1, 0, 0, 10});
  EXPECT_NEAR(uar(cm), accuracy(cm), 1e-12);
}

TEST(Metrics, RandomGuessingScoresChance) {
  Rng rng(4);
  for (std::size_t k : {2u, 4u, 7u}) {
    ConfusionMatrix cm(k);
    for (int i = 0; i < 200000; ++i) cm.add(static_cast<int>(rng.below(k)), static_cast<int>(rng.below(k)));
    EXPECT_NEAR(uar(cm), 100.0 / k, 1.0);
  }
}

TEST(Vote, MajorityAndTieBreaks) {
  // two frames for class 1, one for class 0
  EXPECT_EQ(majority_vote(Mat(3, 2, {0.4, 0.6, 0.8, 0.2, 0.1, 0.9})), 1);
  // one vote each: class 0 has the larger summed probability
  EXPECT_EQ(majority_vote(Mat(2, 2, {0.9, 0.1, 0.45, 0.55})), 0);
  EXPECT_EQ(majority_vote(Mat(2, 2, {0.55, 0.45, 0.1, 0.9})), 1);
  // votes and sums tied: lowest code
  EXPECT_EQ(majority_vote(Mat(2, 2, {0.7, 0.3, 0.3, 0.7})), 0);
  // frame-level tie goes to the lower class
  EXPECT_EQ(majority_vote(Mat(1, 3, {0.2, 0.4, 0.4})), 1);
  EXPECT_THROW(majority_vote(Mat(0, 3)), Error);
}

TEST(Vote, MatchesCountingOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + rng.below(4), t = 1 + rng.below(30);
    Mat p(t, k);
    std::vector<int> votes(k, 0);
    std::vector<double> sums(k, 0.0);
    for (std::size_t r = 0; r < t; ++r) {
      for (std::size_t c = 0; c < k; ++c) p(r, c) = static_cast<double>(rng.below(4));  // many ties
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (p(r, c) > p(r, best)) best = c;
      ++votes[best];
      for (std::size_t c = 0; c < k; ++c) sums[c] += p(r, c);
    }
    std::size_t want = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (votes[c] > votes[want] || (votes[c] == votes[want] && sums[c] > sums[want])) want = c;
    EXPECT_EQ(majority_vote(p), static_cast<int>(want));
  }
}

class FixedClassifier final : public FrameClassifier {
 public:
  tensor::Mat frame_probabilities(const tensor::Mat& frames) const override {
    // class = rounded first feature of each frame
    Mat p(frames.rows(), 4);
    for (std::size_t t = 0; t < frames.rows(); ++t) p(t, static_cast<std::size_t>(frames(t, 0))) = 1.0;
    return p;
  }
  std::size_t num_classes() const override { return 4; }
};

features::FeatureSequence seq_of(int value, std::optional<corpus::DisorderLabel> label) {
  features::FeatureSequence s;
  s.frames = Mat(3, 26);
  for (std::size_t t = 0; t < 3; ++t) s.frames(t, 0) = value;
  s.label = label;
  return s;
}

TEST(Evaluate, ScoresUtterances) {
  using L = corpus::DisorderLabel;
  const std::vector<features::FeatureSequence> data{seq_of(0, L::FD), seq_of(1, L::Neoplasm),
                                                    seq_of(1, L::Phonotrauma), seq_of(3, L::VocalPalsy)};
  const FixedClassifier clf;
  EXPECT_EQ(predict_utterance(clf, data[2]), 1);
  const auto r = evaluate(clf, data);
  EXPECT_EQ(r.predictions, (std::vector<int>{0, 1, 1, 3}));
  EXPECT_DOUBLE_EQ(r.accuracy, 75.0);
  EXPECT_DOUBLE_EQ(r.uar, 75.0);
  EXPECT_EQ(r.confusion.at(2, 1), 1u);

  auto unlabeled = data;
  unlabeled[1].label.reset();
  EXPECT_EQ(code_of([&] { evaluate(clf, unlabeled); }), ErrorCode::UnlabeledSequence);
  EXPECT_EQ(code_of([&] { evaluate(clf, std::vector<features::FeatureSequence>{}); }), ErrorCode::EmptyInput);
}

TEST(Report, JsonAndTable) {
  const ConfusionMatrix cm(4, {4, 0, 0, 0, 1, 2, 1, 0, 0, 0, 0, 0, 1, 0, 0, 3});
  const auto r = make_report(cm);
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["classes"], 4);
  EXPECT_DOUBLE_EQ(j["sensitivity.fd"].get<double>(), 100.0);
  EXPECT_TRUE(j["sensitivity.phonotrauma"].is_null());
  EXPECT_DOUBLE_EQ(j["uar"].get<double>(), 75.0);
  EXPECT_EQ(j["confusion"].size(), 16u);
  EXPECT_EQ(j["warnings"].size(), 1u);
  const auto table = report_table(r);
  EXPECT_NE(table.find("n/a"), std::string::npos);
  EXPECT_NE(table.find("vocalpalsy"), std::string::npos);
  EXPECT_EQ(class_name(2, 3), "class2");
}

TEST(Folds, MeanAndSampleStd) {
  std::vector<EvalReport> reports(3);
  const double acc[] = {70, 80, 90}, u[] = {60, 60, 90};
  for (int i = 0; i < 3; ++i) {
    reports[i].accuracy = acc[i];
    reports[i].uar = u[i];
  }
  const auto s = summarize_folds(reports);
  EXPECT_EQ(s.folds, 3u);
  EXPECT_DOUBLE_EQ(s.accuracy_mean, 80.0);
  EXPECT_DOUBLE_EQ(s.accuracy_std, 10.0);
  EXPECT_DOUBLE_EQ(s.uar_mean, 70.0);
  EXPECT_NEAR(s.uar_std, std::sqrt(300.0), 1e-12);
  const auto j = nlohmann::json::parse(summary_json(s));
  EXPECT_EQ(j["folds"], 3);
  EXPECT_THROW(summarize_folds(std::span<const EvalReport>{}), Error);
}

}  // namespace
}  // namespace vocalis::eval
