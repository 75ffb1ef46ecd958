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
#include <span>
#include <vector>

#include "vocalis/classifier.hpp"
#include "vocalis/features.hpp"
#include "vocalis/tensor.hpp"

namespace vocalis::forest {

struct ForestConfig {
  std::size_t trees = 26;
  /// Features considered per split; 0 means floor(sqrt(d)).
  std::size_t max_features = 0;
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// A split node routes x[feature] <= threshold to `left`, otherwise `right`.
/// Leaves (feature == -1) keep their per-class training counts.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> class_counts;

  bool is_leaf() const { return feature < 0; }
  /// argmax of class_counts; ties go to the lowest class code.
  int majority() const;
};

/// Nodes stored depth-first (pre-order); node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;
  std::uint64_t seed = 0;

  const TreeNode& leaf_for(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return leaf_for(x).majority(); }
};

class Forest final : public FrameClassifier {
 public:
  Forest() = default;
  Forest(std::vector<Tree> trees, std::size_t n_classes, std::size_t n_features);

  /// Vote fractions: each tree votes its leaf's majority class.
  std::vector<double> predict_frame(std::span<const double> frame) const;
  tensor::Mat frame_probabilities(const tensor::Mat& frames) const override;
  std::size_t num_classes() const override { return n_classes_; }
  std::size_t num_features() const { return n_features_; }

  const std::vector<Tree>& trees() const { return trees_; }
  std::vector<Tree>& trees() { return trees_; }

  /// Indices of training rows left out of each tree's bootstrap sample.
  const std::vector<std::vector<std::uint32_t>>& out_of_bag() const { return oob_; }
  void set_out_of_bag(std::vector<std::vector<std::uint32_t>> oob) { oob_ = std::move(oob); }

 private:
  std::vector<Tree> trees_;
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<std::vector<std::uint32_t>> oob_;
};

/// 1 - sum (k_i / n)^2; 0 for an empty count vector.
double gini(std::span<const std::uint32_t> counts);

/// Bootstrap-sampled, unpruned CART trees grown to purity (or min_leaf),
/// each split minimizing weighted Gini impurity over `max_features` randomly
/// chosen features. Ties go to the lowest feature index, then the lowest
/// threshold.
Forest fit(const tensor::Mat& frames, std::span<const int> labels, std::size_t n_classes,
           const ForestConfig& config);

/// Frame-level fit over labeled feature sequences.
Forest fit(std::span<const features::FeatureSequence> dataset, const ForestConfig& config,
           std::size_t n_classes = 4);

/// Fraction of training rows predicted correctly by trees that did not see them.
double out_of_bag_accuracy(const Forest& forest, const tensor::Mat& frames, std::span<const int> labels);

// Binary container "VOCFRST1"; nodes written depth-first. See docs/formats.md.
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace vocalis::forest
