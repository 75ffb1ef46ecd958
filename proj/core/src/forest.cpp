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

#include "vocalis/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binio.hpp"
#include "vocalis/error.hpp"
#include "vocalis/rng.hpp"

namespace vocalis::forest {

using tensor::Mat;

void ForestConfig::validate() const {
  if (trees == 0) throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree");
  if (min_leaf == 0) throw Error(ErrorCode::InvalidArgument, "min_leaf must be >= 1");
}

int TreeNode::majority() const {
  int best = 0;
  for (std::size_t k = 1; k < class_counts.size(); ++k)
    if (class_counts[k] > class_counts[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  return best;
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i];
}

Forest::Forest(std::vector<Tree> trees, std::size_t n_classes, std::size_t n_features)
    : trees_(std::move(trees)), n_classes_(n_classes), n_features_(n_features) {}

std::vector<double> Forest::predict_frame(std::span<const double> frame) const {
  if (frame.size() != n_features_) throw Error(ErrorCode::ShapeMismatch, "forest frame width");
  std::vector<double> votes(n_classes_, 0.0);
  for (const auto& tree : trees_) votes[static_cast<std::size_t>(tree.predict(frame))] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(trees_.size());
  return votes;
}

Mat Forest::frame_probabilities(const Mat& frames) const {
  if (frames.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty feature sequence");
  Mat out(frames.rows(), n_classes_);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    const auto p = predict_frame(frames.row(t));
    std::copy(p.begin(), p.end(), out.row(t).begin());
  }
  return out;
}

double gini(std::span<const std::uint32_t> counts) {
  double n = 0.0;
  for (auto c : counts) n += c;
  if (n == 0.0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) sum_sq += (c / n) * (c / n);
  return 1.0 - sum_sq;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Mat& x, std::span<const int> y, std::size_t classes, std::size_t max_features,
              std::size_t min_leaf, Rng& rng)
      : x_(x), y_(y), classes_(classes), max_features_(max_features), min_leaf_(min_leaf), rng_(rng) {}

  std::int32_t build(std::vector<std::uint32_t>& rows, Tree& tree) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::vector<std::uint32_t> counts(classes_, 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(y_[r])];
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;

    Split split;
    if (!pure && rows.size() >= 2 * min_leaf_) split = best_split(rows, counts);
    if (split.feature < 0) {
      tree.nodes[static_cast<std::size_t>(id)].class_counts = std::move(counts);
      return id;
    }
    std::vector<std::uint32_t> left, right;
    for (auto r : rows) (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = build(left, tree);
    const auto rgt = build(right, tree);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

 private:
  Split best_split(const std::vector<std::uint32_t>& rows, const std::vector<std::uint32_t>& counts) {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    const std::size_t k = std::min(max_features_, d);
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(features[i], features[j]);
    }
    std::vector<std::size_t> chosen(features.begin(), features.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());
    Split best = search(rows, counts, chosen);
    if (best.feature < 0) {
      // every sampled feature is constant here: fall back to the rest
      std::vector<std::size_t> rest(features.begin() + static_cast<long>(k), features.end());
      std::sort(rest.begin(), rest.end());
      best = search(rows, counts, rest);
    }
    return best;
  }

  Split search(const std::vector<std::uint32_t>& rows, const std::vector<std::uint32_t>& counts,
               const std::vector<std::size_t>& features) {
    Split best;
    const std::size_t n = rows.size();
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::uint32_t> left(classes_), right(classes_);
    for (const std::size_t f : features) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        ++left[c];
        --right[c];
        const std::size_t nl = i + 1, nr = n - nl;
        if (column[i].first == column[i + 1].first) continue;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double impurity = (static_cast<double>(nl) * gini(left) + static_cast<double>(nr) * gini(right)) /
                                static_cast<double>(n);
        if (best.feature < 0 || impurity < best.impurity) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          // midpoint can round onto the upper value for adjacent doubles
          if (!(best.threshold < column[i + 1].first)) best.threshold = column[i].first;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const Mat& x_;
  std::span<const int> y_;
  std::size_t classes_;
  std::size_t max_features_;
  std::size_t min_leaf_;
  Rng& rng_;
};

}  // namespace

Forest fit(const Mat& frames, std::span<const int> labels, std::size_t n_classes, const ForestConfig& config) {
  config.validate();
  const std::size_t n = frames.rows();
  if (n < 2) throw Error(ErrorCode::EmptyInput, "forest needs at least two samples");
  if (labels.size() != n) throw Error(ErrorCode::ShapeMismatch, "one label per frame");
  std::set<int> present;
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y));
    present.insert(y);
  }
  if (present.size() < 2) throw Error(ErrorCode::SingleClassDataset, "forest data has one class");

  const std::size_t max_features =
      config.max_features > 0 ? config.max_features
                              : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(frames.cols()))));
  Rng master(config.seed);
  std::vector<Tree> trees(config.trees);
  std::vector<std::vector<std::uint32_t>> oob(config.trees);
  for (std::size_t t = 0; t < config.trees; ++t) {
    trees[t].seed = master.next_u64();
    Rng rng(trees[t].seed);
    std::vector<std::uint32_t> rows(n);
    std::vector<bool> drawn(n, false);
    for (auto& r : rows) {
      r = static_cast<std::uint32_t>(rng.below(n));
      drawn[r] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!drawn[i]) oob[t].push_back(static_cast<std::uint32_t>(i));
    TreeBuilder builder(frames, labels, n_classes, max_features, config.min_leaf, rng);
    builder.build(rows, trees[t]);
  }
  Forest forest(std::move(trees), n_classes, frames.cols());
  forest.set_out_of_bag(std::move(oob));
  return forest;
}

Forest fit(std::span<const features::FeatureSequence> dataset, const ForestConfig& config, std::size_t n_classes) {
  std::size_t total = 0;
  for (const auto& s : dataset) {
    if (!s.label) throw Error(ErrorCode::UnlabeledSequence, s.speaker_id + " has no label");
    total += s.frames.rows();
  }
  if (dataset.empty() || total == 0) throw Error(ErrorCode::EmptyInput, "empty training set");
  const std::size_t d = dataset.front().frames.cols();
  Mat x(total, d);
  std::vector<int> y(total);
  std::size_t row = 0;
  for (const auto& s : dataset) {
    if (s.frames.cols() != d) throw Error(ErrorCode::ShapeMismatch, "feature width");
    for (std::size_t t = 0; t < s.frames.rows(); ++t, ++row) {
      const auto src = s.frames.row(t);
      std::copy(src.begin(), src.end(), x.row(row).begin());
      y[row] = corpus::code(*s.label);
    }
  }
  return fit(x, y, n_classes, config);
}

double out_of_bag_accuracy(const Forest& forest, const Mat& frames, std::span<const int> labels) {
  const auto& oob = forest.out_of_bag();
  if (oob.size() != forest.trees().size()) throw Error(ErrorCode::InvalidArgument, "forest has no OOB data");
  std::vector<std::vector<double>> votes(frames.rows(), std::vector<double>(forest.num_classes(), 0.0));
  for (std::size_t t = 0; t < oob.size(); ++t)
    for (auto r : oob[t]) votes[r][static_cast<std::size_t>(forest.trees()[t].predict(frames.row(r)))] += 1.0;
  std::size_t correct = 0, scored = 0;
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    const auto& v = votes[r];
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) continue;
    ++scored;
    const auto best = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    if (best == labels[r]) ++correct;
  }
  return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

namespace {
constexpr std::string_view kForestMagic = "VOCFRST1";
constexpr std::uint32_t kForestVersion = 1;
}  // namespace

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  binio::Writer w(path);
  w.magic(kForestMagic);
  w.u32(kForestVersion);
  w.u32(static_cast<std::uint32_t>(forest.num_classes()));
  w.u32(static_cast<std::uint32_t>(forest.num_features()));
  w.u32(static_cast<std::uint32_t>(forest.trees().size()));
  for (const auto& tree : forest.trees()) {
    w.u64(tree.seed);
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      w.i32(node.feature);
      if (node.is_leaf()) {
        for (auto c : node.class_counts) w.u32(c);
      } else {
        w.f64(node.threshold);
        w.i32(node.left);
        w.i32(node.right);
      }
    }
  }
  w.finish();
}

Forest load_forest(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic(kForestMagic);
  if (r.u32() != kForestVersion) throw Error(ErrorCode::BadFormat, path.string() + ": forest version");
  const auto classes = r.u32();
  const auto features = r.u32();
  const auto count = r.u32();
  if (classes < 2 || classes > 1024 || features == 0 || count == 0)
    throw Error(ErrorCode::BadFormat, path.string() + ": forest header");
  std::vector<Tree> trees(count);
  for (auto& tree : trees) {
    tree.seed = r.u64();
    const auto nodes = r.u32();
    tree.nodes.resize(nodes);
    for (std::uint32_t i = 0; i < nodes; ++i) {
      auto& node = tree.nodes[i];
      node.feature = r.i32();
      if (node.feature < 0) {
        node.class_counts.resize(classes);
        for (auto& c : node.class_counts) c = r.u32();
      } else {
        node.threshold = r.f64();
        node.left = r.i32();
        node.right = r.i32();
        if (static_cast<std::uint32_t>(node.feature) >= features || static_cast<std::uint32_t>(node.left) <= i ||
            static_cast<std::uint32_t>(node.right) <= i ||
            static_cast<std::uint32_t>(node.left) >= nodes || static_cast<std::uint32_t>(node.right) >= nodes)
          throw Error(ErrorCode::BadFormat, path.string() + ": corrupt node");
      }
    }
  }
  return Forest(std::move(trees), classes, features);
}

}  // namespace vocalis::forest
