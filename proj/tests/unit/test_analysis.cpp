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

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "support/test_support.hpp"
#include "vocalis/analysis.hpp"
#include "vocalis/error.hpp"

namespace vocalis::analysis {
namespace {

using tensor::Mat;
using testing::random_mat;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "nothing thrown";
  return ErrorCode::InvalidArgument;
}

// Correlated Gaussian cloud: z ~ N(0, I) times a random mixing matrix.
Mat cloud(std::size_t n, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  const auto z = random_mat(n, h, rng);
  const auto mix = random_mat(h, h, rng);
  auto x = tensor::matmul(z, mix);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < h; ++c) x(r, c) += static_cast<double>(c);
  return x;
}

TEST(TimeAverage, ColumnMeans) {
  const Mat h(3, 2, {1, 10, 2, 20, 6, 30});
  EXPECT_EQ(time_average(h), (std::vector<double>{3, 20}));
  EXPECT_EQ(code_of([] { time_average(Mat(0, 2)); }), ErrorCode::EmptyInput);
}

TEST(Jacobi, KnownTwoByTwo) {
  const auto e = jacobi_eigen(Mat(2, 2, {2, 1, 1, 2}));
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(e.vectors(0, 0), e.vectors(0, 1), 1e-14);
}

TEST(Jacobi, RandomSymmetricDecomposition) {
  Rng rng(1);
  for (std::size_t n : {1u, 3u, 8u, 20u}) {
    const auto a0 = random_mat(n, n, rng);
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = a0(i, j) + a0(j, i);
    const auto e = jacobi_eigen(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) EXPECT_LE(e.values[k], e.values[k - 1]);
      for (std::size_t i = 0; i < n; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < n; ++j) av += a(i, j) * e.vectors(k, j);
        EXPECT_NEAR(av, e.values[k] * e.vectors(k, i), 1e-10);
      }
      for (std::size_t l = 0; l < n; ++l) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += e.vectors(k, j) * e.vectors(l, j);
        EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-12);
      }
    }
  }
}

TEST(Covariance, MatchesDirectSum) {
  const Mat x(4, 2, {1, 2, 3, 6, 5, 4, 7, 0});
  const std::vector<double> mean{4, 3};
  const auto c = covariance(x, mean);
  // deviations: (-3,-1) (-1,3) (1,1) (3,-3)
  EXPECT_NEAR(c(0, 0), 20.0 / 3.0, 1e-14);
  EXPECT_NEAR(c(1, 1), 20.0 / 3.0, 1e-14);
  EXPECT_NEAR(c(0, 1), (3.0 - 3.0 + 1.0 - 9.0) / 3.0, 1e-14);
  EXPECT_EQ(c(0, 1), c(1, 0));
}

TEST(Pca, PointsOnALine) {
  const std::vector<double> dir{3.0 / 13.0, 4.0 / 13.0, 12.0 / 13.0};
  Mat x(10, 3);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = 1.0 + static_cast<double>(r) * dir[c];
  const auto m = pca_fit(x, 2);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(m.components(0, c), dir[c], 1e-12);
  // sample variance of 0..9 is 55/6
  EXPECT_NEAR(m.explained[0], 55.0 / 6.0, 1e-10);
  EXPECT_NEAR(m.explained[1], 0.0, 1e-10);
  EXPECT_NEAR(m.total_variance, 55.0 / 6.0, 1e-10);
}

TEST(Pca, IsotropicCloudSharesVarianceEvenly) {
  Rng rng(2);
  const auto x = random_mat(20000, 4, rng);
  const auto m = pca_fit(x, 4);
  for (double v : m.explained) EXPECT_NEAR(v / m.total_variance, 0.25, 0.02);
}

TEST(Pca, SignRuleAndOrthonormality) {
  const auto m = pca_fit(cloud(200, 6, 3), 3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < 6; ++c)
      if (std::abs(m.components(k, c)) > std::abs(m.components(k, arg))) arg = c;
    EXPECT_GT(m.components(k, arg), 0.0);
    for (std::size_t l = 0; l < 3; ++l) {
      double dot = 0.0;
      for (std::size_t c = 0; c < 6; ++c) dot += m.components(k, c) * m.components(l, c);
      EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-12);
    }
    if (k > 0) EXPECT_LE(m.explained[k], m.explained[k - 1]);
  }
}

TEST(Pca, ReconstructionErrorIsTheLeftoverVariance) {
  const auto x = cloud(150, 5, 4);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto m = pca_fit(x, k);
    double kept = 0.0;
    for (double v : m.explained) kept += v;
    EXPECT_NEAR(reconstruction_error(m, x), m.total_variance - kept, 1e-9 * m.total_variance);
  }
}

TEST(Pca, ProjectionGeometry) {
  const auto x = cloud(100, 5, 5);
  const auto m = pca_fit(x, 2);
  const auto origin = pca_project(m, m.mean);
  EXPECT_NEAR(origin[0], 0.0, 1e-12);
  EXPECT_NEAR(origin[1], 0.0, 1e-12);
  std::vector<double> shifted(m.mean);
  for (std::size_t c = 0; c < 5; ++c) shifted[c] += m.components(0, c);
  const auto unit = pca_project(m, shifted);
  EXPECT_NEAR(unit[0], 1.0, 1e-12);
  EXPECT_NEAR(unit[1], 0.0, 1e-12);
  const auto batch = pca_project(m, x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto one = pca_project(m, x.row(r));
    EXPECT_EQ(batch(r, 0), one[0]);
    EXPECT_EQ(batch(r, 1), one[1]);
  }
  EXPECT_THROW(pca_project(m, std::vector<double>(4)), Error);
}

TEST(Pca, RefittingTheProjectionGivesTheIdentity) {
  const auto x = cloud(120, 6, 6);
  const auto m = pca_fit(x, 3);
  const auto y = pca_project(m, x);
  const auto again = pca_fit(y, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(again.explained[k], m.explained[k], 1e-9 * m.explained[0]);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(std::abs(again.components(k, c)), k == c ? 1.0 : 0.0, 1e-8);
  }
}

TEST(Pca, RejectsDegenerateInput) {
  EXPECT_EQ(code_of([] { pca_fit(cloud(10, 3, 1), 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { pca_fit(cloud(10, 1, 1), 2); }), ErrorCode::DegenerateData);
  EXPECT_EQ(code_of([] { pca_fit(cloud(2, 3, 1), 2); }), ErrorCode::DegenerateData);
  EXPECT_NO_THROW(pca_fit(cloud(3, 3, 1), 2));
  EXPECT_EQ(code_of([] { pca_fit(Mat(5, 3, 2.0), 2); }), ErrorCode::DegenerateData);
  auto bad = cloud(10, 3, 1);
  bad(2, 1) = std::nan("");
  EXPECT_EQ(code_of([&] { pca_fit(bad, 2); }), ErrorCode::NumericFailure);
}

TEST(UtteranceFeatures, TimeAveragedHiddenStates) {
  nets::ArchSpec spec;
  spec.kind = nets::ArchKind::GRU;
  spec.hidden = {4};
  const nets::SequenceModel model(spec, 3);
  Rng rng(7);
  std::vector<features::FeatureSequence> seqs(3);
  for (std::size_t i = 0; i < 3; ++i) {
    seqs[i].frames = random_mat(5 + i, 26, rng);
    seqs[i].speaker_id = "spk" + std::to_string(i);
    seqs[i].label = corpus::DisorderLabel::Neoplasm;
  }
  const auto feats = utterance_features(model, seqs);
  ASSERT_EQ(feats.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(feats[i].values, time_average(model.hidden_features(seqs[i].frames)));
    EXPECT_EQ(feats[i].id, seqs[i].speaker_id);
    EXPECT_EQ(feats[i].label, seqs[i].label);
  }
  const auto s = stack(feats);
  EXPECT_EQ(s.rows(), 3u);
  EXPECT_EQ(s.cols(), 4u);
  EXPECT_EQ(s(1, 2), feats[1].values[2]);
}

TEST(Scatter, WritesPointsAndVariance) {
  testing::TempDir dir("pca");
  Rng rng(8);
  std::vector<UtteranceFeature> feats(6);
  for (std::size_t i = 0; i < 6; ++i) {
    feats[i].values = {rng.normal(), rng.normal(), rng.normal()};
    feats[i].id = "u" + std::to_string(i);
    feats[i].label = corpus::DisorderLabel::FD;
  }
  const auto m = pca_fit(feats, 2);
  write_scatter(dir / "pca.csv", m, feats);
  std::ifstream in(dir / "pca.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "utterance_id,label,pc1,pc2");
  EXPECT_EQ(first.rfind("u0,fd,", 0), 0u);
  std::ifstream var(dir / "pca.csv.variance.csv");
  std::string line;
  int rows = 0;
  while (std::getline(var, line)) ++rows;
  EXPECT_EQ(rows, 4);  // header, two components, total
}

}  // namespace
}  // namespace vocalis::analysis
