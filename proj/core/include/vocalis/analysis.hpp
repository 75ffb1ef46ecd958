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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocalis/corpus.hpp"
#include "vocalis/features.hpp"
#include "vocalis/nets.hpp"
#include "vocalis/tensor.hpp"

namespace vocalis::analysis {

/// Utterance-level representation: the time average of a model's hidden
/// features.
struct UtteranceFeature {
  std::vector<double> values;
  std::optional<corpus::DisorderLabel> label;
  std::string id;
};

/// Column means of a T x H matrix. Throws EmptyInput when T = 0.
std::vector<double> time_average(const tensor::Mat& hidden);

std::vector<UtteranceFeature> utterance_features(const nets::SequenceModel& model,
                                                 std::span<const features::FeatureSequence> sequences);

struct PcaModel {
  std::vector<double> mean;           // H
  tensor::Mat components;             // k x H, orthonormal rows
  std::vector<double> explained;      // k variances, non-increasing
  double total_variance = 0.0;        // trace of the covariance

  std::size_t dims() const { return mean.size(); }
  std::size_t k() const { return components.rows(); }
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues come back in descending order; eigenvectors are the rows of
/// `vectors`.
struct SymmetricEigen {
  std::vector<double> values;
  tensor::Mat vectors;
};
SymmetricEigen jacobi_eigen(const tensor::Mat& symmetric, double tol = 1e-15, int max_sweeps = 100);

/// Sample covariance (n - 1 denominator) of the rows of `data`.
tensor::Mat covariance(const tensor::Mat& data, const std::vector<double>& mean);

/// Fits PCA on the rows of `data` (n x H). Needs n >= k + 1 and H >= k.
/// Components follow the covariance eigenvectors; each is signed so that its
/// largest-magnitude entry is positive. Zero total variance is degenerate.
PcaModel pca_fit(const tensor::Mat& data, std::size_t k = 2);
PcaModel pca_fit(std::span<const UtteranceFeature> features, std::size_t k = 2);

std::vector<double> pca_project(const PcaModel& model, std::span<const double> x);
/// Row-wise projection, n x k.
tensor::Mat pca_project(const PcaModel& model, const tensor::Mat& data);

/// Mean squared reconstruction error, normalized like the covariance
/// (sum over samples / (n - 1)).
double reconstruction_error(const PcaModel& model, const tensor::Mat& data);

tensor::Mat stack(std::span<const UtteranceFeature> features);

/// Writes `utterance_id,label,pc1,pc2,...` and a sidecar
/// `<path>.variance.csv` with `component,explained_variance,ratio`.
void write_scatter(const std::filesystem::path& path, const PcaModel& model,
                   std::span<const UtteranceFeature> features);

}  // namespace vocalis::analysis
