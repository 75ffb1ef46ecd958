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

#include "vocalis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "vocalis/error.hpp"

namespace vocalis::analysis {

using tensor::Mat;

std::vector<double> time_average(const Mat& hidden) {
  if (hidden.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot average an empty sequence");
  std::vector<double> mean(hidden.cols(), 0.0);
  for (std::size_t t = 0; t < hidden.rows(); ++t) {
    const auto row = hidden.row(t);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(hidden.rows());
  return mean;
}

std::vector<UtteranceFeature> utterance_features(const nets::SequenceModel& model,
                                                 std::span<const features::FeatureSequence> sequences) {
  std::vector<UtteranceFeature> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    if (seq.frames.rows() == 0) throw Error(ErrorCode::EmptyInput, seq.speaker_id + ": empty sequence");
    out.push_back({time_average(model.hidden_features(seq.frames)), seq.label, seq.speaker_id});
  }
  return out;
}

SymmetricEigen jacobi_eigen(const Mat& symmetric, double tol, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorCode::ShapeMismatch, "eigen decomposition needs a square matrix");
  Mat a = symmetric;
  Mat v = Mat::identity(n);  // columns are eigenvectors while iterating
  double scale = 0.0;
  for (double x : a.storage()) scale += x * x;
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * std::max(scale, 1e-300)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p, q) (Golub & Van Loan, sym.schur2).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!tensor::all_finite(a)) throw Error(ErrorCode::NumericFailure, "eigen decomposition diverged");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.vectors = Mat(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    out.values.push_back(a(order[r], order[r]));
    for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, order[r]);
  }
  return out;
}

Mat covariance(const Mat& data, const std::vector<double>& mean) {
  const std::size_t n = data.rows(), h = data.cols();
  if (n < 2) throw Error(ErrorCode::DegenerateData, "covariance needs at least two samples");
  Mat cov(h, h);
  std::vector<double> d(h);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < h; ++j) d[j] = row[j] - mean[j];
    for (std::size_t p = 0; p < h; ++p)
      for (std::size_t q = p; q < h; ++q) cov(p, q) += d[p] * d[q];
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t p = 0; p < h; ++p)
    for (std::size_t q = p; q < h; ++q) {
      cov(p, q) /= denom;
      cov(q, p) = cov(p, q);
    }
  return cov;
}

PcaModel pca_fit(const Mat& data, std::size_t k) {
  const std::size_t n = data.rows(), h = data.cols();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (h < k) throw Error(ErrorCode::DegenerateData, "feature dimension smaller than k");
  if (n < k + 1) throw Error(ErrorCode::DegenerateData, "need at least k + 1 samples");
  if (!tensor::all_finite(data)) throw Error(ErrorCode::NumericFailure, "non-finite PCA input");

  PcaModel model;
  model.mean.assign(h, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < h; ++j) model.mean[j] += row[j];
  }
  for (auto& m : model.mean) m /= static_cast<double>(n);

  const Mat cov = covariance(data, model.mean);
  for (std::size_t j = 0; j < h; ++j) model.total_variance += cov(j, j);
  if (!(model.total_variance > 0.0)) throw Error(ErrorCode::DegenerateData, "data has zero variance");

  const auto eig = jacobi_eigen(cov);
  model.components = Mat(k, h);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < h; ++j)
      if (std::abs(eig.vectors(r, j)) > std::abs(eig.vectors(r, arg))) arg = j;
    const double sign = eig.vectors(r, arg) < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < h; ++j) model.components(r, j) = sign * eig.vectors(r, j);
    // Round-off can leave tiny negative eigenvalues for rank-deficient data.
    model.explained.push_back(std::max(eig.values[r], 0.0));
  }
  return model;
}

Mat stack(std::span<const UtteranceFeature> features) {
  if (features.empty()) throw Error(ErrorCode::EmptyInput, "no utterance features");
  const std::size_t h = features.front().values.size();
  Mat data(features.size(), h);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != h) throw Error(ErrorCode::ShapeMismatch, "utterance feature sizes differ");
    std::copy(features[i].values.begin(), features[i].values.end(), data.row(i).begin());
  }
  return data;
}

PcaModel pca_fit(std::span<const UtteranceFeature> features, std::size_t k) { return pca_fit(stack(features), k); }

std::vector<double> pca_project(const PcaModel& model, std::span<const double> x) {
  if (x.size() != model.dims()) throw Error(ErrorCode::ShapeMismatch, "projection dimension mismatch");
  std::vector<double> out(model.k(), 0.0);
  for (std::size_t r = 0; r < model.k(); ++r) {
    const auto comp = model.components.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) out[r] += (x[j] - model.mean[j]) * comp[j];
  }
  return out;
}

Mat pca_project(const PcaModel& model, const Mat& data) {
  if (data.cols() != model.dims()) throw Error(ErrorCode::ShapeMismatch, "projection dimension mismatch");
  Mat out(data.rows(), model.k());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto p = pca_project(model, data.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

double reconstruction_error(const PcaModel& model, const Mat& data) {
  if (data.rows() < 2) throw Error(ErrorCode::DegenerateData, "need at least two samples");
  const Mat z = pca_project(model, data);
  double err = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < model.dims(); ++j) {
      double rec = model.mean[j];
      for (std::size_t r = 0; r < model.k(); ++r) rec += z(i, r) * model.components(r, j);
      err += (row[j] - rec) * (row[j] - rec);
    }
  }
  return err / static_cast<double>(data.rows() - 1);
}

void write_scatter(const std::filesystem::path& path, const PcaModel& model,
                   std::span<const UtteranceFeature> features) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnwritableOutput, "cannot write " + path.string());
  out << std::setprecision(17) << "utterance_id,label";
  for (std::size_t r = 0; r < model.k(); ++r) out << ",pc" << r + 1;
  out << '\n';
  for (const auto& f : features) {
    out << f.id << ',' << (f.label ? std::string(corpus::label_name(*f.label)) : std::string());
    for (double v : pca_project(model, f.values)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::UnwritableOutput, "write failed: " + path.string());

  const auto side = path.string() + ".variance.csv";
  std::ofstream var(side);
  if (!var) throw Error(ErrorCode::UnwritableOutput, "cannot write " + side);
  var << std::setprecision(17) << "component,explained_variance,ratio\n";
  for (std::size_t r = 0; r < model.k(); ++r)
    var << "pc" << r + 1 << ',' << model.explained[r] << ',' << model.explained[r] / model.total_variance << '\n';
  var << "total," << model.total_variance << ",1\n";
}

}  // namespace vocalis::analysis
