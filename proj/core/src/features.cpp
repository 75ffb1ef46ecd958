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

#include "vocalis/features.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "binio.hpp"
#include "vocalis/error.hpp"

namespace vocalis::features {

FrameGrid FrameGrid::for_rate(int sample_rate, double frame_s, double hop_s) {
  FrameGrid grid;
  grid.sample_rate = sample_rate;
  grid.frame_len = static_cast<std::size_t>(std::lround(frame_s * sample_rate));
  grid.hop = static_cast<std::size_t>(std::lround(hop_s * sample_rate));
  if (!(grid.frame_len > grid.hop && grid.hop > 0))
    throw Error(ErrorCode::InvalidArgument, "frame length must exceed hop");
  grid.window = dsp::hamming(grid.frame_len);
  return grid;
}

std::size_t FrameGrid::frame_count(std::size_t num_samples) const {
  return dsp::frame_count(num_samples, frame_len, hop);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelBank MelBank::make(int sample_rate, std::size_t frame_len, std::size_t num_filters) {
  MelBank bank;
  bank.num_bins = frame_len / 2 + 1;
  const double nyquist = 0.5 * sample_rate;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(num_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(num_filters + 1));
  bank.centers_hz.assign(edges.begin() + 1, edges.end() - 1);
  bank.weights = tensor::Mat(num_filters, bank.num_bins);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(frame_len);
  for (std::size_t m = 0; m < num_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bank.num_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      bank.weights(m, k) = w;
    }
  }
  return bank;
}

tensor::Mat dct_matrix(std::size_t n) {
  tensor::Mat d(n, n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
    for (std::size_t m = 0; m < n; ++m)
      d(k, m) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (static_cast<double>(m) + 0.5) / nn);
  }
  return d;
}

std::vector<std::vector<double>> frame_signal(std::span<const double> samples,
                                              const FrameGrid& grid, const vad::VadMask& mask) {
  const std::size_t frames = grid.frame_count(samples.size());
  if (mask.size() != frames)
    throw Error(ErrorCode::ShapeMismatch, "VAD mask length " + std::to_string(mask.size()) +
                                              " vs " + std::to_string(frames) + " frames");
  if (mask.count() == 0) throw Error(ErrorCode::NoSpeechDetected, "no speech frames");
  std::vector<std::vector<double>> out;
  out.reserve(mask.count());
  for (std::size_t f = 0; f < frames; ++f) {
    if (!mask.speech[f]) continue;
    const double* src = samples.data() + f * grid.hop;
    std::vector<double> frame(grid.frame_len);
    frame[0] = src[0] * grid.window[0];
    for (std::size_t t = 1; t < grid.frame_len; ++t)
      frame[t] = (src[t] - kPreEmphasis * src[t - 1]) * grid.window[t];
    out.push_back(std::move(frame));
  }
  return out;
}

MfccComputer::MfccComputer(int sample_rate, std::size_t frame_len)
    : fft_(frame_len), mel_(MelBank::make(sample_rate, frame_len)), dct_(dct_matrix(kNumMelFilters)) {}

std::vector<double> MfccComputer::power_spectrum(std::span<const double> frame) const {
  return dsp::power_spectrum(fft_, frame);
}

std::vector<double> MfccComputer::log_mel_energies(std::span<const double> frame) const {
  const auto power = power_spectrum(frame);
  std::vector<double> energies(kNumMelFilters);
  for (std::size_t m = 0; m < kNumMelFilters; ++m) {
    const auto w = mel_.weights.row(m);
    double e = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) e += w[k] * power[k];
    energies[m] = std::log(e + kLogFloor);
  }
  return energies;
}

std::vector<double> MfccComputer::mfcc(std::span<const double> frame) const {
  const auto energies = log_mel_energies(frame);
  std::vector<double> ceps(kNumCeps, 0.0);
  for (std::size_t k = 0; k < kNumCeps; ++k) {
    const auto d = dct_.row(k);
    double acc = 0.0;
    for (std::size_t m = 0; m < kNumMelFilters; ++m) acc += d[m] * energies[m];
    ceps[k] = acc;
  }
  return ceps;
}

std::vector<double> mfcc_frame(std::span<const double> frame, int sample_rate) {
  return MfccComputer(sample_rate, frame.size()).mfcc(frame);
}

tensor::Mat add_delta(const tensor::Mat& statics) {
  const std::size_t frames = statics.rows();
  const std::size_t dim = statics.cols();
  if (frames == 0) throw Error(ErrorCode::EmptyInput, "add_delta on empty sequence");
  double denom = 0.0;
  for (int m = 1; m <= kDeltaWindow; ++m) denom += 2.0 * m * m;
  tensor::Mat out(frames, 2 * dim);
  const auto last = static_cast<long>(frames) - 1;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < dim; ++c) out(t, c) = statics(t, c);
    for (std::size_t c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (int m = 1; m <= kDeltaWindow; ++m) {
        const auto ahead = static_cast<std::size_t>(std::min<long>(static_cast<long>(t) + m, last));
        const auto behind = static_cast<std::size_t>(std::max<long>(static_cast<long>(t) - m, 0));
        acc += m * (statics(ahead, c) - statics(behind, c));
      }
      out(t, dim + c) = acc / denom;
    }
  }
  return out;
}

FeatureSequence extract(const corpus::Waveform& wave, const vad::VadConfig& vad_config) {
  const auto grid = FrameGrid::for_rate(wave.sample_rate, vad_config.frame_len_s, vad_config.hop_s);
  if (grid.frame_count(wave.samples.size()) == 0)
    throw Error(ErrorCode::EmptyInput, "waveform shorter than one frame");
  const auto mask = vad::detect(wave, vad_config);
  const auto frames = frame_signal(wave.samples, grid, mask);

  const MfccComputer mfcc(wave.sample_rate, grid.frame_len);
  tensor::Mat statics(frames.size(), kNumCeps);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto c = mfcc.mfcc(frames[t]);
    std::copy(c.begin(), c.end(), statics.row(t).begin());
  }
  FeatureSequence seq;
  seq.frames = add_delta(statics);
  seq.speaker_id = wave.speaker_id;
  seq.label = wave.label;
  seq.sample_rate = wave.sample_rate;
  if (!tensor::all_finite(seq.frames))
    throw Error(ErrorCode::NumericFailure, "non-finite MFCC for speaker " + wave.speaker_id);
  return seq;
}

namespace {
constexpr std::string_view kFeatMagic = "VOCFEAT1";
constexpr std::uint32_t kFeatVersion = 1;
}  // namespace

void save_features(const FeatureSequence& seq, const std::filesystem::path& path) {
  binio::Writer w(path);
  w.magic(kFeatMagic);
  w.u32(kFeatVersion);
  w.u64(seq.frames.rows());
  w.u32(static_cast<std::uint32_t>(seq.frames.cols()));
  w.u32(static_cast<std::uint32_t>(seq.sample_rate));
  w.f64s(seq.frames.storage());
  w.finish();
}

FeatureSequence load_features(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic(kFeatMagic);
  if (r.u32() != kFeatVersion) throw Error(ErrorCode::BadFormat, path.string() + ": version");
  const auto rows = r.u64();
  const auto cols = r.u32();
  FeatureSequence seq;
  seq.sample_rate = static_cast<int>(r.u32());
  if (cols != kFeatureDim || rows == 0 || rows > (1u << 24))
    throw Error(ErrorCode::BadFormat, path.string() + ": bad shape");
  seq.frames = tensor::Mat(rows, cols);
  r.f64s({seq.frames.data(), seq.frames.size()});
  return seq;
}

void save_features_csv(const FeatureSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
  for (std::size_t c = 0; c < kNumCeps; ++c) out << (c ? "," : "") << 'c' << c;
  for (std::size_t c = 0; c < kNumCeps; ++c) out << ",d" << c;
  out << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < seq.frames.rows(); ++t) {
    const auto row = seq.frames.row(t);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

}  // namespace vocalis::features
