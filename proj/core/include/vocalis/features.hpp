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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocalis/corpus.hpp"
#include "vocalis/dsp.hpp"
#include "vocalis/tensor.hpp"
#include "vocalis/vad.hpp"

namespace vocalis::features {

inline constexpr std::size_t kNumMelFilters = 26;
inline constexpr std::size_t kNumCeps = 13;
inline constexpr std::size_t kFeatureDim = 2 * kNumCeps;
inline constexpr double kPreEmphasis = 0.97;
inline constexpr double kLogFloor = 1e-10;
inline constexpr int kDeltaWindow = 2;

/// 32 ms frames every 16 ms at the file's native rate, Hamming windowed.
struct FrameGrid {
  int sample_rate = 16000;
  std::size_t frame_len = 512;
  std::size_t hop = 256;
  std::vector<double> window;

  static FrameGrid for_rate(int sample_rate, double frame_s = 0.032, double hop_s = 0.016);
  std::size_t frame_count(std::size_t num_samples) const;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters equally spaced on the mel scale from 0 Hz to fs/2,
/// evaluated at the DFT bin frequencies k * fs / frame_len.
struct MelBank {
  std::size_t num_bins = 0;               // frame_len / 2 + 1
  std::vector<double> centers_hz;         // kNumMelFilters
  tensor::Mat weights;                    // kNumMelFilters x num_bins

  static MelBank make(int sample_rate, std::size_t frame_len,
                      std::size_t num_filters = kNumMelFilters);
};

/// Orthonormal DCT-II matrix (n x n).
tensor::Mat dct_matrix(std::size_t n);

struct FeatureSequence {
  tensor::Mat frames;  // T x 26: c0..c12 then d0..d12
  std::string speaker_id;
  std::optional<corpus::DisorderLabel> label;
  int sample_rate = 16000;

  std::size_t length() const { return frames.rows(); }
};

/// Selects the speech frames of `wave` in temporal order, pre-emphasizes each
/// (first sample unchanged) and applies the Hamming window.
std::vector<std::vector<double>> frame_signal(std::span<const double> samples,
                                              const FrameGrid& grid, const vad::VadMask& mask);

/// Static MFCC of one windowed frame. Holds the DFT plan and filterbank.
class MfccComputer {
 public:
  MfccComputer(int sample_rate, std::size_t frame_len);

  std::vector<double> power_spectrum(std::span<const double> frame) const;
  std::vector<double> log_mel_energies(std::span<const double> frame) const;
  std::vector<double> mfcc(std::span<const double> frame) const;

  const MelBank& mel_bank() const { return mel_; }
  const tensor::Mat& dct() const { return dct_; }

 private:
  dsp::Fft fft_;
  MelBank mel_;
  tensor::Mat dct_;
};

/// Convenience wrapper building a one-off MfccComputer.
std::vector<double> mfcc_frame(std::span<const double> frame, int sample_rate);

/// Appends regression deltas (window 2, edges clamped): T x 13 -> T x 26.
tensor::Mat add_delta(const tensor::Mat& statics);

/// detect -> frame_signal -> mfcc per frame -> add_delta.
FeatureSequence extract(const corpus::Waveform& wave, const vad::VadConfig& vad_config = {});

// Binary container: "VOCFEAT1" magic, u32 version, u64 T, u32 D, u32 fs,
// then T*D little-endian doubles row-major.
void save_features(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence load_features(const std::filesystem::path& path);
void save_features_csv(const FeatureSequence& seq, const std::filesystem::path& path);

}  // namespace vocalis::features
