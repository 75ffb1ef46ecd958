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
#include <vector>

#include "vocalis/corpus.hpp"

namespace vocalis::vad {

/// Statistical-model voice activity detector (two Gaussian hypotheses per
/// spectral bin, decision-directed prior SNR with the MMSE-STSA gain).
struct VadConfig {
  /// Speech-presence probability a frame must exceed to count as speech.
  double threshold = 0.9;
  double frame_len_s = 0.032;
  double hop_s = 0.016;
  int noise_init_frames = 6;
  /// Decision-directed smoothing of the prior SNR.
  double dd_alpha = 0.98;
  /// Lower clamp on the posterior and prior SNR.
  double snr_floor = 1e-3;
  /// Noise PSD recursion weight applied on noise-update frames.
  double noise_smoothing = 0.95;
  /// The noise PSD is only updated on frames whose speech probability is at
  /// or below this value. Independent of `threshold`, so the SNR track does
  /// not depend on the decision threshold.
  double noise_update_threshold = 0.5;

  void validate() const;
};

/// Per-frame booleans on the analysis grid; true = speech.
struct VadMask {
  std::vector<bool> speech;

  std::size_t size() const { return speech.size(); }
  std::size_t count() const;
};

using Spectrogram = std::vector<std::vector<double>>;  // frames x bins

struct SnrEstimate {
  Spectrogram prior;      // xi
  Spectrogram posterior;  // gamma
  Spectrogram noise_psd;  // lambda used for each frame
  std::vector<double> frame_log_lr;  // mean over bins of the per-bin log LR
};

/// Frame length and hop in samples, rounded from the configured durations.
std::size_t frame_length(int sample_rate, const VadConfig& config);
std::size_t hop_length(int sample_rate, const VadConfig& config);

/// Hamming-windowed DFT magnitudes, one row per analysis frame.
Spectrogram spectral_magnitudes(const corpus::Waveform& wave, const VadConfig& config);

/// MMSE-STSA gain for prior SNR xi and posterior SNR gamma.
double mmse_stsa_gain(double xi, double gamma);

/// Runs the noise tracker and SNR recursion over noisy magnitudes.
SnrEstimate estimate_snr(const Spectrogram& noisy_mag, const VadConfig& config);

/// Per-bin log likelihood ratio gamma*xi/(1+xi) - log(1+xi).
double bin_log_lr(double xi, double gamma);

/// Speech-presence probability from the frame log LR, equal priors.
double speech_probability(double frame_log_lr);

VadMask mask_from_estimate(const SnrEstimate& estimate, double threshold);

VadMask detect(const corpus::Waveform& wave, const VadConfig& config = {});

}  // namespace vocalis::vad
