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

#include "vocalis/vad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vocalis/dsp.hpp"
#include "vocalis/error.hpp"

namespace vocalis::vad {

namespace {

// keeps gamma finite for digital silence
constexpr double kNoiseFloor = 1e-20;

}  // namespace

void VadConfig::validate() const {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "VAD threshold must be >= 0");
  if (noise_init_frames < 1) throw Error(ErrorCode::InvalidArgument, "noise_init_frames must be >= 1");
  if (!(dd_alpha > 0.0 && dd_alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "dd_alpha must lie in (0, 1)");
  if (!(snr_floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "snr_floor must be positive");
  if (!(frame_len_s > hop_s && hop_s > 0.0))
    throw Error(ErrorCode::InvalidArgument, "frame length must exceed hop");
}

std::size_t VadMask::count() const {
  return static_cast<std::size_t>(std::count(speech.begin(), speech.end(), true));
}

std::size_t frame_length(int sample_rate, const VadConfig& config) {
  return static_cast<std::size_t>(std::lround(config.frame_len_s * sample_rate));
}

std::size_t hop_length(int sample_rate, const VadConfig& config) {
  return static_cast<std::size_t>(std::lround(config.hop_s * sample_rate));
}

Spectrogram spectral_magnitudes(const corpus::Waveform& wave, const VadConfig& config) {
  const std::size_t len = frame_length(wave.sample_rate, config);
  const std::size_t hop = hop_length(wave.sample_rate, config);
  const std::size_t frames = dsp::frame_count(wave.samples.size(), len, hop);
  if (frames == 0) throw Error(ErrorCode::EmptyInput, "waveform shorter than one frame");

  const dsp::Fft fft(len);
  const auto window = dsp::hamming(len);
  Spectrogram mags(frames);
  std::vector<double> buf(len);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = wave.samples.data() + f * hop;
    for (std::size_t t = 0; t < len; ++t) buf[t] = src[t] * window[t];
    const auto spec = fft.forward(buf);
    auto& row = mags[f];
    row.resize(len / 2 + 1);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = std::abs(spec[k]);
  }
  return mags;
}

double mmse_stsa_gain(double xi, double gamma) {
  const double v = xi * gamma / (1.0 + xi);
  // For large v the exponentially scaled Bessel terms approach the Wiener gain.
  if (v > 500.0) return xi / (1.0 + xi);
  const double half = 0.5 * v;
  const double bessel = std::exp(-half) * ((1.0 + v) * std::cyl_bessel_i(0.0, half) +
                                           v * std::cyl_bessel_i(1.0, half));
  return 0.5 * std::sqrt(std::numbers::pi) * std::sqrt(v) / gamma * bessel;
}

double bin_log_lr(double xi, double gamma) { return gamma * xi / (1.0 + xi) - std::log1p(xi); }

double speech_probability(double frame_log_lr) {
  if (frame_log_lr >= 0.0) return 1.0 / (1.0 + std::exp(-frame_log_lr));
  const double e = std::exp(frame_log_lr);
  return e / (1.0 + e);
}

SnrEstimate estimate_snr(const Spectrogram& noisy_mag, const VadConfig& config) {
  config.validate();
  const std::size_t frames = noisy_mag.size();
  if (frames < static_cast<std::size_t>(config.noise_init_frames))
    throw Error(ErrorCode::EmptyInput, "fewer frames than noise_init_frames");
  const std::size_t bins = noisy_mag.front().size();

  std::vector<double> noise(bins, 0.0);
  for (int f = 0; f < config.noise_init_frames; ++f) {
    if (noisy_mag[f].size() != bins) throw Error(ErrorCode::ShapeMismatch, "ragged spectrogram");
    for (std::size_t k = 0; k < bins; ++k) noise[k] += noisy_mag[f][k] * noisy_mag[f][k];
  }
  for (auto& n : noise) n = n / config.noise_init_frames + kNoiseFloor;

  SnrEstimate est;
  est.prior.assign(frames, std::vector<double>(bins));
  est.posterior.assign(frames, std::vector<double>(bins));
  est.noise_psd.assign(frames, std::vector<double>(bins));
  est.frame_log_lr.assign(frames, 0.0);

  // previous frame's estimated clean amplitude squared over noise (G^2 gamma)
  std::vector<double> prev_ratio(bins, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& mag = noisy_mag[f];
    if (mag.size() != bins) throw Error(ErrorCode::ShapeMismatch, "ragged spectrogram");
    double lr_sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double power = mag[k] * mag[k];
      // the floor on both sides makes digital silence read as 0 dB
      const double gamma = std::max((power + kNoiseFloor) / noise[k], config.snr_floor);
      double xi = config.dd_alpha * prev_ratio[k] +
                  (1.0 - config.dd_alpha) * std::max(gamma - 1.0, 0.0);
      xi = std::max(xi, config.snr_floor);
      const double gain = mmse_stsa_gain(xi, gamma);
      prev_ratio[k] = gain * gain * gamma;
      est.prior[f][k] = xi;
      est.posterior[f][k] = gamma;
      est.noise_psd[f][k] = noise[k];
      lr_sum += bin_log_lr(xi, gamma);
    }
    est.frame_log_lr[f] = lr_sum / static_cast<double>(bins);

    if (speech_probability(est.frame_log_lr[f]) <= config.noise_update_threshold) {
      const double b = config.noise_smoothing;
      for (std::size_t k = 0; k < bins; ++k)
        noise[k] = b * noise[k] + (1.0 - b) * (mag[k] * mag[k] + kNoiseFloor);
    }
  }
  return est;
}

VadMask mask_from_estimate(const SnrEstimate& estimate, double threshold) {
  VadMask mask;
  mask.speech.resize(estimate.frame_log_lr.size());
  for (std::size_t f = 0; f < mask.speech.size(); ++f)
    mask.speech[f] = speech_probability(estimate.frame_log_lr[f]) > threshold;
  return mask;
}

VadMask detect(const corpus::Waveform& wave, const VadConfig& config) {
  config.validate();
  const auto mags = spectral_magnitudes(wave, config);
  if (mags.size() < static_cast<std::size_t>(config.noise_init_frames)) {
    // Too short to bootstrap a noise estimate from its own leading frames:
    // fall back to all available frames.
    VadConfig short_cfg = config;
    short_cfg.noise_init_frames = static_cast<int>(mags.size());
    return mask_from_estimate(estimate_snr(mags, short_cfg), config.threshold);
  }
  return mask_from_estimate(estimate_snr(mags, config), config.threshold);
}

}  // namespace vocalis::vad
