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

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vocalis/corpus.hpp"

namespace vocalis::corpus {

enum class SynthMode {
  /// Time-varying F0 contour over a sequence of syllables.
  Sentence,
  /// One stationary vowel segment.
  Vowel,
};

struct SynthSpec {
  int n_per_class = 25;
  int sample_rate = 16000;
  /// Voiced duration in sentence mode.
  double duration_s = 1.0;
  /// Voiced duration in vowel mode.
  double vowel_duration_s = 0.8;
  double snr_db = 20.0;
  std::uint64_t seed = 7;
  SynthMode mode = SynthMode::Sentence;
  /// Silence prepended and appended to every utterance.
  double pad_s = 0.2;

  void validate() const;
};

/// Parameter ranges of one synthetic class. Values are drawn uniformly per
/// utterance. See docs/synthetic_corpus.md for the table.
struct ClassProfile {
  double f0_lo, f0_hi;            // Hz
  double jitter_lo, jitter_hi;    // relative cycle-to-cycle F0 perturbation (std)
  double shimmer_lo, shimmer_hi;  // relative cycle-to-cycle amplitude perturbation (std)
  double tilt_lo, tilt_hi;        // harmonic roll-off, dB per octave
};

const std::array<ClassProfile, kNumLabels>& class_profiles();

/// Speaker "compensation": a sustained vowel can be produced with an altered
/// register (shifted F0 and tilt). The offset is held for the whole vowel in
/// vowel mode and decays within the first syllables in sentence mode.
inline constexpr double kCompTiltRange = 4.0;     // +- dB/octave
inline constexpr double kCompF0Range = 0.2;       // +- relative
inline constexpr double kCompDecaySeconds = 0.15;

struct UtteranceParams {
  DisorderLabel label = DisorderLabel::FD;
  int index = 0;
  double f0 = 0.0;
  double jitter = 0.0;
  double shimmer = 0.0;
  double tilt = 0.0;
  double comp_tilt = 0.0;
  double comp_f0 = 0.0;
  int sentence = 0;  // 1..7 in sentence mode, 0 for vowel
};

/// Deterministic parameter draw for utterance `index` of `label`.
UtteranceParams draw_params(const SynthSpec& spec, DisorderLabel label, int index);

/// Renders one utterance (pads included), quantized to the int16 grid so the
/// result equals what read_wav returns for the written file.
Waveform synthesize(const SynthSpec& spec, const UtteranceParams& params);

std::string synth_speaker_id(DisorderLabel label, int index);

struct SynthCorpus {
  Manifest manifest;
  std::vector<UtteranceParams> params;  // aligned with manifest.entries
};

/// Writes `manifest.csv` and `wav/<class>/<id>.wav` under `out_dir`.
SynthCorpus synth_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Same corpus held in memory, no files written.
std::vector<Waveform> synth_waveforms(const SynthSpec& spec);

}  // namespace vocalis::corpus
