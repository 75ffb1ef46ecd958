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

#include "vocalis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vocalis/error.hpp"
#include "vocalis/rng.hpp"

namespace vocalis::corpus {

namespace {

constexpr std::array<ClassProfile, kNumLabels> kProfiles = {{
    // f0 (Hz)      jitter          shimmer         tilt (dB/oct)
    {200.0, 250.0, 0.004, 0.008, 0.02, 0.04, -6.5, -5.5},    // fd
    {95.0, 125.0, 0.025, 0.040, 0.10, 0.15, -3.5, -2.5},     // neoplasm
    {150.0, 190.0, 0.010, 0.020, 0.05, 0.08, -9.5, -8.5},    // phonotrauma
    {125.0, 165.0, 0.015, 0.025, 0.03, 0.06, -12.5, -11.5},  // vocalpalsy
}};

struct Formants {
  double f1, f2;
};

// class-independent vowel qualities; index 0 is /a/
constexpr std::array<Formants, 5> kVowels = {{
    {800.0, 1200.0}, {300.0, 2300.0}, {350.0, 800.0}, {500.0, 1900.0}, {500.0, 900.0}}};

constexpr double kFormantGainDb = 10.0;
constexpr double kFormantBandwidth = 120.0;
constexpr double kFadeSeconds = 0.05;
constexpr double kPeakLevel = 0.5;

struct Syllable {
  double start, end;
  double pitch;  // relative pitch target
  int vowel;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  h = (h ^ (a + 0x632be59bd9b4e019ULL)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (b + 0x85157af5a3ad2d1bULL)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

// The syllable template depends only on the sentence index, like a fixed
// reading script; speakers add their own small pitch deviations.
std::vector<Syllable> sentence_template(int sentence, double duration, Rng& speaker) {
  Rng script(0x5e17e9ceULL + static_cast<std::uint64_t>(sentence));
  std::vector<Syllable> out;
  double t = 0.0;
  while (t < duration) {
    Syllable s;
    s.start = t;
    s.end = std::min(duration, t + script.uniform(0.16, 0.24));
    s.pitch = script.uniform(0.85, 1.2) * (1.0 + speaker.uniform(-0.05, 0.05));
    s.vowel = static_cast<int>(script.below(kVowels.size()));
    out.push_back(s);
    t = s.end;
  }
  return out;
}

double formant_gain_db(double freq, const Formants& f) {
  const double a = (freq - f.f1) / kFormantBandwidth;
  const double b = (freq - f.f2) / kFormantBandwidth;
  return kFormantGainDb * (std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b));
}

}  // namespace

void SynthSpec::validate() const {
  if (n_per_class < 5) throw Error(ErrorCode::InvalidArgument, "n_per_class must be >= 5");
  if (duration_s < 1.0) throw Error(ErrorCode::InvalidArgument, "duration_s must be >= 1");
  if (!is_supported_rate(sample_rate))
    throw Error(ErrorCode::UnsupportedSampleRate, std::to_string(sample_rate) + " Hz");
  if (!(vowel_duration_s > 0.0) || pad_s < 0.0)
    throw Error(ErrorCode::InvalidArgument, "durations must be positive");
}

const std::array<ClassProfile, kNumLabels>& class_profiles() { return kProfiles; }

std::string synth_speaker_id(DisorderLabel label, int index) {
  std::string idx = std::to_string(index);
  if (idx.size() < 3) idx.insert(0, 3 - idx.size(), '0');
  return "syn-" + std::string(label_name(label)) + "-" + idx;
}

UtteranceParams draw_params(const SynthSpec& spec, DisorderLabel label, int index) {
  Rng rng(mix(spec.seed, static_cast<std::uint64_t>(code(label)), static_cast<std::uint64_t>(index)));
  const auto& p = kProfiles[code(label)];
  UtteranceParams u;
  u.label = label;
  u.index = index;
  u.f0 = rng.uniform(p.f0_lo, p.f0_hi);
  u.jitter = rng.uniform(p.jitter_lo, p.jitter_hi);
  u.shimmer = rng.uniform(p.shimmer_lo, p.shimmer_hi);
  u.tilt = rng.uniform(p.tilt_lo, p.tilt_hi);
  u.comp_tilt = rng.uniform(-kCompTiltRange, kCompTiltRange);
  u.comp_f0 = rng.uniform(-kCompF0Range, kCompF0Range);
  u.sentence = spec.mode == SynthMode::Sentence ? (index % 7) + 1 : 0;
  return u;
}

Waveform synthesize(const SynthSpec& spec, const UtteranceParams& params) {
  spec.validate();
  Rng rng(mix(spec.seed ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(code(params.label)),
              static_cast<std::uint64_t>(params.index)));
  const bool sentence = spec.mode == SynthMode::Sentence;
  const double fs = spec.sample_rate;
  const double voiced_s = sentence ? spec.duration_s : spec.vowel_duration_s;
  const auto voiced_n = static_cast<std::size_t>(std::lround(voiced_s * fs));
  const auto pad_n = static_cast<std::size_t>(std::lround(spec.pad_s * fs));

  std::vector<Syllable> syllables;
  if (sentence) syllables = sentence_template(params.sentence, voiced_s, rng);
  else syllables.push_back({0.0, voiced_s, 1.0, 0});

  auto syllable_at = [&](double t) -> std::size_t {
    std::size_t i = 0;
    while (i + 1 < syllables.size() && t >= syllables[i].end) ++i;
    return i;
  };
  auto pitch_at = [&](double t) {
    if (!sentence) return 1.0;
    // linear interpolation between syllable-center targets, with declination
    double value = syllables.front().pitch;
    for (std::size_t i = 0; i + 1 < syllables.size(); ++i) {
      const double c0 = 0.5 * (syllables[i].start + syllables[i].end);
      const double c1 = 0.5 * (syllables[i + 1].start + syllables[i + 1].end);
      if (t < c0) break;
      value = syllables[i + 1].pitch;
      if (t < c1) {
        const double w = (t - c0) / (c1 - c0);
        value = (1.0 - w) * syllables[i].pitch + w * syllables[i + 1].pitch;
        break;
      }
    }
    return value * (1.0 - 0.08 * t / voiced_s);
  };
  auto compensation = [&](double t) { return sentence ? std::exp(-t / kCompDecaySeconds) : 1.0; };

  std::vector<double> voiced(voiced_n, 0.0);
  std::vector<double> amps;
  double phase = 1.0;  // forces a new cycle at t = 0
  double cycle_f0 = params.f0;
  double cycle_amp = 1.0;
  const double nyquist_limit = 0.45 * fs;
  for (std::size_t n = 0; n < voiced_n; ++n) {
    const double t = static_cast<double>(n) / fs;
    if (phase >= 1.0) {
      phase -= std::floor(phase);
      const double comp = compensation(t);
      const double base = params.f0 * (1.0 + params.comp_f0 * comp) * pitch_at(t);
      cycle_f0 = base * std::clamp(1.0 + params.jitter * rng.normal(), 0.7, 1.3);
      cycle_amp = std::clamp(1.0 + params.shimmer * rng.normal(), 0.2, 1.8);
      const double tilt = params.tilt + params.comp_tilt * comp;
      const Formants& formants = kVowels[syllables[syllable_at(t)].vowel];
      amps.clear();
      for (int k = 1; k * cycle_f0 < nyquist_limit; ++k) {
        const double db = tilt * std::log2(static_cast<double>(k)) +
                          formant_gain_db(k * cycle_f0, formants);
        amps.push_back(std::pow(10.0, db / 20.0));
      }
    }
    double env = 1.0;
    if (sentence) {
      const auto& s = syllables[syllable_at(t)];
      const double u = (t - s.start) / std::max(s.end - s.start, 1e-9);
      env = 0.35 + 0.65 * std::sin(std::numbers::pi * std::clamp(u, 0.0, 1.0));
    }
    const double fade = std::min({1.0, t / kFadeSeconds, (voiced_s - t) / kFadeSeconds});
    env *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(fade, 0.0));

    double acc = 0.0;
    const double angle = 2.0 * std::numbers::pi * phase;
    for (std::size_t k = 0; k < amps.size(); ++k) acc += amps[k] * std::sin((k + 1) * angle);
    voiced[n] = env * cycle_amp * acc;
    phase += cycle_f0 / fs;
  }

  double power = 0.0;
  for (double v : voiced) power += v * v;
  power /= static_cast<double>(std::max<std::size_t>(voiced_n, 1));
  const double noise_std = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));

  std::vector<double> samples(voiced_n + 2 * pad_n, 0.0);
  for (std::size_t n = 0; n < voiced_n; ++n) samples[pad_n + n] = voiced[n];
  for (auto& s : samples) s += noise_std * rng.normal();

  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  const double scale = peak > 0.0 ? kPeakLevel / peak : 1.0;
  for (auto& s : samples) {
    const double q = std::clamp(std::round(s * scale * 32768.0), -32768.0, 32767.0);
    s = q / 32768.0;
  }

  Waveform wave;
  wave.samples = std::move(samples);
  wave.sample_rate = spec.sample_rate;
  wave.speaker_id = synth_speaker_id(params.label, params.index);
  wave.label = params.label;
  wave.kind = sentence ? UtteranceKind::sentence_n(params.sentence) : UtteranceKind::vowel();
  return wave;
}

std::vector<Waveform> synth_waveforms(const SynthSpec& spec) {
  spec.validate();
  std::vector<Waveform> out;
  for (const auto label : kAllLabels)
    for (int i = 0; i < spec.n_per_class; ++i) out.push_back(synthesize(spec, draw_params(spec, label, i)));
  return out;
}

SynthCorpus synth_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) throw Error(ErrorCode::UnwritableOutput, out_dir.string() + ": " + ec.message());

  SynthCorpus corpus;
  corpus.manifest.root_dir = out_dir;
  for (const auto label : kAllLabels) {
    const auto class_dir = out_dir / "wav" / std::string(label_name(label));
    std::filesystem::create_directories(class_dir, ec);
    if (ec) throw Error(ErrorCode::UnwritableOutput, class_dir.string() + ": " + ec.message());
    for (int i = 0; i < spec.n_per_class; ++i) {
      const auto params = draw_params(spec, label, i);
      const auto wave = synthesize(spec, params);
      const std::string rel = "wav/" + std::string(label_name(label)) + "/" + wave.speaker_id + ".wav";
      write_wav(out_dir / rel, wave.samples, wave.sample_rate);
      corpus.manifest.entries.push_back({rel, wave.speaker_id, label, wave.kind});
      corpus.params.push_back(params);
    }
  }
  save_manifest(corpus.manifest, out_dir / "manifest.csv");
  return corpus;
}

}  // namespace vocalis::corpus
