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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vocalis::corpus {

/// The four disorder classes; the integer code is the class index used by
/// every classifier and confusion matrix.
enum class DisorderLabel : int { FD = 0, Neoplasm = 1, Phonotrauma = 2, VocalPalsy = 3 };

inline constexpr int kNumLabels = 4;
inline constexpr std::array<DisorderLabel, kNumLabels> kAllLabels = {
    DisorderLabel::FD, DisorderLabel::Neoplasm, DisorderLabel::Phonotrauma,
    DisorderLabel::VocalPalsy};

constexpr int code(DisorderLabel label) { return static_cast<int>(label); }
DisorderLabel label_from_code(int code);
/// Lowercase serialized name: "fd", "neoplasm", "phonotrauma", "vocalpalsy".
std::string_view label_name(DisorderLabel label);
DisorderLabel parse_label(std::string_view name);

struct UtteranceKind {
  enum class Type { Vowel, Sentence };
  Type type = Type::Vowel;
  int sentence = 0;  // 1..7 when type == Sentence

  static UtteranceKind vowel() { return {}; }
  static UtteranceKind sentence_n(int index);
  bool operator==(const UtteranceKind&) const = default;
};

/// "vowel" or "sentence<N>".
std::string format_kind(const UtteranceKind& kind);
UtteranceKind parse_kind(std::string_view text);

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
  std::string speaker_id;
  std::optional<DisorderLabel> label;
  UtteranceKind kind;
};

bool is_supported_rate(int sample_rate);

/// Reads a RIFF/WAVE PCM 16-bit mono file. Samples are int16 / 32768.
Waveform read_wav(const std::filesystem::path& path);
/// Writes samples as 16-bit PCM; values are scaled by 32768, rounded and
/// clamped to the int16 range.
void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate);
/// Raw int16 variant, used where bit-exact sample values matter.
void write_wav_pcm16(const std::filesystem::path& path, const std::vector<std::int16_t>& pcm,
                     int sample_rate);

struct ManifestEntry {
  std::string path;
  std::string speaker_id;
  DisorderLabel label = DisorderLabel::FD;
  UtteranceKind kind;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path root_dir;

  /// Entry path resolved against root_dir.
  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// CSV with header `path,speaker_id,label,utterance_kind`.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& root_dir);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

inline constexpr int kNumFolds = 5;

struct SplitPlan {
  std::set<std::string> train_speakers;
  std::set<std::string> test_speakers;
  std::map<std::string, int> folds;  // train speaker -> 0..4

  bool operator==(const SplitPlan&) const = default;
};

/// Speaker-disjoint split stratified per class. Speakers are shuffled by
/// `seed`, then moved into the test set greedily per class until the class's
/// test utterance count reaches `test_fraction`; the remaining train speakers
/// are dealt round-robin into five folds.
SplitPlan make_split(const Manifest& manifest, double test_fraction, std::uint64_t seed);

/// CSV with header `speaker_id,partition,fold`; fold is -1 for test speakers.
void save_split(const SplitPlan& plan, const std::filesystem::path& path);
SplitPlan load_split(const std::filesystem::path& path);

}  // namespace vocalis::corpus
