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

#include "vocalis/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vocalis/error.hpp"
#include "vocalis/rng.hpp"

namespace vocalis::corpus {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {"fd", "neoplasm", "phonotrauma",
                                                                  "vocalpalsy"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

DisorderLabel label_from_code(int c) {
  if (c < 0 || c >= kNumLabels)
    throw Error(ErrorCode::LabelOutOfRange, "label code " + std::to_string(c));
  return static_cast<DisorderLabel>(c);
}

std::string_view label_name(DisorderLabel label) { return kLabelNames[code(label)]; }

DisorderLabel parse_label(std::string_view name) {
  for (int c = 0; c < kNumLabels; ++c)
    if (kLabelNames[c] == name) return static_cast<DisorderLabel>(c);
  throw Error(ErrorCode::UnknownLabel, std::string(name));
}

UtteranceKind UtteranceKind::sentence_n(int index) {
  if (index < 1 || index > 7)
    throw Error(ErrorCode::InvalidArgument, "sentence index must be 1..7");
  return {Type::Sentence, index};
}

std::string format_kind(const UtteranceKind& kind) {
  if (kind.type == UtteranceKind::Type::Vowel) return "vowel";
  return "sentence" + std::to_string(kind.sentence);
}

UtteranceKind parse_kind(std::string_view text) {
  if (text == "vowel") return UtteranceKind::vowel();
  constexpr std::string_view prefix = "sentence";
  if (text.size() == prefix.size() + 1 && text.substr(0, prefix.size()) == prefix) {
    const char d = text.back();
    if (d >= '1' && d <= '7') return UtteranceKind::sentence_n(d - '0');
  }
  throw Error(ErrorCode::BadFormat, "utterance kind '" + std::string(text) + "'");
}

bool is_supported_rate(int sample_rate) { return sample_rate == 16000 || sample_rate == 44100; }

Waveform read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::MalformedHeader, path.string() + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  int channels = 0;
  int sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t chunk_size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + 16 > size)
        throw Error(ErrorCode::MalformedHeader, path.string() + ": short fmt chunk");
      const std::uint16_t format = get_u16(data + body);
      channels = get_u16(data + body + 2);
      sample_rate = static_cast<int>(get_u32(data + body + 4));
      const std::uint16_t bits = get_u16(data + body + 14);
      bool pcm = format == 1;
      if (format == 0xFFFE && chunk_size >= 40 && body + 26 <= size)
        pcm = get_u16(data + body + 24) == 1;
      if (!pcm || bits != 16)
        throw Error(ErrorCode::UnsupportedEncoding,
                    path.string() + ": only 16-bit PCM is supported");
      if (channels != 1)
        throw Error(ErrorCode::UnsupportedChannels,
                    path.string() + ": " + std::to_string(channels) + " channels");
      if (!is_supported_rate(sample_rate))
        throw Error(ErrorCode::UnsupportedSampleRate,
                    path.string() + ": " + std::to_string(sample_rate) + " Hz");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::MalformedHeader, path.string() + ": data before fmt");
      if (body + chunk_size > size || chunk_size % 2 != 0)
        throw Error(ErrorCode::TruncatedData, path.string());
      Waveform wave;
      wave.sample_rate = sample_rate;
      wave.samples.resize(chunk_size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(get_u16(data + body + 2 * i));
        wave.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      if (wave.samples.empty()) throw Error(ErrorCode::TruncatedData, path.string() + ": empty");
      return wave;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  if (!have_fmt) throw Error(ErrorCode::MalformedHeader, path.string() + ": missing fmt chunk");
  throw Error(ErrorCode::TruncatedData, path.string() + ": missing data chunk");
}

void write_wav_pcm16(const std::filesystem::path& path, const std::vector<std::int16_t>& pcm,
                     int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (const auto s : pcm) put_u16(out, static_cast<std::uint16_t>(s));

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::UnwritableOutput, path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::UnwritableOutput, path.string());
}

void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate) {
  std::vector<std::int16_t> pcm(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double scaled = std::round(samples[i] * 32768.0);
    pcm[i] = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
  }
  write_wav_pcm16(path, pcm, sample_rate);
}

std::filesystem::path Manifest::resolve(const ManifestEntry& entry) const {
  const std::filesystem::path p(entry.path);
  return p.is_absolute() ? p : root_dir / p;
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& root_dir) {
  Manifest manifest;
  manifest.root_dir = root_dir;
  std::set<std::string> seen;
  bool header = true;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      const auto cols = split_csv(line);
      if (cols.size() != 4 || cols[0] != "path")
        throw Error(ErrorCode::BadFormat, "manifest header must be path,speaker_id,label,utterance_kind");
      continue;
    }
    const auto fields = split_csv(line);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (fields.size() < 4) throw Error(ErrorCode::MissingField, where);
    for (const auto& f : fields)
      if (f.empty()) throw Error(ErrorCode::MissingField, where);
    ManifestEntry entry;
    entry.path = std::string(fields[0]);
    entry.speaker_id = std::string(fields[1]);
    try {
      entry.label = parse_label(fields[2]);
      entry.kind = parse_kind(fields[3]);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.detail());
    }
    if (!seen.insert(entry.path).second) throw Error(ErrorCode::DuplicatePath, where + ": " + entry.path);
    manifest.entries.push_back(std::move(entry));
  }
  if (header) throw Error(ErrorCode::BadFormat, "manifest is empty");
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path), path.parent_path());
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
  out << "path,speaker_id,label,utterance_kind\n";
  for (const auto& e : manifest.entries)
    out << e.path << ',' << e.speaker_id << ',' << label_name(e.label) << ','
        << format_kind(e.kind) << '\n';
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
}

SplitPlan make_split(const Manifest& manifest, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "test_fraction must lie in (0, 1)");

  // utterances per (class, speaker)
  std::array<std::map<std::string, int>, kNumLabels> per_class;
  std::set<std::string> all_speakers;
  for (const auto& e : manifest.entries) {
    if (e.speaker_id.empty()) throw Error(ErrorCode::MissingField, e.path + ": speaker_id");
    per_class[code(e.label)][e.speaker_id] += 1;
    all_speakers.insert(e.speaker_id);
  }
  for (int c = 0; c < kNumLabels; ++c) {
    if (per_class[c].size() == 1)
      throw Error(ErrorCode::InsufficientSpeakers,
                  std::string(kLabelNames[c]) + " has a single speaker");
  }

  std::vector<std::string> order(all_speakers.begin(), all_speakers.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));

  SplitPlan plan;
  for (int c = 0; c < kNumLabels; ++c) {
    const auto& speakers = per_class[c];
    if (speakers.empty()) continue;
    int total = 0;
    for (const auto& [spk, n] : speakers) total += n;
    const double target = test_fraction * total;
    int in_test = 0;
    std::size_t train_left = 0;
    for (const auto& [spk, n] : speakers) {
      if (plan.test_speakers.count(spk)) in_test += n;
      else ++train_left;
    }
    for (const auto& spk : order) {
      if (in_test >= target) break;
      const auto it = speakers.find(spk);
      if (it == speakers.end() || plan.test_speakers.count(spk)) continue;
      if (train_left <= 1) break;
      plan.test_speakers.insert(spk);
      in_test += it->second;
      --train_left;
    }
  }

  int deal = 0;
  for (int c = 0; c < kNumLabels; ++c) {
    for (const auto& spk : order) {
      if (!per_class[c].count(spk) || plan.test_speakers.count(spk) || plan.folds.count(spk))
        continue;
      plan.train_speakers.insert(spk);
      plan.folds[spk] = deal++ % kNumFolds;
    }
  }
  return plan;
}

void save_split(const SplitPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
  out << "speaker_id,partition,fold\n";
  for (const auto& spk : plan.train_speakers) out << spk << ",train," << plan.folds.at(spk) << '\n';
  for (const auto& spk : plan.test_speakers) out << spk << ",test,-1\n";
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
}

SplitPlan load_split(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  SplitPlan plan;
  bool header = true;
  while (std::getline(in, line)) {
    const auto l = trim(line);
    if (l.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv(l);
    if (f.size() != 3) throw Error(ErrorCode::BadFormat, path.string() + ": " + line);
    const std::string spk(f[0]);
    if (f[1] == "train") {
      plan.train_speakers.insert(spk);
      plan.folds[spk] = std::stoi(std::string(f[2]));
    } else if (f[1] == "test") {
      plan.test_speakers.insert(spk);
    } else {
      throw Error(ErrorCode::BadFormat, path.string() + ": partition '" + std::string(f[1]) + "'");
    }
  }
  return plan;
}

}  // namespace vocalis::corpus
