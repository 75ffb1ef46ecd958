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

#include "vocalis/pipeline.hpp"

#include <array>
#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include "vocalis/error.hpp"

namespace vocalis::pipeline {

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

corpus::Manifest manifest_of(std::span<const corpus::Waveform> waves) {
  corpus::Manifest m;
  for (const auto& w : waves) {
    if (!w.label) throw Error(ErrorCode::UnlabeledSequence, w.speaker_id + " has no label");
    m.entries.push_back({w.speaker_id, w.speaker_id, *w.label, w.kind});
  }
  return m;
}

std::vector<corpus::Waveform> load_waveforms(const corpus::Manifest& manifest, std::size_t jobs) {
  std::vector<corpus::Waveform> waves(manifest.entries.size());
  parallel_for(waves.size(), jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    auto w = corpus::read_wav(manifest.resolve(e));
    w.speaker_id = e.speaker_id;
    w.label = e.label;
    w.kind = e.kind;
    waves[i] = std::move(w);
  });
  return waves;
}

std::vector<features::FeatureSequence> extract_all(std::span<const corpus::Waveform> waves,
                                                   const vad::VadConfig& vad_config, std::size_t jobs) {
  std::vector<features::FeatureSequence> out(waves.size());
  parallel_for(waves.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = features::extract(waves[i], vad_config);
    } catch (const Error& e) {
      throw Error(e.code(), waves[i].speaker_id + ": " + e.detail());
    }
  });
  return out;
}

void save_feature_set(const std::filesystem::path& dir, const corpus::Manifest& manifest,
                      std::span<const features::FeatureSequence> data) {
  if (manifest.entries.size() != data.size()) throw Error(ErrorCode::ShapeMismatch, "manifest and features differ in length");
  std::error_code ec;
  std::filesystem::create_directories(dir / "feat", ec);
  if (ec) throw Error(ErrorCode::UnwritableOutput, dir.string() + ": " + ec.message());
  std::ofstream index(dir / "index.csv");
  if (!index) throw Error(ErrorCode::UnwritableOutput, (dir / "index.csv").string());
  index << "feature_path,speaker_id,label,utterance_kind,source_path\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& e = manifest.entries[i];
    const std::string rel = "feat/" + e.speaker_id + "_" + corpus::format_kind(e.kind) + ".feat";
    features::save_features(data[i], dir / rel);
    index << rel << ',' << e.speaker_id << ',' << corpus::label_name(e.label) << ',' << corpus::format_kind(e.kind)
          << ',' << e.path << '\n';
  }
  if (!index) throw Error(ErrorCode::UnwritableOutput, (dir / "index.csv").string());
}

std::vector<features::FeatureSequence> load_feature_set(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.csv");
  if (!in) throw Error(ErrorCode::FileNotFound, (dir / "index.csv").string());
  std::string line;
  if (!std::getline(in, line) || line != "feature_path,speaker_id,label,utterance_kind,source_path")
    throw Error(ErrorCode::BadFormat, (dir / "index.csv").string() + ": bad header");
  std::vector<features::FeatureSequence> out;
  for (int row = 2; std::getline(in, line); ++row) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      fields.push_back(line.substr(start, pos - start));
    fields.push_back(line.substr(start));
    const std::string where = (dir / "index.csv").string() + ":" + std::to_string(row);
    if (fields.size() != 5) throw Error(ErrorCode::MissingField, where);
    auto seq = features::load_features(dir / fields[0]);
    seq.speaker_id = fields[1];
    seq.label = corpus::parse_label(fields[2]);
    out.push_back(std::move(seq));
  }
  return out;
}

Partition partition(std::span<const features::FeatureSequence> data, const corpus::SplitPlan& plan) {
  Partition p;
  for (const auto& seq : data) {
    if (plan.train_speakers.count(seq.speaker_id)) p.train.push_back(seq);
    else if (plan.test_speakers.count(seq.speaker_id)) p.test.push_back(seq);
  }
  return p;
}

Partition fold_partition(std::span<const features::FeatureSequence> data, const corpus::SplitPlan& plan, int fold) {
  if (fold < 0 || fold >= corpus::kNumFolds) throw Error(ErrorCode::InvalidArgument, "fold out of range");
  Partition p;
  for (const auto& seq : data) {
    const auto it = plan.folds.find(seq.speaker_id);
    if (it == plan.folds.end()) continue;
    (it->second == fold ? p.test : p.train).push_back(seq);
  }
  return p;
}

namespace {
constexpr std::array<std::string_view, 5> kKindNames = {"dnn", "lstm", "bilstm", "gru", "rf"};
}

ModelKind parse_model_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ModelKind>(i);
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(name) + "'");
}

std::string_view model_kind_name(ModelKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

tensor::Mat Model::frame_probabilities(const tensor::Mat& frames) const {
  return std::visit([&](const auto& m) { return m.frame_probabilities(frames); }, impl_);
}

std::size_t Model::num_classes() const {
  return std::visit([](const auto& m) { return m.num_classes(); }, impl_);
}

void Model::save(const std::filesystem::path& path) const {
  if (const auto* net = network()) nets::save_model(*net, path);
  else forest::save_forest(*forest(), path);
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  char magic[8] = {};
  in.read(magic, sizeof magic);
  const std::string_view m(magic, static_cast<std::size_t>(in.gcount()));
  if (m == "VOCMODL1") return Model(nets::load_model(path));
  if (m == "VOCFRST1") return Model(forest::load_forest(path));
  throw Error(ErrorCode::BadFormat, path.string() + ": not a model file");
}

namespace {
nets::ArchKind arch_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::DNN: return nets::ArchKind::DNN;
    case ModelKind::LSTM: return nets::ArchKind::LSTM;
    case ModelKind::BiLSTM: return nets::ArchKind::BiLSTM;
    case ModelKind::GRU: return nets::ArchKind::GRU;
    case ModelKind::RF: break;
  }
  throw Error(ErrorCode::InvalidArgument, "random forest has no network architecture");
}
}  // namespace

TrainOutcome train_model(const TrainOptions& options, std::span<const features::FeatureSequence> train_set) {
  if (train_set.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
  if (options.kind == ModelKind::RF) {
    forest::ForestConfig fc;
    fc.trees = options.trees;
    fc.seed = options.seed;
    return {Model(forest::fit(train_set, fc, options.n_classes)), std::nullopt};
  }
  const auto arch = arch_of(options.kind);
  nets::SequenceModel net(nets::ArchSpec::defaults(arch, options.n_classes), options.seed);
  auto tc = nets::TrainConfig::defaults(arch);
  if (options.learning_rate) tc.learning_rate = *options.learning_rate;
  if (options.epochs) tc.epochs = *options.epochs;
  tc.seed = options.seed;
  tc.clip_norm = options.clip_norm;
  auto history = nets::train(net, train_set, tc);
  return {Model(std::move(net)), std::move(history)};
}

CrossValidation cross_validate(const TrainOptions& options, std::span<const features::FeatureSequence> data,
                               const corpus::SplitPlan& plan, std::size_t jobs) {
  CrossValidation cv;
  cv.folds.resize(corpus::kNumFolds);
  parallel_for(corpus::kNumFolds, jobs, [&](std::size_t f) {
    const auto part = fold_partition(data, plan, static_cast<int>(f));
    if (part.test.empty()) throw Error(ErrorCode::InsufficientSpeakers, "fold " + std::to_string(f) + " is empty");
    const auto outcome = train_model(options, part.train);
    cv.folds[f] = eval::evaluate(outcome.model, part.test);
  });
  cv.summary = eval::summarize_folds(cv.folds);
  return cv;
}

}  // namespace vocalis::pipeline
