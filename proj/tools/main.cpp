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

// vocalis: command-line front end for the voice-disorder pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vocalis/analysis.hpp"
#include "vocalis/corpus.hpp"
#include "vocalis/error.hpp"
#include "vocalis/eval.hpp"
#include "vocalis/features.hpp"
#include "vocalis/pipeline.hpp"
#include "vocalis/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace vocalis;

namespace {

constexpr const char* kVersion = "0.1.0";

// Every subcommand echoes its resolved settings here before doing work.
void write_run_log(const std::string& explicit_path, const fs::path& fallback, const std::string& command,
                   const json& config) {
  fs::path path = explicit_path.empty() ? fallback : fs::path(explicit_path);
  if (path.empty()) return;
  json log;
  log["tool"] = "vocalis";
  log["version"] = kVersion;
  log["subcommand"] = command;
  log["config"] = config;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
  out << log.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
  out << text;
  if (!out) throw Error(ErrorCode::UnwritableOutput, path.string());
}

struct Common {
  std::string run_log;
  std::size_t jobs = 1;
};

struct SynthArgs {
  std::string out;
  corpus::SynthSpec spec;
  std::string mode = "sentence";
};

struct SplitArgs {
  std::string manifest, out;
  double test_fraction = 0.2;
  std::uint64_t seed = 7;
};

struct FeatureArgs {
  std::string manifest, out;
  double vad_threshold = 0.9;
  bool csv = false;
};

struct TrainArgs {
  std::string features, split, out, arch = "bilstm";
  std::optional<double> lr;
  std::optional<int> epochs;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;
  std::size_t trees = 26;
};

struct EvalArgs {
  std::string model, features, split, out, table;
  bool all = false;
};

struct PredictArgs {
  std::string model, wav;
  double vad_threshold = 0.9;
};

struct PcaArgs {
  std::string model, features, split, out;
  std::size_t k = 2;
  bool test_only = false;
};

struct CrossvalArgs {
  std::string features, split, out, arch = "bilstm";
  std::optional<double> lr;
  std::optional<int> epochs;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;
  std::size_t trees = 26;
};

json spec_json(const corpus::SynthSpec& s, const std::string& mode) {
  return {{"n_per_class", s.n_per_class}, {"sample_rate", s.sample_rate}, {"duration_s", s.duration_s},
          {"vowel_duration_s", s.vowel_duration_s}, {"snr_db", s.snr_db}, {"seed", s.seed},
          {"mode", mode}, {"pad_s", s.pad_s}};
}

pipeline::TrainOptions train_options(const std::string& arch, std::optional<double> lr, std::optional<int> epochs,
                                     std::uint64_t seed, double clip_norm, std::size_t trees) {
  pipeline::TrainOptions o;
  o.kind = pipeline::parse_model_kind(arch);
  o.learning_rate = lr;
  o.epochs = epochs;
  o.seed = seed;
  o.clip_norm = clip_norm;
  o.trees = trees;
  return o;
}

json train_json(const pipeline::TrainOptions& o) {
  json j{{"arch", pipeline::model_kind_name(o.kind)}, {"seed", o.seed}};
  if (o.kind == pipeline::ModelKind::RF) {
    j["trees"] = o.trees;
  } else {
    const auto arch = static_cast<nets::ArchKind>(static_cast<int>(o.kind));
    const auto defaults = nets::TrainConfig::defaults(arch);
    j["learning_rate"] = o.learning_rate.value_or(defaults.learning_rate);
    j["epochs"] = o.epochs.value_or(defaults.epochs);
    j["clip_norm"] = o.clip_norm;
  }
  return j;
}

int cmd_synth(const SynthArgs& a, const Common& c) {
  auto spec = a.spec;
  if (a.mode == "sentence") spec.mode = corpus::SynthMode::Sentence;
  else if (a.mode == "vowel") spec.mode = corpus::SynthMode::Vowel;
  else throw Error(ErrorCode::InvalidArgument, "mode must be sentence or vowel");
  spec.validate();
  write_run_log(c.run_log, fs::path(a.out) / "run.json", "synth", {{"out", a.out}, {"spec", spec_json(spec, a.mode)}});
  const auto corpus = corpus::synth_corpus(spec, a.out);
  std::cout << "wrote " << corpus.manifest.entries.size() << " utterances to " << (fs::path(a.out) / "manifest.csv").string()
            << '\n';
  return 0;
}

int cmd_split(const SplitArgs& a, const Common& c) {
  write_run_log(c.run_log, a.out + ".run.json", "split",
                {{"manifest", a.manifest}, {"out", a.out}, {"test_fraction", a.test_fraction}, {"seed", a.seed}});
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto plan = corpus::make_split(manifest, a.test_fraction, a.seed);
  corpus::save_split(plan, a.out);
  std::cout << "train speakers " << plan.train_speakers.size() << ", test speakers " << plan.test_speakers.size() << '\n';
  return 0;
}

int cmd_features(const FeatureArgs& a, const Common& c) {
  vad::VadConfig vc;
  vc.threshold = a.vad_threshold;
  vc.validate();
  write_run_log(c.run_log, fs::path(a.out) / "run.json", "features",
                {{"manifest", a.manifest}, {"out", a.out}, {"vad_threshold", vc.threshold}, {"csv", a.csv}});
  const auto manifest = corpus::load_manifest(a.manifest);
  const auto waves = pipeline::load_waveforms(manifest, c.jobs);
  const auto seqs = pipeline::extract_all(waves, vc, c.jobs);
  pipeline::save_feature_set(a.out, manifest, seqs);
  if (a.csv) {
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const auto& e = manifest.entries[i];
      features::save_features_csv(seqs[i], fs::path(a.out) / "csv" / (e.speaker_id + "_" + corpus::format_kind(e.kind) + ".csv"));
    }
  }
  std::cout << "extracted " << seqs.size() << " sequences into " << a.out << '\n';
  return 0;
}

std::vector<features::FeatureSequence> select(const std::string& features_dir, const std::string& split_path,
                                              bool test_side) {
  auto data = pipeline::load_feature_set(features_dir);
  if (split_path.empty()) return data;
  auto part = pipeline::partition(data, corpus::load_split(split_path));
  return test_side ? std::move(part.test) : std::move(part.train);
}

int cmd_train(const TrainArgs& a, const Common& c) {
  const auto opts = train_options(a.arch, a.lr, a.epochs, a.seed, a.clip_norm, a.trees);
  write_run_log(c.run_log, a.out + ".run.json", "train",
                {{"features", a.features}, {"split", a.split}, {"out", a.out}, {"train", train_json(opts)}});
  const auto train_set = select(a.features, a.split, false);
  const auto outcome = pipeline::train_model(opts, train_set);
  outcome.model.save(a.out);
  if (outcome.history) {
    std::cout << "initial loss " << outcome.history->initial_loss << ", final epoch loss "
              << outcome.history->epoch_loss.back() << '\n';
  }
  std::cout << "trained " << a.arch << " on " << train_set.size() << " utterances -> " << a.out << '\n';
  return 0;
}

int cmd_evaluate(const EvalArgs& a, const Common& c) {
  write_run_log(c.run_log, a.out + ".run.json", "evaluate",
                {{"model", a.model}, {"features", a.features}, {"split", a.split}, {"out", a.out}, {"table", a.table}});
  const auto model = pipeline::Model::load(a.model);
  const auto test_set = select(a.features, a.split, !a.all);
  const auto report = eval::evaluate(model, test_set);
  write_text(a.out, eval::report_json(report));
  const auto table = eval::report_table(report);
  if (!a.table.empty()) write_text(a.table, table);
  std::cout << table;
  return 0;
}

int cmd_predict(const PredictArgs& a, const Common& c) {
  vad::VadConfig vc;
  vc.threshold = a.vad_threshold;
  vc.validate();
  write_run_log(c.run_log, {}, "predict", {{"model", a.model}, {"wav", a.wav}, {"vad_threshold", vc.threshold}});
  const auto model = pipeline::Model::load(a.model);
  auto wave = corpus::read_wav(a.wav);
  wave.speaker_id = fs::path(a.wav).stem().string();
  const auto seq = features::extract(wave, vc);
  const int label = eval::predict_utterance(model, seq);
  std::cout << eval::class_name(static_cast<std::size_t>(label), model.num_classes()) << '\n';
  return 0;
}

int cmd_pca(const PcaArgs& a, const Common& c) {
  write_run_log(c.run_log, a.out + ".run.json", "pca",
                {{"model", a.model}, {"features", a.features}, {"split", a.split}, {"out", a.out}, {"k", a.k},
                 {"test_only", a.test_only}});
  const auto model = pipeline::Model::load(a.model);
  const auto* net = model.network();
  if (!net) throw Error(ErrorCode::InvalidArgument, "pca needs a neural model (random forests have no hidden features)");
  std::vector<features::FeatureSequence> data = pipeline::load_feature_set(a.features);
  if (!a.split.empty() && a.test_only) data = pipeline::partition(data, corpus::load_split(a.split)).test;
  const auto feats = analysis::utterance_features(*net, data);
  const auto pca = analysis::pca_fit(feats, a.k);
  analysis::write_scatter(a.out, pca, feats);
  std::cout << "explained variance:";
  for (double v : pca.explained) std::cout << ' ' << v;
  std::cout << " of " << pca.total_variance << '\n';
  return 0;
}

int cmd_crossval(const CrossvalArgs& a, const Common& c) {
  const auto opts = train_options(a.arch, a.lr, a.epochs, a.seed, a.clip_norm, a.trees);
  write_run_log(c.run_log, fs::path(a.out) / "run.json", "crossval",
                {{"features", a.features}, {"split", a.split}, {"out", a.out}, {"jobs", c.jobs}, {"train", train_json(opts)}});
  const auto data = pipeline::load_feature_set(a.features);
  const auto plan = corpus::load_split(a.split);
  const auto cv = pipeline::cross_validate(opts, data, plan, c.jobs);
  for (std::size_t f = 0; f < cv.folds.size(); ++f)
    write_text(fs::path(a.out) / ("fold" + std::to_string(f) + ".json"), eval::report_json(cv.folds[f]));
  write_text(fs::path(a.out) / "summary.json", eval::summary_json(cv.summary));
  std::cout << eval::summary_json(cv.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vocalis: voice-disorder classification from continuous speech"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  app.add_option("--run-log", common.run_log, "Write the resolved configuration to this JSON file");
  app.add_option("--jobs", common.jobs, "Worker threads for feature extraction and cross-validation")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate the synthetic four-class corpus");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--n-per-class", synth.spec.n_per_class, "Speakers per class")->capture_default_str();
  s->add_option("--sample-rate", synth.spec.sample_rate, "16000 or 44100")->capture_default_str();
  s->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
  s->add_option("--snr-db", synth.spec.snr_db, "White-noise SNR relative to voiced power")->capture_default_str();
  s->add_option("--duration", synth.spec.duration_s, "Voiced seconds in sentence mode")->capture_default_str();
  s->add_option("--mode", synth.mode, "sentence or vowel")->capture_default_str();

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "Speaker-disjoint train/test split with five training folds");
  sp->add_option("--manifest", split.manifest, "Manifest CSV")->required();
  sp->add_option("--out", split.out, "Split CSV to write")->required();
  sp->add_option("--test-fraction", split.test_fraction, "Share of each class held out")->capture_default_str();
  sp->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

  FeatureArgs feat;
  auto* fe = app.add_subcommand("features", "VAD + MFCC/delta extraction for every manifest entry");
  fe->add_option("--manifest", feat.manifest, "Manifest CSV")->required();
  fe->add_option("--out", feat.out, "Output directory")->required();
  fe->add_option("--vad-threshold", feat.vad_threshold, "Speech-presence probability threshold")->capture_default_str();
  fe->add_flag("--csv", feat.csv, "Also write per-utterance CSV feature dumps");

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train a frame classifier on the training speakers");
  tr->add_option("--features", train.features, "Feature directory")->required();
  tr->add_option("--split", train.split, "Split CSV; without it every sequence is used");
  tr->add_option("--arch", train.arch, "dnn, lstm, bilstm, gru or rf")->capture_default_str();
  tr->add_option("--lr", train.lr, "Adam learning rate (default 0.0005 LSTM/BiLSTM, 0.001 DNN/GRU)");
  tr->add_option("--epochs", train.epochs, "Training epochs (default 30)");
  tr->add_option("--seed", train.seed, "Initialization and shuffling seed")->capture_default_str();
  tr->add_option("--clip-norm", train.clip_norm, "Gradient-norm clip, 0 disables")->capture_default_str();
  tr->add_option("--trees", train.trees, "Random forest size")->capture_default_str();
  tr->add_option("--out", train.out, "Model file to write")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("evaluate", "Utterance-level evaluation on the test speakers");
  e->add_option("--model", ev.model, "Model file")->required();
  e->add_option("--features", ev.features, "Feature directory")->required();
  e->add_option("--split", ev.split, "Split CSV; without it every sequence is scored");
  e->add_flag("--all", ev.all, "Score the training side of the split instead of the test side");
  e->add_option("--out", ev.out, "JSON report to write")->required();
  e->add_option("--table", ev.table, "Also write the text table here");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Classify one WAV file");
  p->add_option("--model", pr.model, "Model file")->required();
  p->add_option("--wav", pr.wav, "16-bit mono PCM WAV")->required();
  p->add_option("--vad-threshold", pr.vad_threshold, "Speech-presence probability threshold")->capture_default_str();

  PcaArgs pca;
  auto* pc = app.add_subcommand("pca", "Utterance-averaged hidden features projected by PCA");
  pc->add_option("--model", pca.model, "Neural model file")->required();
  pc->add_option("--features", pca.features, "Feature directory")->required();
  pc->add_option("--split", pca.split, "Split CSV");
  pc->add_flag("--test-only", pca.test_only, "Use only the test speakers of --split");
  pc->add_option("--k", pca.k, "Components to keep")->capture_default_str();
  pc->add_option("--out", pca.out, "Scatter CSV to write")->required();

  CrossvalArgs cv;
  auto* x = app.add_subcommand("crossval", "Five-fold cross-validation over the training speakers");
  x->add_option("--features", cv.features, "Feature directory")->required();
  x->add_option("--split", cv.split, "Split CSV")->required();
  x->add_option("--arch", cv.arch, "dnn, lstm, bilstm, gru or rf")->capture_default_str();
  x->add_option("--lr", cv.lr, "Adam learning rate");
  x->add_option("--epochs", cv.epochs, "Training epochs");
  x->add_option("--seed", cv.seed, "Seed")->capture_default_str();
  x->add_option("--clip-norm", cv.clip_norm, "Gradient-norm clip")->capture_default_str();
  x->add_option("--trees", cv.trees, "Random forest size")->capture_default_str();
  x->add_option("--out", cv.out, "Output directory for fold reports")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_synth(synth, common);
    if (*sp) return cmd_split(split, common);
    if (*fe) return cmd_features(feat, common);
    if (*tr) return cmd_train(train, common);
    if (*e) return cmd_evaluate(ev, common);
    if (*p) return cmd_predict(pr, common);
    if (*pc) return cmd_pca(pca, common);
    if (*x) return cmd_crossval(cv, common);
  } catch (const Error& err) {
    std::cerr << "vocalis: " << err.what() << '\n';
    return exit_status(err.code());
  } catch (const fs::filesystem_error& err) {
    std::cerr << "vocalis: " << err.what() << '\n';
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "vocalis: internal error: " << err.what() << '\n';
    return 4;
  }
  return 2;
}
