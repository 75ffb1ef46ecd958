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

#include <benchmark/benchmark.h>

#include <vector>

#include "vocalis/dsp.hpp"
#include "vocalis/features.hpp"
#include "vocalis/forest.hpp"
#include "vocalis/nets.hpp"
#include "vocalis/rng.hpp"
#include "vocalis/synth.hpp"
#include "vocalis/vad.hpp"

namespace {

using namespace vocalis;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-0.5, 0.5);
  return x;
}

tensor::Mat noise_mat(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  tensor::Mat m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal();
  return m;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const dsp::Fft fft(n);
  const auto x = noise(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft.forward(x));
}
BENCHMARK(BM_Fft)->Arg(512)->Arg(1411);

void BM_MfccFrame(benchmark::State& state) {
  const int fs = static_cast<int>(state.range(0));
  const auto grid = features::FrameGrid::for_rate(fs);
  const features::MfccComputer mfcc(fs, grid.frame_len);
  const auto frame = noise(grid.frame_len, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mfcc.mfcc(frame));
}
BENCHMARK(BM_MfccFrame)->Arg(16000)->Arg(44100);

void BM_ExtractUtterance(benchmark::State& state) {
  const corpus::SynthSpec spec;
  const auto wave = corpus::synthesize(spec, corpus::draw_params(spec, corpus::DisorderLabel::FD, 0));
  for (auto _ : state) benchmark::DoNotOptimize(features::extract(wave));
}
BENCHMARK(BM_ExtractUtterance)->Unit(benchmark::kMillisecond);

void BM_VadDetect(benchmark::State& state) {
  const corpus::SynthSpec spec;
  const auto wave = corpus::synthesize(spec, corpus::draw_params(spec, corpus::DisorderLabel::Neoplasm, 0));
  for (auto _ : state) benchmark::DoNotOptimize(vad::detect(wave));
}
BENCHMARK(BM_VadDetect)->Unit(benchmark::kMillisecond);

void BM_SequenceForward(benchmark::State& state) {
  const auto kind = static_cast<nets::ArchKind>(state.range(0));
  const nets::SequenceModel model(nets::ArchSpec::defaults(kind), 1);
  const auto x = noise_mat(60, features::kFeatureDim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(model.frame_probabilities(x));
  state.SetLabel(std::string(nets::arch_name(kind)) + ", 60 frames");
}
BENCHMARK(BM_SequenceForward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_SequenceBackward(benchmark::State& state) {
  const auto kind = static_cast<nets::ArchKind>(state.range(0));
  nets::SequenceModel model(nets::ArchSpec::defaults(kind), 1);
  const auto x = noise_mat(60, features::kFeatureDim, 4);
  const std::vector<int> label{2};
  for (auto _ : state) {
    model.zero_grad();
    benchmark::DoNotOptimize(model.loss_and_grad(x, label, nullptr));
  }
  state.SetLabel(std::string(nets::arch_name(kind)) + ", 60 frames");
}
BENCHMARK(BM_SequenceBackward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto train = noise_mat(3000, features::kFeatureDim, 5);
  std::vector<int> labels(train.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = train(i, 0) + train(i, 1) > 0 ? 1 : (train(i, 2) > 0 ? 2 : 0);
  const auto forest = forest::fit(train, labels, 3, forest::ForestConfig{});
  const auto x = noise_mat(60, features::kFeatureDim, 6);
  for (auto _ : state) benchmark::DoNotOptimize(forest.frame_probabilities(x));
  state.SetLabel("26 trees, 60 frames");
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
