/* Copyright 2026 The selfcond Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <random>

#include "benchmark/benchmark.h"
#include "selfcond/align.h"
#include "selfcond/ctc.h"
#include "selfcond/data.h"
#include "selfcond/decode.h"
#include "selfcond/lm.h"
#include "selfcond/model.h"

namespace selfcond {
namespace {

// Lattice with a peaked, speech-like posterior: mostly blank, some labels.
PosteriorLattice MakeLattice(int frames, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 2.0);
  Matrix logits(frames, classes);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < classes; ++k) logits(t, k) = gauss(rng);
    logits(t, 0) += 1.0;
  }
  return PosteriorLattice::FromLogits(logits);
}

LabelSequence MakeTarget(int length, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabelSequence y;
  for (int i = 0; i < length; ++i) {
    y.labels.push_back(1 + static_cast<int>(rng() % (classes - 1)));
  }
  return y;
}

void BM_CtcLoss(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const PosteriorLattice z = MakeLattice(frames, 7, 1);
  const LabelSequence y = MakeTarget(frames / 4, 7, 2);
  for (auto _ : state) benchmark::DoNotOptimize(CtcLoss(z, y).loss);
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_CtcLoss)->Arg(32)->Arg(128)->Arg(512);

void BM_ViterbiAlign(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const PosteriorLattice z = MakeLattice(frames, 7, 3);
  const LabelSequence y = MakeTarget(frames / 4, 7, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ViterbiAlign(y, z).log_prob);
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_ViterbiAlign)->Arg(32)->Arg(128)->Arg(512);

void BM_PrefixBeamSearch(benchmark::State& state) {
  const TaskSpec spec = DefaultTaskSpec(1);
  const NGramModel lm = TrainNGram(LmCorpus(spec, 2000), spec.MakeVocabulary(), 4, 0.1);
  const PosteriorLattice z = MakeLattice(64, spec.num_labels + 1, 5);
  BeamConfig cfg;
  cfg.width = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(PrefixBeamSearch(z, &lm, cfg).size());
}
BENCHMARK(BM_PrefixBeamSearch)->Arg(1)->Arg(4)->Arg(10)->Arg(32);

void BM_Forward(benchmark::State& state) {
  const auto kind = static_cast<ConditioningKind>(state.range(0));
  const TaskSpec spec = DefaultTaskSpec(1);
  EncoderConfig enc;
  enc.input_dim = spec.input_dim;
  const EncoderModel model(enc, spec.MakeVocabulary(), 7);
  const NGramModel lm = TrainNGram(LmCorpus(spec, 2000), spec.MakeVocabulary(), 4, 0.1);
  const Utterance utt = Generate(spec, 1, "bench").front();
  ConditioningMode mode(kind);
  if (kind == ConditioningKind::kSearched) mode = ConditioningMode::Searched(BeamConfig{}, &lm);
  state.SetLabel(ConditioningKindName(kind));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Forward(model, utt.features, mode).final_logits.data());
  }
}
BENCHMARK(BM_Forward)
    ->Arg(static_cast<int>(ConditioningKind::kNone))
    ->Arg(static_cast<int>(ConditioningKind::kExpectation))
    ->Arg(static_cast<int>(ConditioningKind::kBestPath))
    ->Arg(static_cast<int>(ConditioningKind::kSearched));

void BM_TrainStep(benchmark::State& state) {
  const TaskSpec spec = DefaultTaskSpec(1);
  EncoderConfig enc;
  enc.input_dim = spec.input_dim;
  const EncoderModel model(enc, spec.MakeVocabulary(), 7);
  const Utterance utt = Generate(spec, 1, "bench").front();
  for (auto _ : state) {
    Gradients grads;
    benchmark::DoNotOptimize(
        LossAndGradient(model, utt, 0.5, ConditioningKind::kExpectation, &grads).total);
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace
}  // namespace selfcond

BENCHMARK_MAIN();
