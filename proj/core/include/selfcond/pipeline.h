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

#ifndef SELFCOND_PIPELINE_H_
#define SELFCOND_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <string>

#include "selfcond/data.h"
#include "selfcond/experiment.h"
#include "selfcond/lm.h"
#include "selfcond/model.h"

namespace selfcond {

// Everything `train` needs besides the data.
struct TrainingSetup {
  EncoderConfig encoder;
  TrainConfig train;
};

// {"encoder": {...}, "train": {...}}; absent keys keep their defaults.
// train.conditioning is spelled "selfcond" or "none".
TrainingSetup TrainingSetupFromJson(const std::string& text);
std::string TrainingSetupToJson(const TrainingSetup& setup);

// Builds an encoder over data.vocab, with input_dim taken from the task and
// weights drawn from setup.train.seed, and trains it on the "train" split.
EncoderModel TrainOnDataset(
    const Dataset& data, TrainingSetup setup,
    const std::function<void(int, double)>& on_epoch = {});

// The synthetic end-to-end run: generate the default task for `seed`,
// train the n-gram LM and the encoder, decode the experiment grid.
struct PipelineConfig {
  std::uint64_t seed = 1;
  TrainingSetup setup;
  int lm_order = 4;
  double lm_delta = 0.1;
  ExperimentConfig experiment;
};

// The experiment grid used for the synthetic orderings: every conditioning
// mode with greedy output on test, plus a 4-pass sweep with beam output.
PipelineConfig DefaultPipelineConfig(std::uint64_t seed);

Report RunSyntheticPipeline(const PipelineConfig& cfg);

}  // namespace selfcond

#endif  // SELFCOND_PIPELINE_H_
