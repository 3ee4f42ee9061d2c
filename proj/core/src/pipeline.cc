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

#include "selfcond/pipeline.h"

#include <utility>

#include "json.hpp"
#include "selfcond/random.h"
#include "selfcond/status.h"

namespace selfcond {

using nlohmann::json;

TrainingSetup TrainingSetupFromJson(const std::string& text) {
  TrainingSetup s;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InvalidConfigError("training config must be an object");
    if (j.contains("encoder")) {
      const json& e = j.at("encoder");
      EncoderConfig& c = s.encoder;
      c.input_dim = e.value("input_dim", c.input_dim);
      c.dim = e.value("dim", c.dim);
      c.num_layers = e.value("num_layers", c.num_layers);
      c.context_radius = e.value("context_radius", c.context_radius);
      c.conditioning_layers = e.value("conditioning_layers", c.conditioning_layers);
      c.init_scale = e.value("init_scale", c.init_scale);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      TrainConfig& c = s.train;
      c.lambda = t.value("lambda", c.lambda);
      c.learning_rate = t.value("learning_rate", c.learning_rate);
      c.epochs = t.value("epochs", c.epochs);
      c.batch_size = t.value("batch_size", c.batch_size);
      c.seed = t.value("seed", c.seed);
      c.beta1 = t.value("beta1", c.beta1);
      c.beta2 = t.value("beta2", c.beta2);
      c.epsilon = t.value("epsilon", c.epsilon);
      c.clip_norm = t.value("clip_norm", c.clip_norm);
      if (t.contains("conditioning")) {
        const auto name = t.at("conditioning").get<std::string>();
        c.conditioning = ParseConditioning(name);
      }
    }
  } catch (const json::exception& e) {
    throw InvalidConfigError(std::string("bad training config: ") + e.what());
  }
  s.encoder.Validate();
  s.train.Validate();
  return s;
}

std::string TrainingSetupToJson(const TrainingSetup& s) {
  json j;
  j["encoder"] = {{"input_dim", s.encoder.input_dim},
                  {"dim", s.encoder.dim},
                  {"num_layers", s.encoder.num_layers},
                  {"context_radius", s.encoder.context_radius},
                  {"conditioning_layers", s.encoder.conditioning_layers},
                  {"init_scale", s.encoder.init_scale}};
  j["train"] = {{"lambda", s.train.lambda},
                {"learning_rate", s.train.learning_rate},
                {"epochs", s.train.epochs},
                {"batch_size", s.train.batch_size},
                {"seed", s.train.seed},
                {"beta1", s.train.beta1},
                {"beta2", s.train.beta2},
                {"epsilon", s.train.epsilon},
                {"clip_norm", s.train.clip_norm},
                {"conditioning", ConditioningKindName(s.train.conditioning)}};
  return j.dump(1) + "\n";
}

EncoderModel TrainOnDataset(const Dataset& data, TrainingSetup setup,
                            const std::function<void(int, double)>& on_epoch) {
  auto it = data.splits.find("train");
  if (it == data.splits.end() || it->second.empty()) {
    throw DataError("dataset has no training utterances");
  }
  setup.encoder.input_dim = data.spec.input_dim;
  EncoderModel model(setup.encoder, data.vocab,
                     DeriveSeed(setup.train.seed, "model/init"));
  Train(model, it->second, setup.train, on_epoch);
  return model;
}

PipelineConfig DefaultPipelineConfig(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.setup.train.seed = seed;
  cfg.experiment.decoders = {"greedy"};
  cfg.experiment.splits = {"test"};
  cfg.experiment.passes = 4;
  return cfg;
}

Report RunSyntheticPipeline(const PipelineConfig& cfg) {
  const Dataset data = GenerateDataset(DefaultTaskSpec(cfg.seed));
  const NGramModel lm =
      TrainNGram(data.lm_corpus, data.vocab, cfg.lm_order, cfg.lm_delta);
  const EncoderModel model = TrainOnDataset(data, cfg.setup);
  return RunExperiment(model, data, &lm, cfg.experiment,
                       {{"seed", std::to_string(cfg.seed)},
                        {"epochs", std::to_string(cfg.setup.train.epochs)},
                        {"lm_order", std::to_string(cfg.lm_order)}});
}

}  // namespace selfcond
