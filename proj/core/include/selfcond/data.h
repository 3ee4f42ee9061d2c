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

#ifndef SELFCOND_DATA_H_
#define SELFCOND_DATA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "selfcond/model.h"
#include "selfcond/types.h"

namespace selfcond {

// Synthetic acoustic task: labels follow a sparse Markov chain, each label
// emits a few frames of its prototype plus Gaussian noise, and some label
// pairs have near-identical prototypes so that only context can tell them
// apart. Label ids are 1-based; index 0 of every matrix below is label 1.
struct TaskSpec {
  int num_labels = 6;
  int input_dim = 8;
  int num_confusable_pairs = 2;
  int min_duration = 2;
  int max_duration = 4;
  double noise = 0.6;
  int min_length = 3;
  int max_length = 10;
  int train_count = 2000;
  int dev_count = 200;
  int test_count = 200;
  int lm_count = 10000;
  std::uint64_t seed = 1;

  // Filled by Materialize() when left empty.
  std::vector<std::pair<int, int>> confusable_pairs;  // label ids
  Matrix prototypes;   // |V| x D_in
  Matrix transitions;  // |V| x |V|, row-stochastic, zero diagonal
  Vector initial;      // |V|, start distribution

  // Draws prototypes, confusable pairs and the chain from the seed for any
  // of them that are unset, then validates.
  void Materialize();
  // Throws InvalidConfigError when an invariant is broken.
  void Validate() const;

  Vocabulary MakeVocabulary() const;
};

TaskSpec DefaultTaskSpec(std::uint64_t seed);

// Draws `count` utterances from an independent stream named `stream`.
std::vector<Utterance> Generate(const TaskSpec& spec, int count,
                                const std::string& stream = "train");
// Transcripts only, from the "lm" stream.
std::vector<LabelSequence> LmCorpus(const TaskSpec& spec, int count);

// Fraction of frames of confusable labels that a nearest-prototype frame
// classifier assigns to the partner label, over `count` fresh utterances.
double MeasureConfusion(const TaskSpec& spec, int count);

struct Dataset {
  TaskSpec spec;
  Vocabulary vocab;
  std::map<std::string, std::vector<Utterance>> splits;  // train/dev/test
  std::vector<LabelSequence> lm_corpus;
};

Dataset GenerateDataset(const TaskSpec& spec);

// Layout: vocab.txt, features/<id>.bin ("FEAT"), transcripts.tsv,
// lm_corpus.txt, manifest.json.
void WriteDataset(const Dataset& data, const std::filesystem::path& dir);
Dataset ReadDataset(const std::filesystem::path& dir);

std::string TaskSpecToJson(const TaskSpec& spec);
TaskSpec TaskSpecFromJson(const std::string& text);

}  // namespace selfcond

#endif  // SELFCOND_DATA_H_
