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

#ifndef SELFCOND_LM_H_
#define SELFCOND_LM_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "selfcond/types.h"

namespace selfcond {

// Additively smoothed n-gram model over label ids 1..|V| plus an end event.
// Contexts are the last (order-1) labels, left-padded with a begin marker.
class NGramModel {
 public:
  // Internal context/event markers. Never appear in a Vocabulary.
  static constexpr int kBeginMarker = -1;
  static constexpr const char* kBeginSymbol = "<s>";
  static constexpr const char* kEndSymbol = "</s>";

  struct ContextCounts {
    std::vector<long> counts;  // indexed by event id, size |V|+2 (slot 0 unused)
    long total = 0;
  };

  NGramModel(Vocabulary vocab, int order, double delta);

  int order() const { return order_; }
  double delta() const { return delta_; }
  const Vocabulary& vocab() const { return vocab_; }
  // Event id for the end of sentence, |V| + 1.
  int end_event() const { return vocab_.num_labels() + 1; }
  int num_events() const { return vocab_.num_labels() + 1; }

  // Context key for predicting the token after `prefix`.
  std::vector<int> ContextOf(const std::vector<int>& prefix) const;

  // Adds all events of one sentence, including the end event.
  void AddSentence(const LabelSequence& sentence);

  double Prob(const std::vector<int>& context, int event) const;
  // ln p(event | last order-1 labels of prefix). `event` is a label id or
  // end_event(). Throws InvalidInputError for anything else.
  double ScoreNext(const LabelSequence& prefix, int event) const;
  double ScoreNextContext(const std::vector<int>& context, int event) const;
  // Sum of ScoreNext over the sentence and its end event.
  double SentenceLogProb(const LabelSequence& sentence) const;

  const std::map<std::vector<int>, ContextCounts>& contexts() const {
    return contexts_;
  }

  // Versioned text format, see Save.
  std::string Serialize() const;
  static NGramModel Deserialize(const std::string& text, const Vocabulary& vocab);
  void Save(const std::filesystem::path& file) const;
  static NGramModel Load(const std::filesystem::path& file,
                         const Vocabulary& vocab);

 private:
  void CheckEvent(int event) const;

  Vocabulary vocab_;
  int order_;
  double delta_;
  std::map<std::vector<int>, ContextCounts> contexts_;
};

// Counts all n-grams of `corpus` with begin/end padding.
// Throws InvalidInputError on an empty corpus, InvalidConfigError on a bad
// order or delta.
NGramModel TrainNGram(const std::vector<LabelSequence>& corpus,
                      const Vocabulary& vocab, int order, double delta);

}  // namespace selfcond

#endif  // SELFCOND_LM_H_
