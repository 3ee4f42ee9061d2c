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

#include "selfcond/lm.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "selfcond/data.h"
#include "oracles.h"
#include "selfcond/status.h"
#include "test_util.h"

namespace selfcond {
namespace {

constexpr int a = 1;
constexpr int b = 2;

TEST(NGramTest, BigramCounts) {
  const NGramModel lm = TrainNGram({{a, b}, {a, b}}, testing::LetterVocab(2), 2, 1.0);
  EXPECT_NEAR(std::exp(lm.ScoreNext(LabelSequence{a}, b)), 0.6, 1e-15);
  EXPECT_NEAR(lm.ScoreNext(LabelSequence{a}, b), std::log(0.6), 1e-12);
  // p(a | <s>) = (2 + 1) / (2 + 3).
  EXPECT_NEAR(std::exp(lm.ScoreNext(LabelSequence{}, a)), 0.6, 1e-15);
}

TEST(NGramTest, UnigramCounts) {
  const NGramModel lm = TrainNGram({{a}}, testing::LetterVocab(1), 1, 1.0);
  // The end event is a counted token too: (1 + 1) / (2 + 2).
  EXPECT_NEAR(std::exp(lm.ScoreNext(LabelSequence{}, a)), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(lm.ScoreNext(LabelSequence{a, a}, a)), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(lm.ScoreNext(LabelSequence{a}, lm.end_event())), 0.5, 1e-15);
}

TEST(NGramTest, UnseenContextIsUniform) {
  const NGramModel lm = TrainNGram({{a, b}}, testing::LetterVocab(3), 3, 0.1);
  const LabelSequence unseen = {3, 3};
  for (int e = 1; e <= lm.end_event(); ++e) {
    EXPECT_NEAR(lm.ScoreNext(unseen, e), std::log(1.0 / 4.0), 1e-12);
  }
}

TEST(NGramTest, SentenceScoreTelescopes) {
  const NGramModel lm = TrainNGram({{a, b}, {b}, {a, a, b}}, testing::LetterVocab(2), 2, 0.5);
  const LabelSequence s = {a, b};
  const double chain = lm.ScoreNext(LabelSequence{}, a) + lm.ScoreNext(LabelSequence{a}, b) +
                       lm.ScoreNext(LabelSequence{a, b}, lm.end_event());
  EXPECT_NEAR(lm.SentenceLogProb(s), chain, 1e-12);
}

TEST(NGramTest, RejectsBadInput) {
  const Vocabulary v = testing::LetterVocab(2);
  EXPECT_THROW(TrainNGram({}, v, 2, 1.0), InvalidInputError);
  EXPECT_THROW(TrainNGram({{a}}, v, 0, 1.0), InvalidConfigError);
  EXPECT_THROW(TrainNGram({{a}}, v, 2, 0.0), InvalidConfigError);
  const NGramModel lm = TrainNGram({{a}}, v, 2, 1.0);
  EXPECT_THROW(lm.ScoreNext(LabelSequence{a}, 0), InvalidInputError);
  EXPECT_THROW(lm.ScoreNext(LabelSequence{a}, 4), InvalidInputError);
}

TEST(NGramTest, NormalizedOverRandomContexts) {
  const TaskSpec spec = DefaultTaskSpec(4);
  const Vocabulary vocab = spec.MakeVocabulary();
  const NGramModel lm = TrainNGram(LmCorpus(spec, 2000), vocab, 4, 0.1);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(0, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    const LabelSequence prefix =
        testing::RandomLabels(rng, len(rng), vocab.extended_size());
    double total = 0.0;
    for (int e = 1; e <= lm.end_event(); ++e) total += std::exp(lm.ScoreNext(prefix, e));
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(NGramTest, SerializationRoundTrip) {
  const Vocabulary v = testing::LetterVocab(3);
  const NGramModel lm = TrainNGram({{a, b, 3}, {b, b}, {3}}, v, 3, 0.25);
  const std::string text = lm.Serialize();
  EXPECT_EQ(text.rfind("NGRAM v1 order=3 delta=0.25\n", 0), 0u) << text;
  const NGramModel back = NGramModel::Deserialize(text, v);
  EXPECT_EQ(back.Serialize(), text);
  EXPECT_EQ(back.order(), 3);
  EXPECT_DOUBLE_EQ(back.delta(), 0.25);
  EXPECT_DOUBLE_EQ(back.ScoreNext(LabelSequence{a, b}, 3), lm.ScoreNext(LabelSequence{a, b}, 3));
  EXPECT_THROW(NGramModel::Deserialize("NGRAM v2 order=3 delta=1\n", v), DataError);
  EXPECT_THROW(NGramModel::Deserialize(text, testing::LetterVocab(2)), DataError);
}

// Trained conditionals approach the generating chain.
TEST(NGramTest, RecoversMarkovChain) {
  const TaskSpec spec = DefaultTaskSpec(1);
  const Vocabulary vocab = spec.MakeVocabulary();
  const NGramModel lm = TrainNGram(LmCorpus(spec, 10000), vocab, 4, 0.1);
  const std::vector<double> l1 = testing::ChainRowL1(lm, spec.transitions);
  for (int i = 1; i <= vocab.num_labels(); ++i) {
    EXPECT_LE(l1[i], 0.05) << "row " << i;
  }
  EXPECT_LE(testing::MaxNormalizationError(lm, {{3, 3, 3}, {-1, 6, 6}}), 1e-9);
}

}  // namespace
}  // namespace selfcond
