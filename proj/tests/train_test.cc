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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "selfcond/model.h"
#include "selfcond/status.h"
#include "test_util.h"

namespace selfcond {
namespace {

EncoderConfig TinyConfig() {
  EncoderConfig cfg;
  cfg.input_dim = 3;
  cfg.dim = 4;
  cfg.num_layers = 3;
  cfg.context_radius = 1;
  cfg.conditioning_layers = {1, 2};
  return cfg;
}

Utterance RandomUtterance(std::mt19937_64& rng, const std::string& id, int frames,
                          int input_dim) {
  Utterance utt;
  utt.id = id;
  utt.features = testing::RandomMatrix(rng, frames, input_dim);
  utt.transcript = testing::RandomFeasibleLabels(rng, 3, 4, frames);
  return utt;
}

Matrix& ParamAt(EncoderModel& model, std::size_t index) {
  Matrix* out = nullptr;
  std::size_t i = 0;
  model.ForEachParam([&](const std::string&, Matrix& m) {
    if (i++ == index) out = &m;
  });
  return *out;
}

void CheckGradient(ConditioningKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), seed);
  const Utterance utt = RandomUtterance(rng, "u", 5, 3);
  Gradients grads;
  LossAndGradient(model, utt, 0.5, kind, &grads);

  std::uniform_int_distribution<std::size_t> pick_param(0, grads.params.size() - 1);
  const double h = 1e-6;
  for (int sample = 0; sample < 20; ++sample) {
    const std::size_t p = pick_param(rng);
    Matrix& m = ParamAt(model, p);
    std::uniform_int_distribution<Eigen::Index> row(0, m.rows() - 1), col(0, m.cols() - 1);
    const Eigen::Index r = row(rng), c = col(rng);
    const double saved = m(r, c);
    m(r, c) = saved + h;
    const double up = LossAndGradient(model, utt, 0.5, kind, nullptr).total;
    m(r, c) = saved - h;
    const double down = LossAndGradient(model, utt, 0.5, kind, nullptr).total;
    m(r, c) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = grads.params[p].value(r, c);
    const double scale = std::max(1e-2, std::abs(numeric) + std::abs(analytic));
    EXPECT_LE(std::abs(numeric - analytic) / scale, 1e-3)
        << grads.params[p].name << "(" << r << "," << c << ") numeric " << numeric
        << " analytic " << analytic;
  }
}

TEST(LossAndGradientTest, MatchesFiniteDifferencesWithoutConditioning) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CheckGradient(ConditioningKind::kNone, seed);
}

TEST(LossAndGradientTest, MatchesFiniteDifferencesWithExpectation) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CheckGradient(ConditioningKind::kExpectation, seed);
  }
}

TEST(LossAndGradientTest, BackProjectionGradientDependsOnMode) {
  std::mt19937_64 rng(9);
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), 9);
  const Utterance utt = RandomUtterance(rng, "u", 6, 3);
  Gradients with, without;
  LossAndGradient(model, utt, 0.5, ConditioningKind::kExpectation, &with);
  LossAndGradient(model, utt, 0.5, ConditioningKind::kNone, &without);
  for (std::size_t i = 0; i < with.params.size(); ++i) {
    if (with.params[i].name.find("back") == std::string::npos) continue;
    EXPECT_GT(with.params[i].value.cwiseAbs().maxCoeff(), 0.0) << with.params[i].name;
    EXPECT_EQ(without.params[i].value.cwiseAbs().maxCoeff(), 0.0) << with.params[i].name;
  }
}

TEST(LossAndGradientTest, TotalMixesFinalAndIntermediate) {
  std::mt19937_64 rng(10);
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), 10);
  const Utterance utt = RandomUtterance(rng, "u", 6, 3);
  const LossBreakdown loss =
      LossAndGradient(model, utt, 0.25, ConditioningKind::kExpectation, nullptr);
  ASSERT_EQ(loss.intermediate_losses.size(), 2u);
  const double inter = (loss.intermediate_losses[0] + loss.intermediate_losses[1]) / 2;
  EXPECT_NEAR(loss.total, 0.75 * loss.final_loss + 0.25 * inter, 1e-12);
  EXPECT_THROW(LossAndGradient(model, utt, 0.5, ConditioningKind::kBestPath, nullptr),
               InvalidConfigError);
}

std::vector<Utterance> ToyData(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<Utterance> data;
  for (int i = 0; i < count; ++i) {
    data.push_back(RandomUtterance(rng, "u" + std::to_string(i), 8, 3));
  }
  return data;
}

TEST(TrainTest, LossDecreases) {
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), 11);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-2;
  std::vector<std::pair<int, double>> seen;
  const TrainResult result =
      Train(model, ToyData(11, 12), cfg, [&](int e, double l) { seen.push_back({e, l}); });
  ASSERT_EQ(result.epoch_losses.size(), 30u);
  ASSERT_EQ(seen.size(), 30u);
  EXPECT_EQ(seen.back().first, 30);
  EXPECT_LT(result.epoch_losses.back(), 0.5 * result.epoch_losses.front());
}

TEST(TrainTest, Deterministic) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 5;
  const auto data = ToyData(12, 10);
  EncoderModel a(TinyConfig(), testing::LetterVocab(3), 12);
  EncoderModel b(TinyConfig(), testing::LetterVocab(3), 12);
  const TrainResult ra = Train(a, data, cfg);
  const TrainResult rb = Train(b, data, cfg);
  EXPECT_EQ(ra.epoch_losses, rb.epoch_losses);
  EXPECT_EQ(SerializeModel(a), SerializeModel(b));
}

TEST(TrainTest, RejectsBadInput) {
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), 13);
  TrainConfig cfg;
  EXPECT_THROW(Train(model, {}, cfg), InvalidInputError);
  auto data = ToyData(13, 2);
  data[1].transcript = {1, 1, 1, 1, 1};
  data[1].features = data[1].features.topRows(5);
  EXPECT_THROW(Train(model, data, cfg), InvalidInputError);
  cfg.lambda = 1.0;
  EXPECT_THROW(Train(model, ToyData(13, 2), cfg), InvalidConfigError);
  cfg.lambda = 0.5;
  cfg.conditioning = ConditioningKind::kOracle;
  EXPECT_THROW(Train(model, ToyData(13, 2), cfg), InvalidConfigError);
}

TEST(TrainTest, NonFiniteInputNamesTheEpoch) {
  EncoderModel model(TinyConfig(), testing::LetterVocab(3), 14);
  const auto data = ToyData(14, 3);
  model.output_bias(0, 1) = std::nan("");
  TrainConfig cfg;
  cfg.epochs = 2;
  try {
    Train(model, data, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace selfcond
