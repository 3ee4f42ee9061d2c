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

#include "selfcond/metrics.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "selfcond/status.h"
#include "test_util.h"

namespace selfcond {
namespace {

LabelSequence Word(const std::string& s) {
  LabelSequence seq;
  for (char c : s) seq.labels.push_back(c - 'a' + 1);
  return seq;
}

TEST(EditDistanceTest, Examples) {
  EXPECT_EQ(EditDistance(Word("abc"), Word("abc")), 0);
  EXPECT_EQ(EditDistance(Word("abc"), Word("")), 3);
  EXPECT_EQ(EditDistance(Word(""), Word("abc")), 3);
  EXPECT_EQ(EditDistance(Word("kitten"), Word("sitting")), 3);
}

// Full-table Levenshtein, written independently of the rolling-row version.
int TableDistance(const LabelSequence& r, const LabelSequence& h) {
  std::vector<std::vector<int>> d(r.size() + 1, std::vector<int>(h.size() + 1));
  for (std::size_t i = 0; i <= r.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= h.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= r.size(); ++i) {
    for (std::size_t j = 1; j <= h.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (r[i - 1] != h[j - 1])});
    }
  }
  return d[r.size()][h.size()];
}

TEST(EditDistanceTest, IsAMetric) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(0, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const LabelSequence x = testing::RandomLabels(rng, len(rng), 4);
    const LabelSequence y = testing::RandomLabels(rng, len(rng), 4);
    const LabelSequence z = testing::RandomLabels(rng, len(rng), 4);
    const int dxy = EditDistance(x, y);
    EXPECT_EQ(dxy, TableDistance(x, y));
    EXPECT_EQ(dxy, EditDistance(y, x));
    EXPECT_EQ(EditDistance(x, x), 0);
    EXPECT_EQ(dxy == 0, x == y);
    EXPECT_LE(EditDistance(x, z), dxy + EditDistance(y, z));
  }
}

TEST(ErrorRateTest, Examples) {
  EXPECT_DOUBLE_EQ(ErrorRate({Word("ab")}, {Word("ab")}), 0.0);
  EXPECT_DOUBLE_EQ(ErrorRate({Word("ab")}, {Word("a")}), 0.5);
  EXPECT_DOUBLE_EQ(ErrorRate({Word("ab"), Word("cd")}, {Word("ab"), Word("ce")}),
                   0.25);
}

TEST(ErrorRateTest, EmptyReferences) {
  EXPECT_DOUBLE_EQ(ErrorRate({Word("")}, {Word("")}), 0.0);
  EXPECT_DOUBLE_EQ(ErrorRate({}, {}), 0.0);
  EXPECT_TRUE(std::isinf(ErrorRate({Word("")}, {Word("a")})));
}

TEST(ErrorRateTest, LengthMismatchThrows) {
  EXPECT_THROW(ErrorRate({Word("a")}, {}), InvalidInputError);
}

}  // namespace
}  // namespace selfcond
