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

#include "selfcond/io.h"

#include <cstring>
#include <filesystem>

#include "gtest/gtest.h"
#include "selfcond/status.h"
#include "test_util.h"

namespace selfcond {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("selfcond_io_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(IoTest, VocabularyRoundTrip) {
  const Vocabulary v({"a", "bb", "c"});
  WriteVocabulary(v, dir_ / "vocab.txt");
  EXPECT_EQ(ReadTextFile(dir_ / "vocab.txt"), "-\na\nbb\nc\n");
  EXPECT_EQ(ReadVocabulary(dir_ / "vocab.txt").labels(), v.labels());
}

TEST_F(IoTest, VocabularyNeedsBlankFirst) {
  WriteTextFile(dir_ / "v.txt", "a\n-\n");
  EXPECT_THROW(ReadVocabulary(dir_ / "v.txt"), DataError);
  WriteTextFile(dir_ / "w.txt", "");
  EXPECT_THROW(ReadVocabulary(dir_ / "w.txt"), DataError);
  WriteTextFile(dir_ / "x.txt", "-\na\na\n");
  EXPECT_THROW(ReadVocabulary(dir_ / "x.txt"), DataError);
}

TEST(MatrixCodecTest, ByteLayout) {
  Matrix m(2, 3);
  m << 0.5, 0.25, 0.25, 1.0, 0.0, 0.0;
  const std::string bytes = EncodeMatrix(m, kLatticeMagic);
  ASSERT_EQ(bytes.size(), 4u + 4u + 4u + 6u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "CTCL");
  const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(u[4], 2);  // T, little endian
  EXPECT_EQ(u[5] | u[6] | u[7], 0);
  EXPECT_EQ(u[8], 3);  // K
  float first;
  std::memcpy(&first, bytes.data() + 12, 4);
  EXPECT_EQ(first, 0.5f);
  float fourth;
  std::memcpy(&fourth, bytes.data() + 12 + 3 * 4, 4);
  EXPECT_EQ(fourth, 1.0f);  // row-major
  EXPECT_EQ(DecodeMatrix(bytes, kLatticeMagic), m);
}

TEST(MatrixCodecTest, RejectsBadInput) {
  Matrix m = Matrix::Ones(1, 2);
  const std::string bytes = EncodeMatrix(m, kFeatureMagic);
  EXPECT_THROW(DecodeMatrix(bytes, kLatticeMagic), DataError);
  EXPECT_THROW(DecodeMatrix(bytes.substr(0, bytes.size() - 1), kFeatureMagic),
               DataError);
  EXPECT_THROW(DecodeMatrix("FEA", kFeatureMagic), DataError);
}

TEST_F(IoTest, LatticeRoundTripRenormalizes) {
  std::mt19937_64 rng(3);
  const PosteriorLattice z = testing::RandomLattice(rng, 6, 4);
  WriteLattice(z, dir_ / "z.ctcl");
  const PosteriorLattice back = ReadLattice(dir_ / "z.ctcl");
  ASSERT_EQ(back.num_frames(), 6);
  ASSERT_EQ(back.num_classes(), 4);
  for (int t = 0; t < 6; ++t) {
    EXPECT_NEAR(back.probs().row(t).sum(), 1.0, 1e-12);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(back.prob(t, k), z.prob(t, k), 1e-6);
  }
}

TEST_F(IoTest, TranscriptsRoundTrip) {
  const Vocabulary v = testing::LetterVocab(3);
  TranscriptMap m = {{"u2", LabelSequence{1, 2}}, {"u1", LabelSequence{}},
                     {"u3", LabelSequence{3, 3, 1}}};
  WriteTranscripts(m, v, dir_ / "t.tsv");
  EXPECT_EQ(ReadTextFile(dir_ / "t.tsv"), "u1\t\nu2\ta b\nu3\tc c a\n");
  EXPECT_EQ(ReadTranscripts(dir_ / "t.tsv", v), m);
}

TEST_F(IoTest, TranscriptErrorsNameTheLine) {
  const Vocabulary v = testing::LetterVocab(2);
  WriteTextFile(dir_ / "t.tsv", "u1\ta\nu2 b\n");
  try {
    ReadTranscripts(dir_ / "t.tsv", v);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  WriteTextFile(dir_ / "u.tsv", "u1\tz\n");
  EXPECT_THROW(ReadTranscripts(dir_ / "u.tsv", v), DataError);
  WriteTextFile(dir_ / "d.tsv", "u1\ta\nu1\tb\n");
  EXPECT_THROW(ReadTranscripts(dir_ / "d.tsv", v), DataError);
}

TEST_F(IoTest, MissingFileIsDataError) {
  EXPECT_THROW(ReadTextFile(dir_ / "absent"), DataError);
}

}  // namespace
}  // namespace selfcond
