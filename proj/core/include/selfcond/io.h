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

#ifndef SELFCOND_IO_H_
#define SELFCOND_IO_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>
#include <string_view>

#include "selfcond/types.h"

namespace selfcond {

// One token per line, first line is the blank "-".
Vocabulary ReadVocabulary(const std::filesystem::path& file);
void WriteVocabulary(const Vocabulary& vocab, const std::filesystem::path& file);

// Binary matrix layout shared by lattices ("CTCL") and features ("FEAT"):
// 4 magic bytes, u32le rows, u32le cols, rows*cols f32le row-major.
inline constexpr std::string_view kLatticeMagic = "CTCL";
inline constexpr std::string_view kFeatureMagic = "FEAT";

std::string EncodeMatrix(const Matrix& m, std::string_view magic);
Matrix DecodeMatrix(std::string_view bytes, std::string_view magic);

void WriteMatrixFile(const Matrix& m, std::string_view magic,
                     const std::filesystem::path& file);
Matrix ReadMatrixFile(const std::filesystem::path& file, std::string_view magic);

void WriteLattice(const PosteriorLattice& lattice,
                  const std::filesystem::path& file);
// Rows are renormalized after the float32 round trip.
PosteriorLattice ReadLattice(const std::filesystem::path& file);

// "id<TAB>space-joined tokens" per line, sorted by id on write. Reading
// rejects lines without a tab and repeated ids.
using TranscriptMap = std::map<std::string, LabelSequence>;
TranscriptMap ReadTranscripts(const std::filesystem::path& file,
                              const Vocabulary& vocab);
void WriteTranscripts(const TranscriptMap& transcripts, const Vocabulary& vocab,
                      const std::filesystem::path& file);

std::string ReadTextFile(const std::filesystem::path& file);
// Throws DataError naming every file in `files` that does not exist.
void RequireFiles(const std::vector<std::filesystem::path>& files);
void WriteTextFile(const std::filesystem::path& file, std::string_view text);

}  // namespace selfcond

#endif  // SELFCOND_IO_H_
