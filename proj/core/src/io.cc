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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "selfcond/status.h"

namespace selfcond {

namespace fs = std::filesystem;

void RequireFiles(const std::vector<fs::path>& files) {
  std::string missing;
  for (const auto& f : files) {
    if (fs::exists(f)) continue;
    missing += (missing.empty() ? "" : ", ") + f.string();
  }
  if (!missing.empty()) throw DataError("missing artifacts: " + missing);
}

std::string ReadTextFile(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const fs::path& file, std::string_view text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for " + file.string());
}

Vocabulary ReadVocabulary(const fs::path& file) {
  std::istringstream in(ReadTextFile(file));
  std::string line;
  std::vector<std::string> labels;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line != kBlankSymbol) {
        throw DataError(file.string() + ": first line must be the blank \"-\"");
      }
      first = false;
      continue;
    }
    if (line.empty()) continue;
    labels.push_back(line);
  }
  if (first) throw DataError(file.string() + ": empty vocabulary file");
  try {
    return Vocabulary(labels);
  } catch (const InvalidInputError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

void WriteVocabulary(const Vocabulary& vocab, const fs::path& file) {
  std::string text;
  for (const auto& s : vocab.symbols()) text += s + "\n";
  WriteTextFile(file, text);
}

namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t GetU32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string EncodeMatrix(const Matrix& m, std::string_view magic) {
  std::string out(magic);
  PutU32(out, static_cast<std::uint32_t>(m.rows()));
  PutU32(out, static_cast<std::uint32_t>(m.cols()));
  out.reserve(out.size() + 4 * m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
    }
  }
  return out;
}

Matrix DecodeMatrix(std::string_view bytes, std::string_view magic) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != magic) {
    throw DataError("bad matrix header, expected magic \"" +
                    std::string(magic) + "\"");
  }
  const std::uint32_t rows = GetU32(bytes, 4);
  const std::uint32_t cols = GetU32(bytes, 8);
  const std::uint64_t expected = 12 + 4ull * rows * cols;
  if (bytes.size() != expected) {
    throw DataError("matrix payload size " + std::to_string(bytes.size()) +
                    " does not match header (" + std::to_string(expected) + ")");
  }
  Matrix m(rows, cols);
  std::size_t offset = 12;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c, offset += 4) {
      m(r, c) = std::bit_cast<float>(GetU32(bytes, offset));
    }
  }
  return m;
}

void WriteMatrixFile(const Matrix& m, std::string_view magic,
                     const fs::path& file) {
  WriteTextFile(file, EncodeMatrix(m, magic));
}

Matrix ReadMatrixFile(const fs::path& file, std::string_view magic) {
  try {
    return DecodeMatrix(ReadTextFile(file), magic);
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

void WriteLattice(const PosteriorLattice& lattice, const fs::path& file) {
  WriteMatrixFile(lattice.probs(), kLatticeMagic, file);
}

PosteriorLattice ReadLattice(const fs::path& file) {
  Matrix m = ReadMatrixFile(file, kLatticeMagic);
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    const double sum = m.row(t).sum();
    if (sum > 0.0 && std::abs(sum - 1.0) < 1e-4) m.row(t) /= sum;
  }
  try {
    return PosteriorLattice(std::move(m));
  } catch (const InvalidInputError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

TranscriptMap ReadTranscripts(const fs::path& file, const Vocabulary& vocab) {
  std::istringstream in(ReadTextFile(file));
  TranscriptMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string where = file.string() + ":" + std::to_string(lineno) + ": ";
    if (tab == std::string::npos || tab == 0) {
      throw DataError(where + "expected <id><TAB><tokens>");
    }
    const std::string id = line.substr(0, tab);
    const std::string text = line.substr(tab + 1);
    if (out.count(id) != 0) throw DataError(where + "duplicate id " + id);
    try {
      out[id] = ParseLabels(text, vocab);
    } catch (const InvalidInputError& e) {
      throw DataError(where + e.what());
    }
  }
  return out;
}

void WriteTranscripts(const TranscriptMap& transcripts, const Vocabulary& vocab,
                      const fs::path& file) {
  std::string text;
  for (const auto& [id, seq] : transcripts) {
    text += id + "\t" + ToString(seq, vocab) + "\n";
  }
  WriteTextFile(file, text);
}

}  // namespace selfcond
