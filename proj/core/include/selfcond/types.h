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

#ifndef SELFCOND_TYPES_H_
#define SELFCOND_TYPES_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace selfcond {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kBlankId = 0;
inline constexpr std::string_view kBlankSymbol = "-";

// Label inventory. Index 0 is the reserved blank, labels occupy 1..|V|.
class Vocabulary {
 public:
  Vocabulary() : symbols_{std::string(kBlankSymbol)} {}
  // `labels` excludes the blank.
  explicit Vocabulary(const std::vector<std::string>& labels);

  // |V|, the number of real labels.
  int num_labels() const { return static_cast<int>(symbols_.size()) - 1; }
  // |V'| = |V| + 1.
  int extended_size() const { return static_cast<int>(symbols_.size()); }

  const std::string& Symbol(int id) const;
  int Id(std::string_view symbol) const;
  bool Contains(std::string_view symbol) const;

  // Extended symbol list, blank first.
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::vector<std::string> labels() const {
    return {symbols_.begin() + 1, symbols_.end()};
  }

  bool operator==(const Vocabulary& other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// A collapsed, text-domain sequence. Never contains the blank.
struct LabelSequence {
  std::vector<int> labels;

  LabelSequence() = default;
  LabelSequence(std::initializer_list<int> l) : labels(l) {}
  explicit LabelSequence(std::vector<int> l) : labels(std::move(l)) {}

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  int operator[](std::size_t i) const { return labels[i]; }
  auto begin() const { return labels.begin(); }
  auto end() const { return labels.end(); }

  // Number of positions i with labels[i] == labels[i-1].
  int NumAdjacentRepeats() const;
  // Fewest frames any CTC alignment of this sequence needs.
  int MinFrames() const { return static_cast<int>(size()) + NumAdjacentRepeats(); }

  auto operator<=>(const LabelSequence&) const = default;
};

// Frame-level labels over the extended vocabulary, one per lattice frame.
struct AlignmentPath {
  std::vector<int> frames;

  AlignmentPath() = default;
  AlignmentPath(std::initializer_list<int> f) : frames(f) {}
  explicit AlignmentPath(std::vector<int> f) : frames(std::move(f)) {}

  std::size_t size() const { return frames.size(); }
  int operator[](std::size_t i) const { return frames[i]; }
  auto begin() const { return frames.begin(); }
  auto end() const { return frames.end(); }

  auto operator<=>(const AlignmentPath&) const = default;
};

// Per-frame distributions over V', T rows by K columns.
class PosteriorLattice {
 public:
  static constexpr double kRowTolerance = 1e-6;

  // Validates shape, non-negativity and row normalization.
  explicit PosteriorLattice(Matrix probs);
  // Row-wise softmax of unnormalized scores.
  static PosteriorLattice FromLogits(const Matrix& logits);

  int num_frames() const { return static_cast<int>(probs_.rows()); }
  int num_classes() const { return static_cast<int>(probs_.cols()); }
  double prob(int t, int k) const { return probs_(t, k); }
  double log_prob(int t, int k) const { return log_probs_(t, k); }
  const Matrix& probs() const { return probs_; }
  const Matrix& log_probs() const { return log_probs_; }

 private:
  Matrix probs_;
  Matrix log_probs_;
};

// Row-wise numerically stable softmax.
Matrix Softmax(const Matrix& logits);

// The CTC collapsing map B: merge runs of equal labels, then drop blanks.
// Throws InvalidInputError when a frame is outside [0, extended_size).
LabelSequence Collapse(const AlignmentPath& path, int extended_size);
// Same, without a range check beyond non-negativity.
LabelSequence Collapse(const AlignmentPath& path);

// Space-joined symbols.
std::string ToString(const LabelSequence& seq, const Vocabulary& vocab);
std::string ToString(const AlignmentPath& path, const Vocabulary& vocab);
// Parses whitespace-separated symbols; the blank symbol is rejected.
LabelSequence ParseLabels(std::string_view text, const Vocabulary& vocab);

}  // namespace selfcond

#endif  // SELFCOND_TYPES_H_
