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

#include "selfcond/types.h"

#include <cctype>
#include <cmath>
#include <sstream>

#include "selfcond/status.h"

namespace selfcond {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kSizeLimit: return "size limit";
    case ErrorKind::kInfeasible: return "alignment infeasible";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kData: return "data error";
  }
  return "error";
}

Vocabulary::Vocabulary(const std::vector<std::string>& labels)
    : symbols_{std::string(kBlankSymbol)} {
  index_.emplace(std::string(kBlankSymbol), kBlankId);
  for (const auto& label : labels) {
    if (label.empty()) throw InvalidInputError("empty token in vocabulary");
    if (label == kBlankSymbol) {
      throw InvalidInputError("blank symbol \"-\" is reserved for index 0");
    }
    for (char c : label) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        throw InvalidInputError("token contains whitespace: \"" + label + "\"");
      }
    }
    if (!index_.emplace(label, static_cast<int>(symbols_.size())).second) {
      throw InvalidInputError("duplicate token \"" + label + "\"");
    }
    symbols_.push_back(label);
  }
}

const std::string& Vocabulary::Symbol(int id) const {
  if (id < 0 || id >= extended_size()) {
    throw InvalidInputError("token index " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(extended_size()));
  }
  return symbols_[id];
}

int Vocabulary::Id(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) {
    throw InvalidInputError("unknown token \"" + std::string(symbol) + "\"");
  }
  return it->second;
}

bool Vocabulary::Contains(std::string_view symbol) const {
  return index_.count(std::string(symbol)) > 0;
}

int LabelSequence::NumAdjacentRepeats() const {
  int repeats = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++repeats;
  }
  return repeats;
}

Matrix Softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double hi = logits.row(t).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      out(t, k) = std::exp(logits(t, k) - hi);
      sum += out(t, k);
    }
    out.row(t) /= sum;
  }
  return out;
}

PosteriorLattice::PosteriorLattice(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1) throw InvalidInputError("lattice needs T >= 1");
  if (probs_.cols() < 2) throw InvalidInputError("lattice needs K >= 2");
  for (Eigen::Index t = 0; t < probs_.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < probs_.cols(); ++k) {
      const double p = probs_(t, k);
      if (!std::isfinite(p) || p < 0.0) {
        throw InvalidInputError("lattice entry (" + std::to_string(t) + "," +
                                std::to_string(k) + ") is not a probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      throw InvalidInputError("lattice row " + std::to_string(t) +
                              " sums to " + std::to_string(sum));
    }
  }
  log_probs_ = probs_.unaryExpr([](double p) { return std::log(p); });
}

PosteriorLattice PosteriorLattice::FromLogits(const Matrix& logits) {
  return PosteriorLattice(Softmax(logits));
}

LabelSequence Collapse(const AlignmentPath& path, int extended_size) {
  for (int k : path.frames) {
    if (k < 0 || k >= extended_size) {
      throw InvalidInputError("alignment frame label " + std::to_string(k) +
                              " outside [0," + std::to_string(extended_size) +
                              ")");
    }
  }
  return Collapse(path);
}

LabelSequence Collapse(const AlignmentPath& path) {
  LabelSequence out;
  int prev = -1;
  for (int k : path.frames) {
    if (k < 0) throw InvalidInputError("negative alignment label");
    if (k != prev && k != kBlankId) out.labels.push_back(k);
    prev = k;
  }
  return out;
}

namespace {

template <typename Seq>
std::string JoinSymbols(const Seq& seq, const Vocabulary& vocab) {
  std::string out;
  for (int k : seq) {
    if (!out.empty()) out += ' ';
    out += vocab.Symbol(k);
  }
  return out;
}

}  // namespace

std::string ToString(const LabelSequence& seq, const Vocabulary& vocab) {
  return JoinSymbols(seq, vocab);
}

std::string ToString(const AlignmentPath& path, const Vocabulary& vocab) {
  return JoinSymbols(path, vocab);
}

LabelSequence ParseLabels(std::string_view text, const Vocabulary& vocab) {
  std::istringstream in{std::string(text)};
  LabelSequence out;
  std::string token;
  while (in >> token) {
    const int id = vocab.Id(token);
    if (id == kBlankId) {
      throw InvalidInputError("blank symbol in label sequence");
    }
    out.labels.push_back(id);
  }
  return out;
}

}  // namespace selfcond
