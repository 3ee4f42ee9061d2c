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

#include "selfcond/ctc.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "selfcond/log_math.h"
#include "selfcond/status.h"

namespace selfcond {

std::uint64_t NumAlignmentPaths(int num_frames, int num_classes) {
  std::uint64_t n = 1;
  for (int t = 0; t < num_frames; ++t) {
    if (n > std::numeric_limits<std::uint64_t>::max() /
                static_cast<std::uint64_t>(num_classes)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= static_cast<std::uint64_t>(num_classes);
  }
  return n;
}

void ForEachAlignment(int num_frames, int num_classes,
                      const std::function<void(const AlignmentPath&)>& visit) {
  const std::uint64_t total = NumAlignmentPaths(num_frames, num_classes);
  if (total > kMaxEnumeratedPaths) {
    throw SizeLimitError("enumeration of " + std::to_string(num_classes) + "^" +
                         std::to_string(num_frames) +
                         " paths exceeds the 1e7 guard");
  }
  AlignmentPath path(std::vector<int>(num_frames, 0));
  while (true) {
    visit(path);
    // Odometer increment, last frame fastest.
    int t = num_frames - 1;
    while (t >= 0 && path.frames[t] == num_classes - 1) {
      path.frames[t] = 0;
      --t;
    }
    if (t < 0) break;
    ++path.frames[t];
  }
}

namespace {

void CheckPath(const PosteriorLattice& lattice, const AlignmentPath& path) {
  if (static_cast<int>(path.size()) != lattice.num_frames()) {
    throw InvalidInputError("path length " + std::to_string(path.size()) +
                            " != lattice frames " +
                            std::to_string(lattice.num_frames()));
  }
  for (int k : path) {
    if (k < 0 || k >= lattice.num_classes()) {
      throw InvalidInputError("path label " + std::to_string(k) +
                              " outside lattice classes");
    }
  }
}

void CheckTarget(const LabelSequence& target, int num_classes) {
  for (int k : target) {
    if (k == kBlankId) throw InvalidInputError("target contains the blank");
    if (k < 0 || k >= num_classes) {
      throw InvalidInputError("target label " + std::to_string(k) +
                              " outside lattice classes");
    }
  }
}

// Log-space CTC forward/backward tables over the extended target.
struct Trellis {
  std::vector<int> ext;  // extended labels, size S
  Matrix alpha;          // includes emission at t
  Matrix alpha_in;       // excludes emission at t
  Matrix beta;           // frames t+1..T-1 given state s at t
  double log_prob = kLogZero;
};

bool CanSkip(const std::vector<int>& ext, int s) {
  return s >= 2 && ext[s] != kBlankId && ext[s] != ext[s - 2];
}

Trellis RunTrellis(const Matrix& log_probs, const LabelSequence& target,
                   bool with_backward) {
  Trellis tr;
  tr.ext = ExtendWithBlanks(target);
  const int num_frames = static_cast<int>(log_probs.rows());
  const int num_states = static_cast<int>(tr.ext.size());
  tr.alpha = Matrix::Constant(num_frames, num_states, kLogZero);
  tr.alpha_in = Matrix::Constant(num_frames, num_states, kLogZero);

  tr.alpha_in(0, 0) = 0.0;
  if (num_states > 1) tr.alpha_in(0, 1) = 0.0;
  for (int t = 0; t < num_frames; ++t) {
    for (int s = 0; s < num_states; ++s) {
      if (t > 0) {
        double acc = tr.alpha(t - 1, s);
        if (s >= 1) acc = LogSumExp(acc, tr.alpha(t - 1, s - 1));
        if (CanSkip(tr.ext, s)) acc = LogSumExp(acc, tr.alpha(t - 1, s - 2));
        tr.alpha_in(t, s) = acc;
      }
      if (tr.alpha_in(t, s) != kLogZero) {
        tr.alpha(t, s) = tr.alpha_in(t, s) + log_probs(t, tr.ext[s]);
      }
    }
  }
  tr.log_prob = tr.alpha(num_frames - 1, num_states - 1);
  if (num_states > 1) {
    tr.log_prob = LogSumExp(tr.log_prob, tr.alpha(num_frames - 1, num_states - 2));
  }
  if (!with_backward) return tr;

  tr.beta = Matrix::Constant(num_frames, num_states, kLogZero);
  tr.beta(num_frames - 1, num_states - 1) = 0.0;
  if (num_states > 1) tr.beta(num_frames - 1, num_states - 2) = 0.0;
  for (int t = num_frames - 2; t >= 0; --t) {
    for (int s = 0; s < num_states; ++s) {
      double acc = tr.beta(t + 1, s) + log_probs(t + 1, tr.ext[s]);
      if (s + 1 < num_states) {
        acc = LogSumExp(acc, tr.beta(t + 1, s + 1) + log_probs(t + 1, tr.ext[s + 1]));
      }
      if (s + 2 < num_states && CanSkip(tr.ext, s + 2)) {
        acc = LogSumExp(acc, tr.beta(t + 1, s + 2) + log_probs(t + 1, tr.ext[s + 2]));
      }
      tr.beta(t, s) = acc;
    }
  }
  return tr;
}

Matrix LogSoftmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double hi = logits.row(t).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      sum += std::exp(logits(t, k) - hi);
    }
    const double norm = hi + std::log(sum);
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      out(t, k) = logits(t, k) - norm;
    }
  }
  return out;
}

// Per (t, k): log of sum over states s with ext[s] == k of table(t,s)+beta(t,s).
Matrix StateOccupancy(const Trellis& tr, const Matrix& table, int num_classes) {
  const int num_frames = static_cast<int>(table.rows());
  Matrix occ = Matrix::Constant(num_frames, num_classes, kLogZero);
  for (int t = 0; t < num_frames; ++t) {
    for (int s = 0; s < static_cast<int>(tr.ext.size()); ++s) {
      const double v = table(t, s) + tr.beta(t, s);
      if (v != kLogZero) occ(t, tr.ext[s]) = LogSumExp(occ(t, tr.ext[s]), v);
    }
  }
  return occ;
}

void ThrowUnreachable(const LabelSequence& target, int num_frames) {
  throw InfeasibleError("CTC loss is infinite: target of length " +
                        std::to_string(target.size()) + " (needs " +
                        std::to_string(target.MinFrames()) +
                        " frames) has zero probability over " +
                        std::to_string(num_frames) + " frames");
}

}  // namespace

double LogPathProb(const PosteriorLattice& lattice, const AlignmentPath& path) {
  CheckPath(lattice, path);
  double acc = 0.0;
  for (int t = 0; t < lattice.num_frames(); ++t) {
    acc += lattice.log_prob(t, path[t]);
  }
  return acc;
}

double PathProb(const PosteriorLattice& lattice, const AlignmentPath& path) {
  CheckPath(lattice, path);
  double acc = 1.0;
  for (int t = 0; t < lattice.num_frames(); ++t) acc *= lattice.prob(t, path[t]);
  return acc;
}

std::vector<int> ExtendWithBlanks(const LabelSequence& target) {
  std::vector<int> ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(kBlankId);
  for (int k : target) {
    ext.push_back(k);
    ext.push_back(kBlankId);
  }
  return ext;
}

double LogLabelProb(const PosteriorLattice& lattice,
                    const LabelSequence& target) {
  CheckTarget(target, lattice.num_classes());
  if (!IsFeasible(target, lattice.num_frames())) return kLogZero;
  return RunTrellis(lattice.log_probs(), target, false).log_prob;
}

double LabelProb(const PosteriorLattice& lattice, const LabelSequence& target) {
  const double lp = LogLabelProb(lattice, target);
  return lp == kLogZero ? 0.0 : std::exp(lp);
}

double BruteForceLabelProb(const PosteriorLattice& lattice,
                           const LabelSequence& target) {
  CheckTarget(target, lattice.num_classes());
  double total = 0.0;
  ForEachAlignment(lattice.num_frames(), lattice.num_classes(),
                   [&](const AlignmentPath& path) {
                     if (Collapse(path) == target) total += PathProb(lattice, path);
                   });
  return total;
}

CtcLossResult CtcLoss(const PosteriorLattice& lattice,
                      const LabelSequence& target) {
  CheckTarget(target, lattice.num_classes());
  if (!IsFeasible(target, lattice.num_frames())) {
    ThrowUnreachable(target, lattice.num_frames());
  }
  const Trellis tr = RunTrellis(lattice.log_probs(), target, true);
  if (tr.log_prob == kLogZero) ThrowUnreachable(target, lattice.num_frames());

  CtcLossResult result;
  result.loss = -tr.log_prob;
  result.space = GradientSpace::kProbabilities;
  // d(-ln p)/dz[t,k] = -(1/p) * sum_{s: ext[s]=k} alpha_in(t,s) beta(t,s)
  const Matrix occ = StateOccupancy(tr, tr.alpha_in, lattice.num_classes());
  result.grad = occ.unaryExpr([&](double v) {
    return v == kLogZero ? 0.0 : -std::exp(v - tr.log_prob);
  });
  return result;
}

CtcLossResult CtcLossFromLogits(const Matrix& logits,
                                const LabelSequence& target) {
  if (logits.rows() < 1 || logits.cols() < 2) {
    throw InvalidInputError("logits need T >= 1 and K >= 2");
  }
  if (!logits.allFinite()) throw NumericError("non-finite logits");
  const int num_frames = static_cast<int>(logits.rows());
  const int num_classes = static_cast<int>(logits.cols());
  CheckTarget(target, num_classes);
  if (!IsFeasible(target, num_frames)) ThrowUnreachable(target, num_frames);

  const Matrix log_probs = LogSoftmax(logits);
  const Trellis tr = RunTrellis(log_probs, target, true);
  if (tr.log_prob == kLogZero) ThrowUnreachable(target, num_frames);

  CtcLossResult result;
  result.loss = -tr.log_prob;
  result.space = GradientSpace::kLogits;
  // z[t,k] - posterior occupancy of label k at frame t.
  const Matrix occ = StateOccupancy(tr, tr.alpha, num_classes);
  result.grad.resize(num_frames, num_classes);
  for (int t = 0; t < num_frames; ++t) {
    for (int k = 0; k < num_classes; ++k) {
      const double gamma =
          occ(t, k) == kLogZero ? 0.0 : std::exp(occ(t, k) - tr.log_prob);
      result.grad(t, k) = std::exp(log_probs(t, k)) - gamma;
    }
  }
  return result;
}

double InterCtcLoss(double final_loss, std::span<const double> inter_losses,
                    double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw InvalidConfigError("mixing weight lambda must lie in (0,1), got " +
                             std::to_string(lambda));
  }
  if (inter_losses.empty()) {
    throw InvalidConfigError("intermediate CTC loss needs at least one "
                             "intermediate layer");
  }
  const double sum =
      std::accumulate(inter_losses.begin(), inter_losses.end(), 0.0);
  return (1.0 - lambda) * final_loss +
         lambda / static_cast<double>(inter_losses.size()) * sum;
}

double InterCtcLoss(const CtcLossResult& final_result,
                    std::span<const CtcLossResult> inter_results,
                    double lambda) {
  std::vector<double> losses;
  losses.reserve(inter_results.size());
  for (const auto& r : inter_results) losses.push_back(r.loss);
  return InterCtcLoss(final_result.loss, losses, lambda);
}

}  // namespace selfcond
