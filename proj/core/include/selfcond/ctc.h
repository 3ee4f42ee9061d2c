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

#ifndef SELFCOND_CTC_H_
#define SELFCOND_CTC_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "selfcond/types.h"

namespace selfcond {

// Enumeration oracles refuse lattices with more than this many paths.
inline constexpr std::uint64_t kMaxEnumeratedPaths = 10'000'000;

// Number of alignment paths K^T, saturating at UINT64_MAX.
std::uint64_t NumAlignmentPaths(int num_frames, int num_classes);

// Visits every path in V'^T in lexicographic order (blank-first).
// Throws SizeLimitError above kMaxEnumeratedPaths.
void ForEachAlignment(int num_frames, int num_classes,
                      const std::function<void(const AlignmentPath&)>& visit);

// True when `target` has at least one alignment of length `num_frames`.
inline bool IsFeasible(const LabelSequence& target, int num_frames) {
  return target.MinFrames() <= num_frames;
}

// prod_t z[t, a_t].
double PathProb(const PosteriorLattice& lattice, const AlignmentPath& path);
double LogPathProb(const PosteriorLattice& lattice, const AlignmentPath& path);

// Blank-interleaved extended target (-, y1, -, y2, ..., -), length 2L+1.
std::vector<int> ExtendWithBlanks(const LabelSequence& target);

// p(target | lattice) summed over all alignments by the forward recursion.
// Returns 0 (or kLogZero) when the target cannot fit in T frames.
double LabelProb(const PosteriorLattice& lattice, const LabelSequence& target);
double LogLabelProb(const PosteriorLattice& lattice,
                    const LabelSequence& target);

// Same quantity by enumerating all K^T paths. Test oracle.
double BruteForceLabelProb(const PosteriorLattice& lattice,
                           const LabelSequence& target);

enum class GradientSpace { kProbabilities, kLogits };

struct CtcLossResult {
  double loss = 0.0;  // -ln p(target | lattice), nats
  Matrix grad;        // T x K
  GradientSpace space = GradientSpace::kProbabilities;
};

// Loss and d loss / d probs by log-space forward-backward.
// Throws InfeasibleError when the target has zero probability.
CtcLossResult CtcLoss(const PosteriorLattice& lattice,
                      const LabelSequence& target);

// `logits` are pre-softmax scores; the gradient is d loss / d logits.
CtcLossResult CtcLossFromLogits(const Matrix& logits,
                                const LabelSequence& target);

// (1 - lambda) * final + lambda / |inters| * sum(inters).
// Throws InvalidConfigError for lambda outside (0, 1) or no intermediates.
double InterCtcLoss(double final_loss, std::span<const double> inter_losses,
                    double lambda);
double InterCtcLoss(const CtcLossResult& final_result,
                    std::span<const CtcLossResult> inter_results,
                    double lambda);

}  // namespace selfcond

#endif  // SELFCOND_CTC_H_
