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

#ifndef SELFCOND_ALIGN_H_
#define SELFCOND_ALIGN_H_

#include "selfcond/types.h"

namespace selfcond {

struct AlignmentResult {
  AlignmentPath path;
  double log_prob = 0.0;  // sum_t ln z[t, path_t]
};

// Most probable alignment of `target` to `lattice` under the standard CTC
// topology (blank-interleaved states, skips between distinct labels).
// Among equally probable alignments (log-probabilities within 1e-12) the
// lexicographically smallest frame sequence is returned, which places blanks as early as possible.
// Throws InfeasibleError when the target cannot be aligned in T frames.
AlignmentResult ViterbiAlign(const LabelSequence& target,
                             const PosteriorLattice& lattice);

// Enumerates every path and keeps the best member of B^-1(target), with
// the same tie rule. Test oracle; SizeLimitError when K^T > 1e7.
AlignmentResult BruteForceAlign(const LabelSequence& target,
                                const PosteriorLattice& lattice);

}  // namespace selfcond

#endif  // SELFCOND_ALIGN_H_
