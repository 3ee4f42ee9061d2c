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

#ifndef SELFCOND_DECODE_H_
#define SELFCOND_DECODE_H_

#include <optional>
#include <vector>

#include "selfcond/lm.h"
#include "selfcond/types.h"

namespace selfcond {

// Shallow-fusion beam search settings.
//   score = ln p_ctc(Y) + lm_weight * ln p_lm(Y) + length_bonus * |Y|
// Finished hypotheses include the LM end-of-sentence term.
struct BeamConfig {
  int width = 10;
  double lm_weight = 0.5;
  double length_bonus = 0.5;
  // When set, labels with ln z[t,k] below this floor are not expanded at t.
  std::optional<double> prune_threshold;

  void Validate() const;
};

struct Hypothesis {
  LabelSequence prefix;
  double log_p_blank = 0.0;
  double log_p_nonblank = 0.0;
  double lm_log_prob = 0.0;  // ln p_lm(prefix) without the end event
  double score = 0.0;

  double log_prob() const;
};

struct ScoredSequence {
  LabelSequence labels;
  double score = 0.0;     // fused score
  double log_prob = 0.0;  // CTC marginal ln p(labels | lattice)
};

struct BestPathResult {
  LabelSequence labels;
  AlignmentPath path;
};

// Per-frame argmax (lowest index wins ties), then collapse.
AlignmentPath ArgmaxPath(const PosteriorLattice& lattice);
BestPathResult BestPathDecode(const PosteriorLattice& lattice);

// CTC prefix beam search with optional n-gram shallow fusion. Returns up to
// cfg.width finished hypotheses, best first. Ties are broken toward the
// lexicographically smaller (then shorter) label sequence.
std::vector<ScoredSequence> PrefixBeamSearch(const PosteriorLattice& lattice,
                                             const NGramModel* lm,
                                             const BeamConfig& cfg);

// Scores every collapsible label sequence exactly by path enumeration.
// Same fusion score and ordering as PrefixBeamSearch. Test oracle; throws
// SizeLimitError when K^T > 1e7.
std::vector<ScoredSequence> ExhaustiveSearch(const PosteriorLattice& lattice,
                                             const NGramModel* lm,
                                             double lm_weight,
                                             double length_bonus);

// Strict weak ordering used by both searches: higher score first, then
// lexicographically smaller labels.
bool RanksBefore(const ScoredSequence& a, const ScoredSequence& b);

}  // namespace selfcond

#endif  // SELFCOND_DECODE_H_
