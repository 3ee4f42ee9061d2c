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

#include "selfcond/align.h"

#include <algorithm>
#include <string>
#include <vector>

#include "selfcond/ctc.h"
#include "selfcond/log_math.h"
#include "selfcond/status.h"

namespace selfcond {

namespace {

// Scores are sums of T logs taken in different orders by the two routes, so
// mathematically equal alignments can differ in the last bits.
constexpr double kTieTolerance = 1e-12;

void CheckTarget(const LabelSequence& target, const PosteriorLattice& lattice) {
  for (int k : target) {
    if (k <= kBlankId || k >= lattice.num_classes()) {
      throw InvalidInputError("alignment target label " + std::to_string(k) +
                              " is not a non-blank lattice class");
    }
  }
}

[[noreturn]] void ThrowInfeasible(const LabelSequence& target, int num_frames) {
  throw InfeasibleError("cannot align " + std::to_string(target.size()) +
                        " labels (needs " + std::to_string(target.MinFrames()) +
                        " frames) to " + std::to_string(num_frames) +
                        " frames");
}

}  // namespace

AlignmentResult ViterbiAlign(const LabelSequence& target,
                             const PosteriorLattice& lattice) {
  CheckTarget(target, lattice);
  const int num_frames = lattice.num_frames();
  if (!IsFeasible(target, num_frames)) ThrowInfeasible(target, num_frames);

  const std::vector<int> ext = ExtendWithBlanks(target);
  const int num_states = static_cast<int>(ext.size());
  auto can_skip_into = [&](int s) {
    return s >= 2 && ext[s] != kBlankId && ext[s] != ext[s - 2];
  };

  // best(t, s): max log-probability of frames t+1..T-1 given state s at t.
  Matrix best = Matrix::Constant(num_frames, num_states, kLogZero);
  best(num_frames - 1, num_states - 1) = 0.0;
  if (num_states > 1) best(num_frames - 1, num_states - 2) = 0.0;
  for (int t = num_frames - 2; t >= 0; --t) {
    for (int s = 0; s < num_states; ++s) {
      double v = best(t + 1, s) + lattice.log_prob(t + 1, ext[s]);
      if (s + 1 < num_states) {
        v = std::max(v, best(t + 1, s + 1) + lattice.log_prob(t + 1, ext[s + 1]));
      }
      if (s + 2 < num_states && can_skip_into(s + 2)) {
        v = std::max(v, best(t + 1, s + 2) + lattice.log_prob(t + 1, ext[s + 2]));
      }
      best(t, s) = v;
    }
  }

  // Forward pass: at each frame take the successor on an optimal path,
  // preferring the smaller label id on ties.
  AlignmentResult result;
  result.path.frames.resize(num_frames);
  auto pick = [&](int t, std::initializer_list<int> candidates) {
    double top = kLogZero;
    for (int s : candidates) top = std::max(top, lattice.log_prob(t, ext[s]) + best(t, s));
    if (top == kLogZero) return -1;
    int chosen = -1;
    for (int s : candidates) {
      const double v = lattice.log_prob(t, ext[s]) + best(t, s);
      if (v >= top - kTieTolerance && (chosen < 0 || ext[s] < ext[chosen])) chosen = s;
    }
    return chosen;
  };

  int state = num_states > 1 ? pick(0, {0, 1}) : pick(0, {0});
  if (state < 0) ThrowInfeasible(target, num_frames);
  result.path.frames[0] = ext[state];
  result.log_prob = lattice.log_prob(0, ext[state]);
  for (int t = 1; t < num_frames; ++t) {
    const int s = state;
    int next;
    if (s + 2 < num_states && can_skip_into(s + 2)) {
      next = pick(t, {s, s + 1, s + 2});
    } else if (s + 1 < num_states) {
      next = pick(t, {s, s + 1});
    } else {
      next = pick(t, {s});
    }
    if (next < 0) ThrowInfeasible(target, num_frames);
    state = next;
    result.path.frames[t] = ext[state];
    result.log_prob += lattice.log_prob(t, ext[state]);
  }
  return result;
}

AlignmentResult BruteForceAlign(const LabelSequence& target,
                                const PosteriorLattice& lattice) {
  CheckTarget(target, lattice);
  std::vector<AlignmentResult> members;
  double top = kLogZero;
  ForEachAlignment(lattice.num_frames(), lattice.num_classes(),
                   [&](const AlignmentPath& path) {
                     if (Collapse(path) != target) return;
                     const double lp = LogPathProb(lattice, path);
                     if (lp == kLogZero) return;
                     members.push_back({path, lp});
                     top = std::max(top, lp);
                   });
  // Enumeration is lexicographic, so the first near-maximizer wins ties.
  for (const AlignmentResult& m : members) {
    if (m.log_prob >= top - kTieTolerance) return m;
  }
  ThrowInfeasible(target, lattice.num_frames());
}

}  // namespace selfcond
