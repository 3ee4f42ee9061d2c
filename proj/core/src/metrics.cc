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

#include "selfcond/metrics.h"

#include <algorithm>

#include "selfcond/status.h"

namespace selfcond {

int EditDistance(const LabelSequence& ref, const LabelSequence& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // Rolling single row of the (n+1) x (m+1) table.
  std::vector<int> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int up = row[j];
      const int sub = diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      row[j] = std::min({sub, up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[m];
}

ErrorCounts CountErrors(const std::vector<LabelSequence>& refs,
                        const std::vector<LabelSequence>& hyps) {
  if (refs.size() != hyps.size()) {
    throw InvalidInputError("reference/hypothesis count mismatch: " +
                            std::to_string(refs.size()) + " vs " +
                            std::to_string(hyps.size()));
  }
  ErrorCounts counts;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    counts.errors += EditDistance(refs[i], hyps[i]);
    counts.ref_length += static_cast<long>(refs[i].size());
  }
  return counts;
}

double ErrorRate(const std::vector<LabelSequence>& refs,
                 const std::vector<LabelSequence>& hyps) {
  return CountErrors(refs, hyps).rate();
}

}  // namespace selfcond
