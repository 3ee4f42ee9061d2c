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

#ifndef SELFCOND_METRICS_H_
#define SELFCOND_METRICS_H_

#include <limits>
#include <vector>

#include "selfcond/types.h"

namespace selfcond {

// Levenshtein distance, unit costs.
int EditDistance(const LabelSequence& ref, const LabelSequence& hyp);

struct ErrorCounts {
  long errors = 0;
  long ref_length = 0;
  double rate() const {
    if (ref_length == 0) {
      return errors == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(errors) / ref_length;
  }
};

ErrorCounts CountErrors(const std::vector<LabelSequence>& refs,
                        const std::vector<LabelSequence>& hyps);

// Total edits over total reference length; 0 when both are 0.
double ErrorRate(const std::vector<LabelSequence>& refs,
                 const std::vector<LabelSequence>& hyps);

}  // namespace selfcond

#endif  // SELFCOND_METRICS_H_
