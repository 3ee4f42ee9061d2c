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

#ifndef SELFCOND_LOG_MATH_H_
#define SELFCOND_LOG_MATH_H_

#include <algorithm>
#include <cmath>
#include <limits>

namespace selfcond {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogSumExp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double SafeLog(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

}  // namespace selfcond

#endif  // SELFCOND_LOG_MATH_H_
