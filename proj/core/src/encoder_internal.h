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

#ifndef SELFCOND_SRC_ENCODER_INTERNAL_H_
#define SELFCOND_SRC_ENCODER_INTERNAL_H_

#include <vector>

#include "selfcond/model.h"

namespace selfcond::internal {

// Row t of the result is [x(t-r) ... x(t+r)], zero outside [0, T).
Matrix Unfold(const Matrix& x, int radius);
// Adjoint of Unfold.
Matrix Fold(const Matrix& unfolded, int radius, int dim);

// Activations kept for backpropagation.
struct ForwardCache {
  std::vector<Matrix> layer_inputs;  // input to layer n (index n-1)
  std::vector<Matrix> unfolded;      // Unfold(layer_inputs[n-1])
  std::vector<Matrix> activations;   // tanh outputs
  std::vector<Matrix> head_inputs;   // X(n) before conditioning, per head
  Matrix final_input;                // X(N)
  Matrix features;
};

ForwardTrace ForwardImpl(const EncoderModel& model, const Matrix& features,
                         const ConditioningMode& mode, ForwardCache* cache);

}  // namespace selfcond::internal

#endif  // SELFCOND_SRC_ENCODER_INTERNAL_H_
