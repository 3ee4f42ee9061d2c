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

#ifndef SELFCOND_MODEL_H_
#define SELFCOND_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfcond/decode.h"
#include "selfcond/lm.h"
#include "selfcond/types.h"

namespace selfcond {

struct EncoderConfig {
  int input_dim = 8;
  int dim = 16;
  int num_layers = 6;
  int context_radius = 2;
  // 1-based layer indices whose output gets an intermediate head and
  // conditioning; each must lie in [1, num_layers - 1].
  std::vector<int> conditioning_layers = {2, 4};
  double init_scale = 1.0;

  void Validate() const;
};

// A trainable parameter tensor. Biases are 1 x n row vectors.
struct Param {
  std::string name;
  Matrix value;
};

// Toy layered encoder:
//   X0 = F Win^T + bin
//   Xn = X(n-1) + tanh(Unfold_r(X(n-1)) Wn^T + bn)
// with, at every conditioning layer n,
//   Z(n) = softmax(Xn Whead^T + bhead),  Xn <- Xn + H(n),
// and a final head Z = softmax(XN Wout^T + bout).
// H(n) is built from Z(n) and the layer's back-projection W (D x K), whose
// columns double as the label embedding for path-based conditioning.
class EncoderModel {
 public:
  struct Layer {
    Matrix weight;  // D x D(2r+1)
    Matrix bias;    // 1 x D
  };
  struct ConditioningHead {
    int layer = 0;          // 1-based
    Matrix head_weight;     // K x D
    Matrix head_bias;       // 1 x K
    Matrix back_projection; // D x K
  };

  EncoderModel(EncoderConfig config, Vocabulary vocab, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  int num_classes() const { return vocab_.extended_size(); }

  Matrix input_weight;   // D x D_in
  Matrix input_bias;     // 1 x D
  std::vector<Layer> layers;
  std::vector<ConditioningHead> heads;  // sorted by layer
  Matrix output_weight;  // K x D
  Matrix output_bias;    // 1 x K

  // Head owned by 1-based `layer`, or nullptr.
  const ConditioningHead* HeadAt(int layer) const;

  // Stable visiting order, used by the optimizer and checkpoints.
  void ForEachParam(const std::function<void(const std::string&, Matrix&)>& fn);
  void ForEachParam(
      const std::function<void(const std::string&, const Matrix&)>& fn) const;
  std::size_t NumParameters() const;

 private:
  EncoderConfig config_;
  Vocabulary vocab_;
};

enum class ConditioningKind {
  kNone,         // plain interCTC: heads run, nothing is added back
  kExpectation,  // H = W z, the original self-conditioning
  kBestPath,     // H = embedding of the per-frame argmax path
  kSearched,     // H = embedding of Viterbi(beam-searched text, Z)
  kOracle,       // H = embedding of Viterbi(reference, Z)
  kInject,       // H = embedding of Viterbi(previous pass hypothesis, Z)
};

const char* ConditioningKindName(ConditioningKind kind);

struct ConditioningMode {
  ConditioningMode() = default;
  explicit ConditioningMode(ConditioningKind k) : kind(k) {}

  ConditioningKind kind = ConditioningKind::kExpectation;
  BeamConfig beam;                  // kSearched
  const NGramModel* lm = nullptr;   // kSearched
  std::optional<LabelSequence> text;  // kOracle reference / kInject hypothesis

  static ConditioningMode None() { return ConditioningMode(ConditioningKind::kNone); }
  static ConditioningMode Expectation() {
    return ConditioningMode(ConditioningKind::kExpectation);
  }
  static ConditioningMode BestPath() {
    return ConditioningMode(ConditioningKind::kBestPath);
  }
  static ConditioningMode Searched(const BeamConfig& cfg, const NGramModel* lm);
  static ConditioningMode Oracle(LabelSequence reference);
  static ConditioningMode Inject(LabelSequence hypothesis);

  void Validate() const;
};

// Output of one conditioning step.
struct Conditioning {
  Matrix features;                       // H, T x D
  std::optional<AlignmentPath> alignment;  // absent for expectation
  std::optional<LabelSequence> text;       // searched/oracle/inject text
  bool fell_back = false;  // text could not be aligned; best path used instead
};

// h_t = sum_k w_k z[t,k], accumulated over k in index order.
Matrix ConditionExpectation(const PosteriorLattice& lattice,
                            const Matrix& back_projection);
// Rows of H are columns of W selected by the path.
Matrix EmbedAlignment(const AlignmentPath& path, const Matrix& back_projection);
Conditioning ConditionBestPath(const PosteriorLattice& lattice,
                               const Matrix& back_projection);
// Top-1 of prefix beam search, forced-aligned back onto the same lattice.
Conditioning ConditionSearched(const PosteriorLattice& lattice,
                               const Matrix& back_projection,
                               const NGramModel* lm, const BeamConfig& cfg);
// Throws InfeasibleError when the reference does not fit.
Conditioning ConditionOracle(const LabelSequence& reference,
                             const PosteriorLattice& lattice,
                             const Matrix& back_projection);
// Aligns `text`; falls back to best path when it does not fit.
Conditioning ConditionOnText(const LabelSequence& text,
                             const PosteriorLattice& lattice,
                             const Matrix& back_projection);

struct LayerTrace {
  int layer = 0;  // 1-based
  Matrix logits;
  PosteriorLattice lattice;
  Conditioning conditioning;
};

struct ForwardTrace {
  Matrix final_logits;
  PosteriorLattice final_lattice;
  std::vector<LayerTrace> intermediates;  // one per conditioning layer
};

// Runs all layers with the given conditioning mode. Throws NumericError
// naming the layer on non-finite activations.
ForwardTrace Forward(const EncoderModel& model, const Matrix& features,
                     const ConditioningMode& mode);

struct OutputDecoder {
  enum class Kind { kGreedy, kBeam };
  Kind kind = Kind::kGreedy;
  BeamConfig beam;
  const NGramModel* lm = nullptr;

  static OutputDecoder Greedy() { return {}; }
  static OutputDecoder Beam(const BeamConfig& cfg, const NGramModel* lm) {
    return {Kind::kBeam, cfg, lm};
  }
};

LabelSequence DecodeOutput(const PosteriorLattice& lattice,
                           const OutputDecoder& decoder);

struct PassResult {
  LabelSequence hypothesis;
  ForwardTrace trace;
};

// Pass 1 uses `base_mode`; pass m+1 conditions every layer on pass m's
// output aligned to that layer's freshly computed lattice.
std::vector<PassResult> MultipassDecode(const EncoderModel& model,
                                        const Matrix& features, int passes,
                                        const ConditioningMode& base_mode,
                                        const OutputDecoder& decoder);

// ---- training ----

struct Utterance {
  std::string id;
  Matrix features;  // T x D_in
  LabelSequence transcript;
};

struct TrainConfig {
  double lambda = 0.5;
  double learning_rate = 3e-3;
  int epochs = 20;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient norm clip, <= 0 disables
  // kExpectation (self-conditioned) or kNone (interCTC).
  ConditioningKind conditioning = ConditioningKind::kExpectation;

  void Validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double final_loss = 0.0;
  std::vector<double> intermediate_losses;
};

// Per-parameter gradients, same order as ForEachParam.
struct Gradients {
  std::vector<Param> params;
};

// Objective and its gradient for one utterance; conditioning must be
// kNone or kExpectation.
LossBreakdown LossAndGradient(const EncoderModel& model, const Utterance& utt,
                              double lambda, ConditioningKind conditioning,
                              Gradients* grads);

struct TrainResult {
  std::vector<double> epoch_losses;  // mean objective per epoch
};

// Adam on the intermediate-CTC objective. Deterministic given cfg.seed.
// Throws NumericError with the epoch index on a non-finite loss.
TrainResult Train(EncoderModel& model, const std::vector<Utterance>& data,
                  const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch = {});

// ---- checkpoints (JSON, "model_version": 1) ----

std::string SerializeModel(const EncoderModel& model);
EncoderModel DeserializeModel(const std::string& text);
void SaveModel(const EncoderModel& model, const std::filesystem::path& file);
EncoderModel LoadModel(const std::filesystem::path& file);

}  // namespace selfcond

#endif  // SELFCOND_MODEL_H_
