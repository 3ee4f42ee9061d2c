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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "encoder_internal.h"
#include "selfcond/align.h"
#include "selfcond/ctc.h"
#include "selfcond/status.h"

namespace selfcond {

void EncoderConfig::Validate() const {
  if (input_dim < 1 || dim < 1 || num_layers < 1 || context_radius < 0) {
    throw InvalidConfigError("encoder dimensions must be positive");
  }
  std::vector<int> sorted = conditioning_layers;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidConfigError("duplicate conditioning layer");
  }
  for (int n : sorted) {
    if (n < 1 || n > num_layers - 1) {
      throw InvalidConfigError("conditioning layer " + std::to_string(n) +
                               " outside [1, " +
                               std::to_string(num_layers - 1) + "]");
    }
  }
  if (!(init_scale > 0.0)) throw InvalidConfigError("init_scale must be > 0");
}

EncoderModel::EncoderModel(EncoderConfig config, Vocabulary vocab,
                           std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.Validate();
  std::sort(config_.conditioning_layers.begin(),
            config_.conditioning_layers.end());
  std::mt19937_64 rng(seed);
  auto init = [&](int rows, int cols, int fan_in) {
    std::normal_distribution<double> dist(
        0.0, config_.init_scale / std::sqrt(static_cast<double>(fan_in)));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
  };
  const int d = config_.dim;
  const int k = num_classes();
  const int window = d * (2 * config_.context_radius + 1);
  input_weight = init(d, config_.input_dim, config_.input_dim);
  input_bias = Matrix::Zero(1, d);
  for (int n = 0; n < config_.num_layers; ++n) {
    layers.push_back({init(d, window, window), Matrix::Zero(1, d)});
  }
  for (int n : config_.conditioning_layers) {
    ConditioningHead head;
    head.layer = n;
    head.head_weight = init(k, d, d);
    head.head_bias = Matrix::Zero(1, k);
    head.back_projection = init(d, k, k);
    heads.push_back(std::move(head));
  }
  output_weight = init(k, d, d);
  output_bias = Matrix::Zero(1, k);
}

const EncoderModel::ConditioningHead* EncoderModel::HeadAt(int layer) const {
  for (const auto& h : heads) {
    if (h.layer == layer) return &h;
  }
  return nullptr;
}

void EncoderModel::ForEachParam(
    const std::function<void(const std::string&, Matrix&)>& fn) {
  fn("input.weight", input_weight);
  fn("input.bias", input_bias);
  for (std::size_t n = 0; n < layers.size(); ++n) {
    const std::string prefix = "layer" + std::to_string(n + 1);
    fn(prefix + ".weight", layers[n].weight);
    fn(prefix + ".bias", layers[n].bias);
  }
  for (auto& h : heads) {
    const std::string prefix = "cond" + std::to_string(h.layer);
    fn(prefix + ".head_weight", h.head_weight);
    fn(prefix + ".head_bias", h.head_bias);
    fn(prefix + ".back_projection", h.back_projection);
  }
  fn("output.weight", output_weight);
  fn("output.bias", output_bias);
}

void EncoderModel::ForEachParam(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
  const_cast<EncoderModel*>(this)->ForEachParam(
      [&](const std::string& name, Matrix& m) { fn(name, m); });
}

std::size_t EncoderModel::NumParameters() const {
  std::size_t n = 0;
  ForEachParam([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

const char* ConditioningKindName(ConditioningKind kind) {
  switch (kind) {
    case ConditioningKind::kNone: return "none";
    case ConditioningKind::kExpectation: return "selfcond";
    case ConditioningKind::kBestPath: return "bestpath";
    case ConditioningKind::kSearched: return "searched";
    case ConditioningKind::kOracle: return "oracle";
    case ConditioningKind::kInject: return "inject";
  }
  return "?";
}

ConditioningMode ConditioningMode::Searched(const BeamConfig& cfg,
                                            const NGramModel* lm) {
  ConditioningMode mode{ConditioningKind::kSearched};
  mode.beam = cfg;
  mode.lm = lm;
  return mode;
}

ConditioningMode ConditioningMode::Oracle(LabelSequence reference) {
  ConditioningMode mode{ConditioningKind::kOracle};
  mode.text = std::move(reference);
  return mode;
}

ConditioningMode ConditioningMode::Inject(LabelSequence hypothesis) {
  ConditioningMode mode{ConditioningKind::kInject};
  mode.text = std::move(hypothesis);
  return mode;
}

void ConditioningMode::Validate() const {
  switch (kind) {
    case ConditioningKind::kSearched:
      beam.Validate();
      if (lm == nullptr && beam.lm_weight != 0.0) {
        throw InvalidConfigError(
            "searched conditioning needs an LM unless lm_weight is 0");
      }
      break;
    case ConditioningKind::kOracle:
      if (!text) throw InvalidConfigError("oracle conditioning needs a reference");
      break;
    case ConditioningKind::kInject:
      if (!text) throw InvalidConfigError("inject conditioning needs a hypothesis");
      break;
    default:
      break;
  }
}

Matrix ConditionExpectation(const PosteriorLattice& lattice,
                            const Matrix& back_projection) {
  const int num_frames = lattice.num_frames();
  const int num_classes = lattice.num_classes();
  if (back_projection.cols() != num_classes) {
    throw InvalidInputError("back-projection has wrong number of classes");
  }
  const Eigen::Index dim = back_projection.rows();
  Matrix h = Matrix::Zero(num_frames, dim);
  for (int t = 0; t < num_frames; ++t) {
    for (int k = 0; k < num_classes; ++k) {
      const double z = lattice.prob(t, k);
      for (Eigen::Index d = 0; d < dim; ++d) h(t, d) += back_projection(d, k) * z;
    }
  }
  return h;
}

Matrix EmbedAlignment(const AlignmentPath& path, const Matrix& back_projection) {
  Matrix h(static_cast<Eigen::Index>(path.size()), back_projection.rows());
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] < 0 || path[t] >= back_projection.cols()) {
      throw InvalidInputError("alignment label outside embedding table");
    }
    h.row(static_cast<Eigen::Index>(t)) = back_projection.col(path[t]).transpose();
  }
  return h;
}

Conditioning ConditionBestPath(const PosteriorLattice& lattice,
                               const Matrix& back_projection) {
  Conditioning c;
  c.alignment = ArgmaxPath(lattice);
  c.features = EmbedAlignment(*c.alignment, back_projection);
  return c;
}

Conditioning ConditionOnText(const LabelSequence& text,
                             const PosteriorLattice& lattice,
                             const Matrix& back_projection) {
  try {
    AlignmentResult aligned = ViterbiAlign(text, lattice);
    Conditioning c;
    c.features = EmbedAlignment(aligned.path, back_projection);
    c.alignment = std::move(aligned.path);
    c.text = text;
    return c;
  } catch (const InfeasibleError&) {
    Conditioning c = ConditionBestPath(lattice, back_projection);
    c.text = text;
    c.fell_back = true;
    return c;
  }
}

Conditioning ConditionSearched(const PosteriorLattice& lattice,
                               const Matrix& back_projection,
                               const NGramModel* lm, const BeamConfig& cfg) {
  const auto ranked = PrefixBeamSearch(lattice, lm, cfg);
  if (ranked.empty()) {
    Conditioning c = ConditionBestPath(lattice, back_projection);
    c.fell_back = true;
    return c;
  }
  return ConditionOnText(ranked.front().labels, lattice, back_projection);
}

Conditioning ConditionOracle(const LabelSequence& reference,
                             const PosteriorLattice& lattice,
                             const Matrix& back_projection) {
  AlignmentResult aligned = ViterbiAlign(reference, lattice);
  Conditioning c;
  c.features = EmbedAlignment(aligned.path, back_projection);
  c.alignment = std::move(aligned.path);
  c.text = reference;
  return c;
}

namespace internal {

Matrix Unfold(const Matrix& x, int radius) {
  const Eigen::Index num_frames = x.rows();
  const Eigen::Index dim = x.cols();
  Matrix u = Matrix::Zero(num_frames, dim * (2 * radius + 1));
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    for (int j = -radius; j <= radius; ++j) {
      const Eigen::Index src = t + j;
      if (src < 0 || src >= num_frames) continue;
      u.block(t, (j + radius) * dim, 1, dim) = x.row(src);
    }
  }
  return u;
}

Matrix Fold(const Matrix& unfolded, int radius, int dim) {
  const Eigen::Index num_frames = unfolded.rows();
  Matrix x = Matrix::Zero(num_frames, dim);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    for (int j = -radius; j <= radius; ++j) {
      const Eigen::Index dst = t + j;
      if (dst < 0 || dst >= num_frames) continue;
      x.row(dst) += unfolded.block(t, (j + radius) * dim, 1, dim);
    }
  }
  return x;
}

namespace {

Matrix Affine(const Matrix& x, const Matrix& weight, const Matrix& bias) {
  Matrix y = x * weight.transpose();
  y.rowwise() += bias.row(0);
  return y;
}

void CheckFinite(const Matrix& m, const std::string& where) {
  if (!m.allFinite()) throw NumericError("non-finite activations at " + where);
}

Conditioning Condition(const ConditioningMode& mode,
                       const PosteriorLattice& lattice,
                       const Matrix& back_projection) {
  switch (mode.kind) {
    case ConditioningKind::kNone:
      return {};
    case ConditioningKind::kExpectation: {
      Conditioning c;
      c.features = ConditionExpectation(lattice, back_projection);
      return c;
    }
    case ConditioningKind::kBestPath:
      return ConditionBestPath(lattice, back_projection);
    case ConditioningKind::kSearched:
      return ConditionSearched(lattice, back_projection, mode.lm, mode.beam);
    case ConditioningKind::kOracle:
      return ConditionOracle(*mode.text, lattice, back_projection);
    case ConditioningKind::kInject:
      return ConditionOnText(*mode.text, lattice, back_projection);
  }
  return {};
}

}  // namespace

ForwardTrace ForwardImpl(const EncoderModel& model, const Matrix& features,
                         const ConditioningMode& mode, ForwardCache* cache) {
  const EncoderConfig& cfg = model.config();
  if (features.rows() < 1) throw InvalidInputError("features need T >= 1");
  if (features.cols() != cfg.input_dim) {
    throw InvalidInputError("feature dimension " +
                            std::to_string(features.cols()) + " != model input " +
                            std::to_string(cfg.input_dim));
  }
  if (!features.allFinite()) throw InvalidInputError("non-finite features");
  mode.Validate();

  if (cache) {
    *cache = ForwardCache{};
    cache->features = features;
  }
  Matrix x = Affine(features, model.input_weight, model.input_bias);
  std::vector<LayerTrace> intermediates;
  for (int n = 1; n <= cfg.num_layers; ++n) {
    const auto& layer = model.layers[n - 1];
    Matrix u = Unfold(x, cfg.context_radius);
    Matrix act = Affine(u, layer.weight, layer.bias).array().tanh().matrix();
    if (cache) {
      cache->layer_inputs.push_back(x);
      cache->unfolded.push_back(std::move(u));
    }
    x += act;
    if (cache) cache->activations.push_back(std::move(act));
    CheckFinite(x, "layer " + std::to_string(n));

    const auto* head = model.HeadAt(n);
    if (head == nullptr) continue;
    if (cache) cache->head_inputs.push_back(x);
    Matrix logits = Affine(x, head->head_weight, head->head_bias);
    CheckFinite(logits, "intermediate head " + std::to_string(n));
    PosteriorLattice lattice = PosteriorLattice::FromLogits(logits);
    Conditioning cond = Condition(mode, lattice, head->back_projection);
    if (mode.kind != ConditioningKind::kNone) x += cond.features;
    intermediates.push_back(
        {n, std::move(logits), std::move(lattice), std::move(cond)});
  }
  if (cache) cache->final_input = x;
  Matrix logits = Affine(x, model.output_weight, model.output_bias);
  CheckFinite(logits, "output head");
  PosteriorLattice final_lattice = PosteriorLattice::FromLogits(logits);
  return {std::move(logits), std::move(final_lattice), std::move(intermediates)};
}

}  // namespace internal

ForwardTrace Forward(const EncoderModel& model, const Matrix& features,
                     const ConditioningMode& mode) {
  return internal::ForwardImpl(model, features, mode, nullptr);
}

LabelSequence DecodeOutput(const PosteriorLattice& lattice,
                           const OutputDecoder& decoder) {
  if (decoder.kind == OutputDecoder::Kind::kGreedy) {
    return BestPathDecode(lattice).labels;
  }
  const auto ranked = PrefixBeamSearch(lattice, decoder.lm, decoder.beam);
  return ranked.empty() ? LabelSequence{} : ranked.front().labels;
}

std::vector<PassResult> MultipassDecode(const EncoderModel& model,
                                        const Matrix& features, int passes,
                                        const ConditioningMode& base_mode,
                                        const OutputDecoder& decoder) {
  if (passes < 1) throw InvalidConfigError("multi-pass needs passes >= 1");
  std::vector<PassResult> results;
  results.reserve(passes);
  for (int m = 0; m < passes; ++m) {
    const ConditioningMode mode =
        m == 0 ? base_mode
               : ConditioningMode::Inject(results.back().hypothesis);
    ForwardTrace trace = Forward(model, features, mode);
    LabelSequence hyp = DecodeOutput(trace.final_lattice, decoder);
    results.push_back({std::move(hyp), std::move(trace)});
  }
  return results;
}

}  // namespace selfcond
