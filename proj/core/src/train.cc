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
#include <numeric>
#include <random>
#include <string>

#include "encoder_internal.h"
#include "selfcond/ctc.h"
#include "selfcond/status.h"

namespace selfcond {

void TrainConfig::Validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw InvalidConfigError("lambda must lie in (0,1)");
  }
  if (!(learning_rate > 0.0)) throw InvalidConfigError("learning_rate must be > 0");
  if (epochs < 0) throw InvalidConfigError("epochs must be >= 0");
  if (batch_size < 1) throw InvalidConfigError("batch_size must be >= 1");
  if (conditioning != ConditioningKind::kExpectation &&
      conditioning != ConditioningKind::kNone) {
    throw InvalidConfigError(
        "training supports only expectation or no conditioning");
  }
}

namespace {

// Backprop through z = softmax(l): dl = z * (dz - <dz, z>).
Matrix SoftmaxBackward(const Matrix& probs, const Matrix& dprobs) {
  Matrix out(probs.rows(), probs.cols());
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    const double dot = probs.row(t).dot(dprobs.row(t));
    out.row(t) = probs.row(t).cwiseProduct(dprobs.row(t)).array() -
                 probs.row(t).array() * dot;
  }
  return out;
}

Matrix ColSum(const Matrix& m) { return m.colwise().sum(); }

}  // namespace

LossBreakdown LossAndGradient(const EncoderModel& model, const Utterance& utt,
                              double lambda, ConditioningKind conditioning,
                              Gradients* grads) {
  if (conditioning != ConditioningKind::kExpectation &&
      conditioning != ConditioningKind::kNone) {
    throw InvalidConfigError("gradients exist only for expectation or none");
  }
  if (model.heads.empty()) {
    throw InvalidConfigError("intermediate CTC needs a conditioning layer");
  }
  const EncoderConfig& cfg = model.config();
  internal::ForwardCache cache;
  const ForwardTrace trace = internal::ForwardImpl(
      model, utt.features, ConditioningMode{conditioning}, &cache);

  const double inter_weight = lambda / static_cast<double>(model.heads.size());
  const CtcLossResult final_ctc =
      CtcLossFromLogits(trace.final_logits, utt.transcript);
  LossBreakdown loss;
  loss.final_loss = final_ctc.loss;
  std::vector<CtcLossResult> inter_ctc;
  for (const auto& layer : trace.intermediates) {
    inter_ctc.push_back(CtcLossFromLogits(layer.logits, utt.transcript));
    loss.intermediate_losses.push_back(inter_ctc.back().loss);
  }
  loss.total = InterCtcLoss(final_ctc, inter_ctc, lambda);
  if (grads == nullptr) return loss;

  // Gradient slots in ForEachParam order.
  EncoderModel& mut = const_cast<EncoderModel&>(model);
  if (grads->params.empty()) {
    mut.ForEachParam([&](const std::string& name, Matrix& m) {
      grads->params.push_back({name, Matrix::Zero(m.rows(), m.cols())});
    });
  }
  std::size_t idx = 0;
  Matrix& g_in_w = grads->params[idx++].value;
  Matrix& g_in_b = grads->params[idx++].value;
  std::vector<Matrix*> g_layer_w, g_layer_b;
  for (std::size_t n = 0; n < model.layers.size(); ++n) {
    g_layer_w.push_back(&grads->params[idx++].value);
    g_layer_b.push_back(&grads->params[idx++].value);
  }
  std::vector<Matrix*> g_head_w, g_head_b, g_back;
  for (std::size_t h = 0; h < model.heads.size(); ++h) {
    g_head_w.push_back(&grads->params[idx++].value);
    g_head_b.push_back(&grads->params[idx++].value);
    g_back.push_back(&grads->params[idx++].value);
  }
  Matrix& g_out_w = grads->params[idx++].value;
  Matrix& g_out_b = grads->params[idx++].value;

  const Matrix d_final = (1.0 - lambda) * final_ctc.grad;
  g_out_w += d_final.transpose() * cache.final_input;
  g_out_b += ColSum(d_final);
  Matrix dx = d_final * model.output_weight;

  int head_idx = static_cast<int>(model.heads.size()) - 1;
  for (int n = cfg.num_layers; n >= 1; --n) {
    if (head_idx >= 0 && model.heads[head_idx].layer == n) {
      const auto& head = model.heads[head_idx];
      const auto& layer_trace = trace.intermediates[head_idx];
      const Matrix& probs = layer_trace.lattice.probs();
      Matrix d_logits = inter_weight * inter_ctc[head_idx].grad;
      if (conditioning == ConditioningKind::kExpectation) {
        // X' = X + Z W^T
        *g_back[head_idx] += dx.transpose() * probs;
        d_logits += SoftmaxBackward(probs, dx * head.back_projection);
      }
      *g_head_w[head_idx] += d_logits.transpose() * cache.head_inputs[head_idx];
      *g_head_b[head_idx] += ColSum(d_logits);
      dx += d_logits * head.head_weight;
      --head_idx;
    }
    const Matrix& act = cache.activations[n - 1];
    const Matrix d_pre = dx.cwiseProduct((1.0 - act.array().square()).matrix());
    *g_layer_w[n - 1] += d_pre.transpose() * cache.unfolded[n - 1];
    *g_layer_b[n - 1] += ColSum(d_pre);
    dx += internal::Fold(d_pre * model.layers[n - 1].weight, cfg.context_radius,
                         cfg.dim);
  }
  g_in_w += dx.transpose() * cache.features;
  g_in_b += ColSum(dx);
  return loss;
}

TrainResult Train(EncoderModel& model, const std::vector<Utterance>& data,
                  const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
  cfg.Validate();
  if (data.empty()) throw InvalidInputError("empty training set");
  for (const auto& utt : data) {
    if (!IsFeasible(utt.transcript, static_cast<int>(utt.features.rows()))) {
      throw InvalidInputError("utterance " + utt.id +
                              " has a transcript longer than its frames allow");
    }
  }

  std::vector<Matrix*> params;
  model.ForEachParam([&](const std::string&, Matrix& m) { params.push_back(&m); });
  std::vector<Matrix> first(params.size()), second(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    first[i] = Matrix::Zero(params[i]->rows(), params[i]->cols());
    second[i] = Matrix::Zero(params[i]->rows(), params[i]->cols());
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  TrainResult result;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Gradients grads;
      for (std::size_t i = start; i < stop; ++i) {
        LossBreakdown loss;
        try {
          loss = LossAndGradient(model, data[order[i]], cfg.lambda,
                                 cfg.conditioning, &grads);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch + 1) + ", " +
                             data[order[i]].id + ": " + e.what());
        }
        if (!std::isfinite(loss.total)) {
          throw NumericError("non-finite training loss in epoch " +
                             std::to_string(epoch + 1));
        }
        epoch_loss += loss.total;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      double norm_sq = 0.0;
      for (auto& g : grads.params) {
        g.value *= scale;
        norm_sq += g.value.squaredNorm();
      }
      if (!std::isfinite(norm_sq)) {
        throw NumericError("non-finite gradient in epoch " +
                           std::to_string(epoch + 1));
      }
      const double norm = std::sqrt(norm_sq);
      const double clip =
          (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

      ++step;
      const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix g = grads.params[i].value * clip;
        first[i] = cfg.beta1 * first[i] + (1.0 - cfg.beta1) * g;
        second[i] = cfg.beta2 * second[i] +
                    (1.0 - cfg.beta2) * g.cwiseProduct(g);
        *params[i] -= (cfg.learning_rate *
                       ((first[i] / bias1).array() /
                        ((second[i] / bias2).array().sqrt() + cfg.epsilon)))
                          .matrix();
      }
    }
    const double mean = epoch_loss / static_cast<double>(data.size());
    if (!std::isfinite(mean)) {
      throw NumericError("non-finite training loss in epoch " +
                         std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

}  // namespace selfcond
