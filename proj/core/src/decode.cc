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

#include "selfcond/decode.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "selfcond/ctc.h"
#include "selfcond/log_math.h"
#include "selfcond/status.h"

namespace selfcond {

void BeamConfig::Validate() const {
  if (width < 1) {
    throw InvalidConfigError("beam width must be >= 1, got " +
                             std::to_string(width));
  }
  if (!(lm_weight >= 0.0) || !std::isfinite(lm_weight)) {
    throw InvalidConfigError("LM weight must be a finite value >= 0");
  }
  if (!std::isfinite(length_bonus)) {
    throw InvalidConfigError("length bonus must be finite");
  }
}

double Hypothesis::log_prob() const {
  return LogSumExp(log_p_blank, log_p_nonblank);
}

bool RanksBefore(const ScoredSequence& a, const ScoredSequence& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.labels < b.labels;
}

AlignmentPath ArgmaxPath(const PosteriorLattice& lattice) {
  AlignmentPath path(std::vector<int>(lattice.num_frames(), 0));
  for (int t = 0; t < lattice.num_frames(); ++t) {
    int best = 0;
    for (int k = 1; k < lattice.num_classes(); ++k) {
      if (lattice.prob(t, k) > lattice.prob(t, best)) best = k;
    }
    path.frames[t] = best;
  }
  return path;
}

BestPathResult BestPathDecode(const PosteriorLattice& lattice) {
  BestPathResult result;
  result.path = ArgmaxPath(lattice);
  result.labels = Collapse(result.path);
  return result;
}

namespace {

void CheckLm(const PosteriorLattice& lattice, const NGramModel* lm) {
  if (lm && lm->vocab().extended_size() != lattice.num_classes()) {
    throw InvalidInputError("LM vocabulary size " +
                            std::to_string(lm->vocab().num_labels()) +
                            " does not match lattice classes " +
                            std::to_string(lattice.num_classes()));
  }
}

double FusedScore(double log_prob, double lm_log_prob, std::size_t length,
                  double lm_weight, double length_bonus) {
  return log_prob + lm_weight * lm_log_prob +
         length_bonus * static_cast<double>(length);
}

}  // namespace

std::vector<ScoredSequence> PrefixBeamSearch(const PosteriorLattice& lattice,
                                             const NGramModel* lm,
                                             const BeamConfig& cfg) {
  cfg.Validate();
  CheckLm(lattice, lm);
  const int num_classes = lattice.num_classes();
  const bool use_lm = lm != nullptr && cfg.lm_weight != 0.0;

  Hypothesis root;
  root.log_p_blank = 0.0;
  root.log_p_nonblank = kLogZero;
  std::vector<Hypothesis> beam{root};

  auto rank = [&](std::vector<Hypothesis>& hyps) {
    for (auto& h : hyps) {
      h.score = FusedScore(h.log_prob(), h.lm_log_prob, h.prefix.size(),
                           cfg.lm_weight, cfg.length_bonus);
    }
    std::sort(hyps.begin(), hyps.end(),
              [](const Hypothesis& a, const Hypothesis& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.prefix < b.prefix;
              });
  };

  for (int t = 0; t < lattice.num_frames(); ++t) {
    std::map<LabelSequence, Hypothesis> next;
    auto slot = [&](const LabelSequence& prefix, const Hypothesis* parent,
                    int appended) -> Hypothesis& {
      auto [it, inserted] = next.try_emplace(prefix);
      Hypothesis& h = it->second;
      if (inserted) {
        h.prefix = prefix;
        h.log_p_blank = kLogZero;
        h.log_p_nonblank = kLogZero;
        h.lm_log_prob = parent->lm_log_prob;
        if (appended > 0 && use_lm) {
          h.lm_log_prob += lm->ScoreNext(parent->prefix, appended);
        }
      }
      return h;
    };

    const double log_blank = lattice.log_prob(t, kBlankId);
    for (const Hypothesis& h : beam) {
      const double total = h.log_prob();
      // Emit blank: prefix unchanged.
      {
        Hypothesis& same = slot(h.prefix, &h, 0);
        same.log_p_blank = LogSumExp(same.log_p_blank, total + log_blank);
      }
      const int last = h.prefix.empty() ? -1 : h.prefix.labels.back();
      if (last > 0) {
        // Repeat of the last label without an intervening blank: no new label.
        Hypothesis& same = slot(h.prefix, &h, 0);
        same.log_p_nonblank = LogSumExp(same.log_p_nonblank,
                                        h.log_p_nonblank + lattice.log_prob(t, last));
      }
      for (int k = 1; k < num_classes; ++k) {
        const double lp = lattice.log_prob(t, k);
        if (lp == kLogZero) continue;
        if (cfg.prune_threshold && lp < *cfg.prune_threshold) continue;
        LabelSequence extended = h.prefix;
        extended.labels.push_back(k);
        Hypothesis& ext = slot(extended, &h, k);
        // A repeated label only starts a new token after a blank.
        const double from = k == last ? h.log_p_blank : total;
        ext.log_p_nonblank = LogSumExp(ext.log_p_nonblank, from + lp);
      }
    }

    beam.clear();
    beam.reserve(next.size());
    for (auto& [prefix, h] : next) {
      if (h.log_prob() != kLogZero) beam.push_back(std::move(h));
    }
    rank(beam);
    if (static_cast<int>(beam.size()) > cfg.width) beam.resize(cfg.width);
  }

  std::vector<ScoredSequence> out;
  out.reserve(beam.size());
  for (const Hypothesis& h : beam) {
    double lm_total = h.lm_log_prob;
    if (use_lm) lm_total += lm->ScoreNext(h.prefix, lm->end_event());
    out.push_back({h.prefix,
                   FusedScore(h.log_prob(), lm_total, h.prefix.size(),
                              cfg.lm_weight, cfg.length_bonus),
                   h.log_prob()});
  }
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

std::vector<ScoredSequence> ExhaustiveSearch(const PosteriorLattice& lattice,
                                             const NGramModel* lm,
                                             double lm_weight,
                                             double length_bonus) {
  CheckLm(lattice, lm);
  std::map<LabelSequence, double> mass;
  ForEachAlignment(lattice.num_frames(), lattice.num_classes(),
                   [&](const AlignmentPath& path) {
                     mass[Collapse(path)] += PathProb(lattice, path);
                   });
  std::vector<ScoredSequence> out;
  out.reserve(mass.size());
  for (const auto& [labels, p] : mass) {
    if (p <= 0.0) continue;
    const double log_prob = std::log(p);
    const double lm_total =
        (lm != nullptr && lm_weight != 0.0) ? lm->SentenceLogProb(labels) : 0.0;
    out.push_back({labels,
                   FusedScore(log_prob, lm_total, labels.size(), lm_weight,
                              length_bonus),
                   log_prob});
  }
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

}  // namespace selfcond
