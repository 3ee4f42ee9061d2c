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

#ifndef SELFCOND_EXPERIMENT_H_
#define SELFCOND_EXPERIMENT_H_

#include <map>
#include <string>
#include <vector>

#include "selfcond/data.h"
#include "selfcond/decode.h"
#include "selfcond/io.h"
#include "selfcond/lm.h"
#include "selfcond/metrics.h"
#include "selfcond/model.h"

namespace selfcond {

// Conditioning row names used by the CLI and reports.
//   none      plain interCTC, nothing added back
//   selfcond  expectation conditioning
//   bestpath  per-frame argmax embedding
//   searched  LM beam search on each intermediate lattice + Viterbi
//   oracle    Viterbi alignment of the reference transcript
const std::vector<std::string>& ConditioningNames();
ConditioningKind ParseConditioning(const std::string& name);

OutputDecoder::Kind ParseDecoder(const std::string& name);
const char* DecoderName(OutputDecoder::Kind kind);

struct ExperimentConfig {
  std::vector<std::string> conds = {"none", "selfcond", "bestpath", "searched",
                                    "oracle"};
  std::vector<std::string> decoders = {"greedy"};
  std::vector<std::string> splits = {"test"};
  // Used for searched conditioning and for beam output decoding.
  BeamConfig beam;
  // Multi-pass sweep; 0 disables it.
  int passes = 0;
  std::string multipass_cond = "selfcond";
  std::string multipass_decoder = "beam";
  std::string multipass_split = "test";
};

struct GridCell {
  std::string cond;
  std::string decode;
  std::string split;
  long errors = 0;
  long ref_length = 0;
  int num_utts = 0;
  int fallbacks = 0;  // layers where a text could not be aligned
  double wer() const;  // percent
  TranscriptMap hyps;
};

struct PassCell {
  int pass = 0;
  long errors = 0;
  long ref_length = 0;
  int fallbacks = 0;
  double wer() const;  // percent
  TranscriptMap hyps;
};

struct Report {
  std::map<std::string, std::string> config_echo;
  std::vector<GridCell> grid;
  std::vector<PassCell> passes;
};

// Hypotheses for every utterance of `utts`, keyed by id.
struct SplitDecode {
  TranscriptMap hyps;
  int fallbacks = 0;
};
SplitDecode DecodeSplit(const EncoderModel& model,
                        const std::vector<Utterance>& utts,
                        const std::string& cond, const OutputDecoder& decoder,
                        const BeamConfig& cond_beam, const NGramModel* lm);

// Per-pass hypotheses for every utterance.
std::vector<SplitDecode> MultipassSplit(const EncoderModel& model,
                                        const std::vector<Utterance>& utts,
                                        int passes, const std::string& base_cond,
                                        const OutputDecoder& decoder,
                                        const BeamConfig& cond_beam,
                                        const NGramModel* lm);

// Decodes the requested conds x decoders x splits grid and, when
// cfg.passes > 0, the multi-pass sweep. `lm` may be null only when no
// searched/beam configuration asks for LM fusion with a nonzero weight.
Report RunExperiment(const EncoderModel& model, const Dataset& data,
                     const NGramModel* lm, const ExperimentConfig& cfg,
                     std::map<std::string, std::string> extra_echo = {});

// "report_version": 1 JSON with config_echo, grid and passes.
std::string ReportToJson(const Report& report);
// Fixed-width table: rows cond x decode, columns splits; pass series below.
std::string ReportToTable(const Report& report);

// Cell-wise WER averaged over reports that share one grid layout, e.g. the
// same experiment under several seeds. Grid order follows the reports.
// Throws InvalidInputError for an empty list or mismatched layouts.
struct MeanCell {
  std::string cond;
  std::string decode;
  std::string split;
  double wer = 0.0;
};
struct MeanWer {
  std::vector<MeanCell> grid;
  std::vector<double> passes;
  int num_reports = 0;
  // Throws InvalidInputError for a cell that is not in the grid.
  double At(const std::string& cond, const std::string& decode,
            const std::string& split) const;
};
MeanWer AverageWer(const std::vector<Report>& reports);
std::string MeanWerToTable(const MeanWer& mean);

// WER in percent from reference and hypothesis maps over the same ids.
ErrorCounts ScoreTranscripts(const TranscriptMap& refs, const TranscriptMap& hyps);

}  // namespace selfcond

#endif  // SELFCOND_EXPERIMENT_H_
