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

#include "selfcond/experiment.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "selfcond/status.h"

namespace selfcond {

using nlohmann::json;

const std::vector<std::string>& ConditioningNames() {
  static const std::vector<std::string> names = {"none", "selfcond", "bestpath",
                                                 "searched", "oracle"};
  return names;
}

ConditioningKind ParseConditioning(const std::string& name) {
  if (name == "none") return ConditioningKind::kNone;
  if (name == "selfcond" || name == "expectation") {
    return ConditioningKind::kExpectation;
  }
  if (name == "bestpath") return ConditioningKind::kBestPath;
  if (name == "searched") return ConditioningKind::kSearched;
  if (name == "oracle") return ConditioningKind::kOracle;
  throw InvalidConfigError("unknown conditioning mode \"" + name + "\"");
}

OutputDecoder::Kind ParseDecoder(const std::string& name) {
  if (name == "greedy") return OutputDecoder::Kind::kGreedy;
  if (name == "beam") return OutputDecoder::Kind::kBeam;
  throw InvalidConfigError("unknown output decoder \"" + name + "\"");
}

const char* DecoderName(OutputDecoder::Kind kind) {
  return kind == OutputDecoder::Kind::kGreedy ? "greedy" : "beam";
}

namespace {

double Percent(long errors, long ref_length) {
  ErrorCounts c{errors, ref_length};
  return 100.0 * c.rate();
}

ConditioningMode ModeFor(ConditioningKind kind, const Utterance& utt,
                         const BeamConfig& beam, const NGramModel* lm) {
  switch (kind) {
    case ConditioningKind::kSearched:
      return ConditioningMode::Searched(beam, lm);
    case ConditioningKind::kOracle:
      return ConditioningMode::Oracle(utt.transcript);
    default:
      return ConditioningMode{kind};
  }
}

int CountFallbacks(const ForwardTrace& trace) {
  int n = 0;
  for (const auto& layer : trace.intermediates) n += layer.conditioning.fell_back;
  return n;
}

TranscriptMap References(const std::vector<Utterance>& utts) {
  TranscriptMap refs;
  for (const auto& utt : utts) refs[utt.id] = utt.transcript;
  return refs;
}

}  // namespace

double GridCell::wer() const { return Percent(errors, ref_length); }
double PassCell::wer() const { return Percent(errors, ref_length); }

ErrorCounts ScoreTranscripts(const TranscriptMap& refs,
                             const TranscriptMap& hyps) {
  std::vector<LabelSequence> r, h;
  for (const auto& [id, ref] : refs) {
    auto it = hyps.find(id);
    if (it == hyps.end()) throw InvalidInputError("no hypothesis for " + id);
    r.push_back(ref);
    h.push_back(it->second);
  }
  for (const auto& [id, hyp] : hyps) {
    if (!refs.count(id)) throw InvalidInputError("no reference for " + id);
  }
  return CountErrors(r, h);
}

SplitDecode DecodeSplit(const EncoderModel& model,
                        const std::vector<Utterance>& utts,
                        const std::string& cond, const OutputDecoder& decoder,
                        const BeamConfig& cond_beam, const NGramModel* lm) {
  const ConditioningKind kind = ParseConditioning(cond);
  SplitDecode out;
  for (const auto& utt : utts) {
    const ForwardTrace trace =
        Forward(model, utt.features, ModeFor(kind, utt, cond_beam, lm));
    out.fallbacks += CountFallbacks(trace);
    out.hyps[utt.id] = DecodeOutput(trace.final_lattice, decoder);
  }
  return out;
}

std::vector<SplitDecode> MultipassSplit(const EncoderModel& model,
                                        const std::vector<Utterance>& utts,
                                        int passes, const std::string& base_cond,
                                        const OutputDecoder& decoder,
                                        const BeamConfig& cond_beam,
                                        const NGramModel* lm) {
  const ConditioningKind kind = ParseConditioning(base_cond);
  std::vector<SplitDecode> out(passes);
  for (const auto& utt : utts) {
    const auto results = MultipassDecode(model, utt.features, passes,
                                         ModeFor(kind, utt, cond_beam, lm),
                                         decoder);
    for (int m = 0; m < passes; ++m) {
      out[m].hyps[utt.id] = results[m].hypothesis;
      out[m].fallbacks += CountFallbacks(results[m].trace);
    }
  }
  return out;
}

Report RunExperiment(const EncoderModel& model, const Dataset& data,
                     const NGramModel* lm, const ExperimentConfig& cfg,
                     std::map<std::string, std::string> extra_echo) {
  cfg.beam.Validate();
  auto split_of = [&](const std::string& name) -> const std::vector<Utterance>& {
    auto it = data.splits.find(name);
    if (it == data.splits.end()) {
      throw DataError("dataset has no split \"" + name + "\"");
    }
    return it->second;
  };
  const bool wants_lm =
      cfg.beam.lm_weight != 0.0 &&
      (std::count(cfg.conds.begin(), cfg.conds.end(), "searched") > 0 ||
       std::count(cfg.decoders.begin(), cfg.decoders.end(), "beam") > 0 ||
       (cfg.passes > 0 && (cfg.multipass_decoder == "beam" ||
                           cfg.multipass_cond == "searched")));
  if (wants_lm && lm == nullptr) {
    throw DataError("missing artifacts: LM file required for LM-fused search");
  }

  Report report;
  report.config_echo = std::move(extra_echo);
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  report.config_echo["beam_width"] = std::to_string(cfg.beam.width);
  report.config_echo["lm_weight"] = fmt(cfg.beam.lm_weight);
  report.config_echo["length_bonus"] = fmt(cfg.beam.length_bonus);
  report.config_echo["lm"] = lm ? "ngram order=" + std::to_string(lm->order())
                                : "none";
  report.config_echo["conditioning_layers"] = [&] {
    std::string s;
    for (int n : model.config().conditioning_layers) {
      s += (s.empty() ? "" : ",") + std::to_string(n);
    }
    return s;
  }();

  for (const auto& cond : cfg.conds) {
    for (const auto& dec : cfg.decoders) {
      const OutputDecoder decoder{ParseDecoder(dec), cfg.beam, lm};
      for (const auto& split : cfg.splits) {
        const auto& utts = split_of(split);
        SplitDecode decoded = DecodeSplit(model, utts, cond, decoder, cfg.beam, lm);
        const ErrorCounts counts = ScoreTranscripts(References(utts), decoded.hyps);
        GridCell cell;
        cell.cond = cond;
        cell.decode = dec;
        cell.split = split;
        cell.errors = counts.errors;
        cell.ref_length = counts.ref_length;
        cell.num_utts = static_cast<int>(utts.size());
        cell.fallbacks = decoded.fallbacks;
        cell.hyps = std::move(decoded.hyps);
        report.grid.push_back(std::move(cell));
      }
    }
  }

  if (cfg.passes > 0) {
    const auto& utts = split_of(cfg.multipass_split);
    const OutputDecoder decoder{ParseDecoder(cfg.multipass_decoder), cfg.beam, lm};
    report.config_echo["multipass_cond"] = cfg.multipass_cond;
    report.config_echo["multipass_decoder"] = cfg.multipass_decoder;
    report.config_echo["multipass_split"] = cfg.multipass_split;
    auto decoded = MultipassSplit(model, utts, cfg.passes, cfg.multipass_cond,
                                  decoder, cfg.beam, lm);
    const TranscriptMap refs = References(utts);
    for (int m = 0; m < cfg.passes; ++m) {
      const ErrorCounts counts = ScoreTranscripts(refs, decoded[m].hyps);
      PassCell cell;
      cell.pass = m + 1;
      cell.errors = counts.errors;
      cell.ref_length = counts.ref_length;
      cell.fallbacks = decoded[m].fallbacks;
      cell.hyps = std::move(decoded[m].hyps);
      report.passes.push_back(std::move(cell));
    }
  }
  return report;
}

std::string ReportToJson(const Report& report) {
  json j;
  j["report_version"] = 1;
  j["config_echo"] = report.config_echo;
  json grid = json::array();
  for (const auto& c : report.grid) {
    grid.push_back({{"cond", c.cond},
                    {"decode", c.decode},
                    {"split", c.split},
                    {"wer", c.wer()},
                    {"num_utts", c.num_utts},
                    {"errors", c.errors},
                    {"ref_length", c.ref_length},
                    {"fallbacks", c.fallbacks}});
  }
  j["grid"] = std::move(grid);
  json passes = json::array();
  for (const auto& p : report.passes) passes.push_back(p.wer());
  j["passes"] = std::move(passes);
  if (!report.passes.empty()) {
    json detail = json::array();
    for (const auto& p : report.passes) {
      detail.push_back({{"pass", p.pass},
                        {"wer", p.wer()},
                        {"errors", p.errors},
                        {"ref_length", p.ref_length},
                        {"fallbacks", p.fallbacks}});
    }
    j["pass_detail"] = std::move(detail);
  }
  return j.dump(1) + "\n";
}

namespace {

std::string FormatTable(const std::vector<MeanCell>& cells,
                        const std::vector<double>& passes) {
  std::vector<std::string> splits;
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& c : cells) {
    if (std::find(splits.begin(), splits.end(), c.split) == splits.end()) {
      splits.push_back(c.split);
    }
    const auto row = std::make_pair(c.cond, c.decode);
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  }
  std::string out;
  char buf[128];
  if (!rows.empty()) {
    std::snprintf(buf, sizeof(buf), "%-12s %-8s", "cond", "decode");
    out += buf;
    for (const auto& s : splits) {
      std::snprintf(buf, sizeof(buf), " %9s", s.c_str());
      out += buf;
    }
    out += "\n";
    for (const auto& [cond, dec] : rows) {
      std::snprintf(buf, sizeof(buf), "%-12s %-8s", cond.c_str(), dec.c_str());
      out += buf;
      for (const auto& s : splits) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const MeanCell& c) {
          return c.cond == cond && c.decode == dec && c.split == s;
        });
        if (it == cells.end()) {
          std::snprintf(buf, sizeof(buf), " %9s", "-");
        } else {
          std::snprintf(buf, sizeof(buf), " %9.2f", it->wer);
        }
        out += buf;
      }
      out += "\n";
    }
  }
  if (!passes.empty()) {
    if (!out.empty()) out += "\n";
    out += "pass      wer\n";
    for (std::size_t m = 0; m < passes.size(); ++m) {
      std::snprintf(buf, sizeof(buf), "%4zu %8.2f\n", m + 1, passes[m]);
      out += buf;
    }
  }
  return out;
}

}  // namespace

std::string ReportToTable(const Report& report) {
  std::vector<MeanCell> cells;
  for (const auto& c : report.grid) cells.push_back({c.cond, c.decode, c.split, c.wer()});
  std::vector<double> passes;
  for (const auto& p : report.passes) passes.push_back(p.wer());
  return FormatTable(cells, passes);
}

MeanWer AverageWer(const std::vector<Report>& reports) {
  MeanWer mean;
  if (reports.empty()) throw InvalidInputError("no reports to average");
  const Report& first = reports.front();
  for (const auto& r : reports) {
    if (r.grid.size() != first.grid.size() ||
        r.passes.size() != first.passes.size()) {
      throw InvalidInputError("reports do not share one grid layout");
    }
  }
  const double n = static_cast<double>(reports.size());
  for (std::size_t i = 0; i < first.grid.size(); ++i) {
    const GridCell& c = first.grid[i];
    double sum = 0.0;
    for (const auto& r : reports) {
      const GridCell& o = r.grid[i];
      if (o.cond != c.cond || o.decode != c.decode || o.split != c.split) {
        throw InvalidInputError("reports do not share one grid layout");
      }
      sum += o.wer();
    }
    mean.grid.push_back({c.cond, c.decode, c.split, sum / n});
  }
  for (std::size_t m = 0; m < first.passes.size(); ++m) {
    double sum = 0.0;
    for (const auto& r : reports) sum += r.passes[m].wer();
    mean.passes.push_back(sum / n);
  }
  mean.num_reports = static_cast<int>(reports.size());
  return mean;
}

double MeanWer::At(const std::string& cond, const std::string& decode,
                  const std::string& split) const {
  for (const auto& c : grid) {
    if (c.cond == cond && c.decode == decode && c.split == split) return c.wer;
  }
  throw InvalidInputError("no grid cell " + cond + "/" + decode + "/" + split);
}

std::string MeanWerToTable(const MeanWer& mean) {
  return FormatTable(mean.grid, mean.passes);
}

}  // namespace selfcond
