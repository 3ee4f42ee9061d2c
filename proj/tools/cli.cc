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

#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "selfcond/align.h"
#include "selfcond/data.h"
#include "selfcond/experiment.h"
#include "selfcond/io.h"
#include "selfcond/lm.h"
#include "selfcond/metrics.h"
#include "selfcond/model.h"
#include "selfcond/pipeline.h"
#include "selfcond/status.h"

namespace selfcond {
namespace cli {
namespace {

namespace fs = std::filesystem;

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Flags shared by decode, multipass and experiment.
struct BeamFlags {
  std::string lm_path;
  BeamConfig beam;

  void Add(CLI::App* app, bool with_lm_file) {
    if (with_lm_file) {
      app->add_option("--lm", lm_path, "n-gram LM file from train-lm");
    }
    app->add_option("--beam-width", beam.width, "prefix beam width")
        ->capture_default_str();
    app->add_option("--lm-weight", beam.lm_weight, "shallow fusion weight alpha")
        ->capture_default_str();
    app->add_option("--len-bonus", beam.length_bonus,
                    "per-label length bonus beta")
        ->capture_default_str();
  }
};

std::optional<NGramModel> MaybeLoadLm(const std::string& path,
                                      const Vocabulary& vocab) {
  if (path.empty()) return std::nullopt;
  return NGramModel::Load(path, vocab);
}

void CheckCompatible(const EncoderModel& model, const Dataset& data) {
  if (model.vocab().labels() != data.vocab.labels()) {
    throw DataError("model and dataset vocabularies differ");
  }
  if (model.config().input_dim != data.spec.input_dim) {
    throw DataError("model input_dim " + std::to_string(model.config().input_dim) +
                    " does not match dataset input_dim " +
                    std::to_string(data.spec.input_dim));
  }
}

// Checks every input of a command up front so one error lists them all.
void RequireInputs(const std::string& data_dir, const std::vector<std::string>& files) {
  const fs::path dir(data_dir);
  std::vector<fs::path> all = {dir / "manifest.json", dir / "vocab.txt",
                               dir / "transcripts.tsv"};
  for (const auto& f : files) {
    if (!f.empty()) all.emplace_back(f);
  }
  RequireFiles(all);
}

// Writes the JSON report to `path` and the table next to it as <path>.txt.
void WriteReport(const Report& report, const std::string& path) {
  if (path.empty()) return;
  WriteTextFile(path, ReportToJson(report));
  WriteTextFile(path + ".txt", ReportToTable(report));
}

// --- gen-data --------------------------------------------------------------

struct GenDataArgs {
  std::string spec_path;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int GenData(const GenDataArgs& a, std::ostream& out) {
  TaskSpec spec = a.spec_path.empty() ? TaskSpec{}
                                      : TaskSpecFromJson(ReadTextFile(a.spec_path));
  if (a.seed) spec.seed = *a.seed;
  const Dataset data = GenerateDataset(spec);
  WriteDataset(data, a.out);
  for (const auto& [name, utts] : data.splits) {
    out << name << ": " << utts.size() << " utterances\n";
  }
  out << "lm corpus: " << data.lm_corpus.size() << " sequences\n";
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// --- train-lm --------------------------------------------------------------

struct TrainLmArgs {
  std::string data;
  int order = 4;
  double delta = 0.1;
  std::string out;
};

int TrainLm(const TrainLmArgs& a, std::ostream& out) {
  const fs::path dir(a.data);
  const Vocabulary vocab = ReadVocabulary(dir / "vocab.txt");
  std::vector<LabelSequence> corpus;
  std::istringstream lines(ReadTextFile(dir / "lm_corpus.txt"));
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    try {
      corpus.push_back(ParseLabels(line, vocab));
    } catch (const Error& e) {
      throw DataError("lm_corpus.txt:" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (corpus.empty()) throw DataError("lm_corpus.txt is empty");
  const NGramModel lm = TrainNGram(corpus, vocab, a.order, a.delta);
  lm.Save(a.out);
  out << "trained order-" << a.order << " LM on " << corpus.size()
      << " sequences, " << lm.contexts().size() << " contexts\n";
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

int TrainCmd(const TrainArgs& a, std::ostream& out) {
  TrainingSetup setup = a.config.empty()
                            ? TrainingSetup{}
                            : TrainingSetupFromJson(ReadTextFile(a.config));
  if (a.seed) setup.train.seed = *a.seed;
  if (a.epochs) setup.train.epochs = *a.epochs;
  setup.train.Validate();
  const Dataset data = ReadDataset(a.data);
  const EncoderModel model =
      TrainOnDataset(data, setup, [&](int epoch, double loss) {
        out << "epoch " << epoch << " loss " << Fixed(loss, 4) << "\n";
        out.flush();
      });
  SaveModel(model, a.out);
  out << "wrote " << a.out << " (" << model.NumParameters() << " parameters)\n";
  return kExitOk;
}

// --- decode / multipass ----------------------------------------------------

struct DecodeArgs {
  std::string model;
  std::string data;
  std::vector<std::string> splits = {"test"};
  std::vector<std::string> conds = {"selfcond"};
  std::vector<std::string> decoders = {"greedy"};
  BeamFlags flags;
  std::string report;
  std::string hyp;
  int passes = 0;  // multipass only
};

int DecodeCmd(const DecodeArgs& a, bool multipass, std::ostream& out) {
  for (const auto& c : a.conds) ParseConditioning(c);
  for (const auto& d : a.decoders) ParseDecoder(d);
  a.flags.beam.Validate();
  if (multipass && (a.conds.size() != 1 || a.decoders.size() != 1 ||
                    a.splits.size() != 1)) {
    throw InvalidConfigError("multipass takes one --cond, --output-decode and --split");
  }
  if (multipass && a.passes < 1) throw InvalidConfigError("--passes must be >= 1");
  if (!a.hyp.empty() && !multipass &&
      a.conds.size() * a.decoders.size() * a.splits.size() != 1) {
    throw InvalidConfigError("--hyp needs exactly one cond, decoder and split");
  }

  RequireInputs(a.data, {a.model, a.flags.lm_path});
  const Dataset data = ReadDataset(a.data);
  const EncoderModel model = LoadModel(a.model);
  CheckCompatible(model, data);
  const std::optional<NGramModel> lm = MaybeLoadLm(a.flags.lm_path, data.vocab);

  ExperimentConfig cfg;
  cfg.beam = a.flags.beam;
  if (multipass) {
    cfg.conds.clear();
    cfg.passes = a.passes;
    cfg.multipass_cond = a.conds.front();
    cfg.multipass_decoder = a.decoders.front();
    cfg.multipass_split = a.splits.front();
  } else {
    cfg.conds = a.conds;
    cfg.decoders = a.decoders;
    cfg.splits = a.splits;
  }
  const Report report =
      RunExperiment(model, data, lm ? &*lm : nullptr, cfg,
                    {{"model", a.model},
                     {"data", a.data},
                     {"lm_file", a.flags.lm_path.empty() ? "-" : a.flags.lm_path}});
  out << ReportToTable(report);
  int fallbacks = 0;
  for (const auto& c : report.grid) fallbacks += c.fallbacks;
  for (const auto& p : report.passes) fallbacks += p.fallbacks;
  if (fallbacks > 0) {
    out << "note: " << fallbacks
        << " conditioning layer(s) fell back to best-path (text not alignable)\n";
  }
  WriteReport(report, a.report);
  if (!a.hyp.empty()) {
    const TranscriptMap& hyps =
        multipass ? report.passes.back().hyps : report.grid.front().hyps;
    WriteTranscripts(hyps, data.vocab, a.hyp);
  }
  return kExitOk;
}

// --- align -----------------------------------------------------------------

struct AlignArgs {
  std::string model;
  std::string data;
  std::string utt;
  std::string text;
  std::string cond = "selfcond";
};

int AlignCmd(const AlignArgs& a, std::ostream& out) {
  const ConditioningKind kind = ParseConditioning(a.cond);
  if (kind == ConditioningKind::kSearched || kind == ConditioningKind::kOracle) {
    throw InvalidConfigError("align supports --cond none, selfcond or bestpath");
  }
  RequireInputs(a.data, {a.model});
  const Dataset data = ReadDataset(a.data);
  const EncoderModel model = LoadModel(a.model);
  CheckCompatible(model, data);
  const Utterance* utt = nullptr;
  for (const auto& [name, utts] : data.splits) {
    for (const auto& u : utts) {
      if (u.id == a.utt) utt = &u;
    }
  }
  if (utt == nullptr) throw DataError("no utterance with id " + a.utt);
  const LabelSequence target = ParseLabels(a.text, data.vocab);

  const ForwardTrace trace =
      Forward(model, utt->features, ConditioningMode(kind));
  std::vector<std::pair<std::string, AlignmentResult>> rows;
  for (const auto& layer : trace.intermediates) {
    rows.emplace_back("layer " + std::to_string(layer.layer),
                      ViterbiAlign(target, layer.lattice));
  }
  rows.emplace_back("final  ", ViterbiAlign(target, trace.final_lattice));
  out << "utt " << utt->id << "  frames " << utt->features.rows() << "  text \""
      << ToString(target, data.vocab) << "\"\n";
  for (const auto& [name, r] : rows) {
    out << name << "  logp " << Fixed(r.log_prob, 6) << "  path "
        << ToString(r.path, data.vocab) << "\n";
  }
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

// Token-level transcripts for scoring files that need not share a vocabulary
// file with any dataset.
std::map<std::string, std::vector<std::string>> ReadTokenTsv(const std::string& path) {
  std::map<std::string, std::vector<std::string>> rows;
  std::istringstream lines(ReadTextFile(path));
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(lineno) + ": missing tab");
    }
    const std::string id = line.substr(0, tab);
    if (rows.count(id)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id " + id);
    }
    std::istringstream toks(line.substr(tab + 1));
    std::vector<std::string> tokens;
    for (std::string t; toks >> t;) tokens.push_back(t);
    rows[id] = std::move(tokens);
  }
  return rows;
}

struct EvalArgs {
  std::string ref;
  std::string hyp;
  std::string report;
};

int EvalCmd(const EvalArgs& a, std::ostream& out) {
  const auto refs = ReadTokenTsv(a.ref);
  const auto hyps = ReadTokenTsv(a.hyp);
  std::map<std::string, int> ids;
  auto encode = [&](const std::vector<std::string>& toks) {
    LabelSequence seq;
    for (const auto& t : toks) {
      seq.labels.push_back(ids.emplace(t, static_cast<int>(ids.size()) + 1).first->second);
    }
    return seq;
  };
  TranscriptMap r, h;
  for (const auto& [id, toks] : refs) r[id] = encode(toks);
  for (const auto& [id, toks] : hyps) h[id] = encode(toks);
  ErrorCounts counts;
  try {
    counts = ScoreTranscripts(r, h);
  } catch (const InvalidInputError& e) {
    throw DataError(e.what());
  }
  const double wer = 100.0 * counts.rate();
  out << "WER " << Fixed(wer) << "% (" << counts.errors << " / "
      << counts.ref_length << ") over " << r.size() << " utterances\n";
  if (!a.report.empty()) {
    nlohmann::json j = {{"wer", wer},
                        {"errors", counts.errors},
                        {"ref_length", counts.ref_length},
                        {"num_utts", r.size()}};
    WriteTextFile(a.report, j.dump(1) + "\n");
  }
  return kExitOk;
}

// --- experiment ------------------------------------------------------------

struct ExperimentArgs {
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::optional<int> epochs;
  std::vector<std::string> splits = {"test"};
  std::vector<std::string> decoders = {"greedy"};
  int passes = 4;
  BeamFlags flags;
  std::string out_dir;
};

int ExperimentCmd(const ExperimentArgs& a, std::ostream& out) {
  a.flags.beam.Validate();
  for (const auto& d : a.decoders) ParseDecoder(d);
  if (a.passes < 0) throw InvalidConfigError("--passes must be >= 0");
  if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
  std::vector<Report> reports;
  for (const std::uint64_t seed : a.seeds) {
    PipelineConfig cfg = DefaultPipelineConfig(seed);
    if (a.epochs) cfg.setup.train.epochs = *a.epochs;
    cfg.experiment.beam = a.flags.beam;
    cfg.experiment.splits = a.splits;
    cfg.experiment.decoders = a.decoders;
    cfg.experiment.passes = a.passes;
    cfg.experiment.multipass_split = a.splits.back();
    reports.push_back(RunSyntheticPipeline(cfg));
    out << "seed " << seed << "\n" << ReportToTable(reports.back()) << "\n";
    out.flush();
    if (!a.out_dir.empty()) {
      WriteReport(reports.back(), (fs::path(a.out_dir) /
                                   ("report-seed" + std::to_string(seed) + ".json"))
                                      .string());
    }
  }
  const MeanWer mean = AverageWer(reports);
  const std::string table = MeanWerToTable(mean);
  out << "mean over " << mean.num_reports << " seeds\n" << table;
  if (!a.out_dir.empty()) WriteTextFile(fs::path(a.out_dir) / "mean.txt", table);
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Self-conditioned CTC inference toolkit"};
  app.name(args.empty() ? "selfcond" : args.front());
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all subcommand help");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic task");
  gen_cmd->add_option("--spec", gen.spec_path, "task spec JSON (defaults if omitted)");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "override the spec seed");

  TrainLmArgs tlm;
  auto* tlm_cmd = app.add_subcommand("train-lm", "Train the n-gram LM");
  tlm_cmd->add_option("--data", tlm.data, "dataset directory")
      ->required();
  tlm_cmd->add_option("--order", tlm.order, "n-gram order")->capture_default_str();
  tlm_cmd->add_option("--delta", tlm.delta, "additive smoothing")->capture_default_str();
  tlm_cmd->add_option("--out", tlm.out, "LM file")->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train the encoder");
  tr_cmd->add_option("--data", tr.data, "dataset directory")
      ->required();
  tr_cmd->add_option("--config", tr.config, "training config JSON");
  tr_cmd->add_option("--out", tr.out, "checkpoint file")->required();
  tr_cmd->add_option("--seed", tr.seed, "override the training seed");
  tr_cmd->add_option("--epochs", tr.epochs, "override the epoch count");

  DecodeArgs dec;
  DecodeArgs mp;
  mp.conds = {"selfcond"};
  mp.decoders = {"beam"};
  for (auto* d : {&dec, &mp}) {
    const bool is_mp = d == &mp;
    auto* cmd = app.add_subcommand(is_mp ? "multipass" : "decode",
                                   is_mp ? "Multi-pass conditioned decoding"
                                         : "Decode under conditioning modes");
    cmd->add_option("--model", d->model, "checkpoint")
        ->required();
    cmd->add_option("--data", d->data, "dataset directory")
        ->required();
    cmd->add_option("--split", d->splits, "dev, test or train")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--cond", d->conds,
                    is_mp ? "pass-1 conditioning" : "none,selfcond,bestpath,searched,oracle")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--output-decode", d->decoders, "greedy or beam")
        ->delimiter(',')
        ->capture_default_str();
    d->flags.Add(cmd, true);
    cmd->add_option("--report", d->report, "report JSON (table goes to <file>.txt)");
    cmd->add_option("--hyp", d->hyp, "hypothesis TSV");
    if (is_mp) cmd->add_option("--passes", d->passes, "number of passes")->required();
  }

  AlignArgs al;
  auto* al_cmd = app.add_subcommand("align", "Forced-align a text to each lattice");
  al_cmd->add_option("--model", al.model, "checkpoint")
      ->required();
  al_cmd->add_option("--data", al.data, "dataset directory")
      ->required();
  al_cmd->add_option("--utt", al.utt, "utterance id")->required();
  al_cmd->add_option("--text", al.text, "space-joined label symbols")->required();
  al_cmd->add_option("--cond", al.cond, "forward conditioning")->capture_default_str();

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score a hypothesis TSV");
  ev_cmd->add_option("--ref", ev.ref, "reference TSV")
      ->required();
  ev_cmd->add_option("--hyp", ev.hyp, "hypothesis TSV")
      ->required();
  ev_cmd->add_option("--report", ev.report, "JSON summary");

  ExperimentArgs ex;
  auto* ex_cmd = app.add_subcommand(
      "experiment", "Generate, train and decode the synthetic task per seed");
  ex_cmd->add_option("--seeds", ex.seeds, "seeds")->delimiter(',')->capture_default_str();
  ex_cmd->add_option("--epochs", ex.epochs, "override the epoch count");
  ex_cmd->add_option("--split", ex.splits, "splits")->delimiter(',')->capture_default_str();
  ex_cmd->add_option("--output-decode", ex.decoders, "greedy and/or beam")
      ->delimiter(',')
      ->capture_default_str();
  ex_cmd->add_option("--passes", ex.passes, "multi-pass sweep length")
      ->capture_default_str();
  ex.flags.Add(ex_cmd, false);
  ex_cmd->add_option("--out", ex.out_dir, "directory for per-seed reports");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return GenData(gen, out);
    if (tlm_cmd->parsed()) return TrainLm(tlm, out);
    if (tr_cmd->parsed()) return TrainCmd(tr, out);
    if (app.got_subcommand("decode")) return DecodeCmd(dec, false, out);
    if (app.got_subcommand("multipass")) return DecodeCmd(mp, true, out);
    if (al_cmd->parsed()) return AlignCmd(al, out);
    if (ev_cmd->parsed()) return EvalCmd(ev, out);
    if (ex_cmd->parsed()) return ExperimentCmd(ex, out);
  } catch (const InvalidConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error (" << ErrorKindName(e.kind()) << "): " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cli
}  // namespace selfcond
