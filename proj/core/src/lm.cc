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

#include "selfcond/lm.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "selfcond/io.h"
#include "selfcond/status.h"

namespace selfcond {

namespace {

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

NGramModel::NGramModel(Vocabulary vocab, int order, double delta)
    : vocab_(std::move(vocab)), order_(order), delta_(delta) {
  if (order_ < 1) throw InvalidConfigError("n-gram order must be >= 1");
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
    throw InvalidConfigError("additive smoothing delta must be > 0");
  }
  if (vocab_.Contains(kBeginSymbol) || vocab_.Contains(kEndSymbol)) {
    throw InvalidInputError("vocabulary uses a reserved LM marker");
  }
}

std::vector<int> NGramModel::ContextOf(const std::vector<int>& prefix) const {
  const int n = order_ - 1;
  std::vector<int> ctx(n, kBeginMarker);
  const int take = std::min<int>(n, static_cast<int>(prefix.size()));
  for (int i = 0; i < take; ++i) {
    ctx[n - take + i] = prefix[prefix.size() - take + i];
  }
  return ctx;
}

void NGramModel::CheckEvent(int event) const {
  if (event < 1 || event > end_event()) {
    throw InvalidInputError("LM event " + std::to_string(event) +
                            " is neither a label nor the end event");
  }
}

void NGramModel::AddSentence(const LabelSequence& sentence) {
  std::vector<int> history;
  auto add = [&](int event) {
    auto& entry = contexts_[ContextOf(history)];
    if (entry.counts.empty()) entry.counts.assign(end_event() + 1, 0);
    ++entry.counts[event];
    ++entry.total;
  };
  for (int k : sentence) {
    CheckEvent(k);
    if (k == end_event()) throw InvalidInputError("end event inside sentence");
    add(k);
    history.push_back(k);
  }
  add(end_event());
}

double NGramModel::Prob(const std::vector<int>& context, int event) const {
  CheckEvent(event);
  const double denom_extra = delta_ * num_events();
  auto it = contexts_.find(context);
  if (it == contexts_.end()) return delta_ / denom_extra;
  return (static_cast<double>(it->second.counts[event]) + delta_) /
         (static_cast<double>(it->second.total) + denom_extra);
}

double NGramModel::ScoreNextContext(const std::vector<int>& context,
                                    int event) const {
  return std::log(Prob(context, event));
}

double NGramModel::ScoreNext(const LabelSequence& prefix, int event) const {
  return ScoreNextContext(ContextOf(prefix.labels), event);
}

double NGramModel::SentenceLogProb(const LabelSequence& sentence) const {
  double total = 0.0;
  std::vector<int> history;
  for (int k : sentence) {
    total += ScoreNextContext(ContextOf(history), k);
    history.push_back(k);
  }
  return total + ScoreNextContext(ContextOf(history), end_event());
}

std::string NGramModel::Serialize() const {
  std::string out = "NGRAM v1 order=" + std::to_string(order_) +
                    " delta=" + FormatDouble(delta_) + "\n";
  auto symbol = [&](int id) -> std::string {
    if (id == kBeginMarker) return kBeginSymbol;
    if (id == end_event()) return kEndSymbol;
    return vocab_.Symbol(id);
  };
  for (const auto& [ctx, entry] : contexts_) {
    std::string line;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (i) line += ' ';
      line += symbol(ctx[i]);
    }
    line += '\t';
    bool first = true;
    for (int e = 1; e <= end_event(); ++e) {
      if (entry.counts[e] == 0) continue;
      if (!first) line += ' ';
      first = false;
      line += symbol(e) + ":" + std::to_string(entry.counts[e]);
    }
    out += line + "\n";
  }
  return out;
}

NGramModel NGramModel::Deserialize(const std::string& text,
                                   const Vocabulary& vocab) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty LM file");
  std::istringstream hs(header);
  std::string magic, version, order_field, delta_field;
  hs >> magic >> version >> order_field >> delta_field;
  if (magic != "NGRAM" || version != "v1" ||
      order_field.rfind("order=", 0) != 0 ||
      delta_field.rfind("delta=", 0) != 0) {
    throw DataError("bad LM header: \"" + header + "\"");
  }
  int order = 0;
  double delta = 0.0;
  try {
    order = std::stoi(order_field.substr(6));
    delta = std::stod(delta_field.substr(6));
  } catch (const std::exception&) {
    throw DataError("bad LM header values: \"" + header + "\"");
  }
  NGramModel model(vocab, order, delta);
  auto parse_symbol = [&](const std::string& s) -> int {
    if (s == kBeginSymbol) return kBeginMarker;
    if (s == kEndSymbol) return model.end_event();
    if (!vocab.Contains(s) || vocab.Id(s) == kBlankId) {
      throw DataError("LM token \"" + s + "\" not in vocabulary");
    }
    return vocab.Id(s);
  };
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("LM line lacks a tab: " + line);
    std::vector<int> ctx;
    std::istringstream cs(line.substr(0, tab));
    std::string tok;
    while (cs >> tok) ctx.push_back(parse_symbol(tok));
    if (static_cast<int>(ctx.size()) != order - 1) {
      throw DataError("LM context has wrong length: " + line);
    }
    auto& entry = model.contexts_[ctx];
    entry.counts.assign(model.end_event() + 1, 0);
    std::istringstream ps(line.substr(tab + 1));
    while (ps >> tok) {
      const auto colon = tok.rfind(':');
      if (colon == std::string::npos) throw DataError("bad LM pair: " + tok);
      const int event = parse_symbol(tok.substr(0, colon));
      if (event == kBeginMarker) throw DataError("begin marker as LM event");
      long count = 0;
      try {
        count = std::stol(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw DataError("bad LM count: " + tok);
      }
      if (count < 0) throw DataError("negative LM count: " + tok);
      entry.counts[event] += count;
      entry.total += count;
    }
  }
  return model;
}

void NGramModel::Save(const std::filesystem::path& file) const {
  WriteTextFile(file, Serialize());
}

NGramModel NGramModel::Load(const std::filesystem::path& file,
                            const Vocabulary& vocab) {
  try {
    return Deserialize(ReadTextFile(file), vocab);
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

NGramModel TrainNGram(const std::vector<LabelSequence>& corpus,
                      const Vocabulary& vocab, int order, double delta) {
  if (corpus.empty()) throw InvalidInputError("empty LM training corpus");
  NGramModel model(vocab, order, delta);
  for (const auto& sentence : corpus) model.AddSentence(sentence);
  return model;
}

}  // namespace selfcond
