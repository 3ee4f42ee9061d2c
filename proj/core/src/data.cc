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

#include "selfcond/data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "selfcond/io.h"
#include "selfcond/random.h"
#include "selfcond/status.h"

namespace selfcond {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMaxPrototypeDraws = 100000;

double Distance(const Matrix& protos, int a, int b) {
  return (protos.row(a) - protos.row(b)).norm();
}

bool IsConfusable(const TaskSpec& spec, int a, int b) {
  for (const auto& [x, y] : spec.confusable_pairs) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

int SampleCategorical(const Eigen::Ref<const Vector>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding: fall back to the last label with mass.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs(i) > 0.0) return static_cast<int>(i);
  }
  return 0;
}

LabelSequence SampleTranscript(const TaskSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> length(spec.min_length, spec.max_length);
  const int n = length(rng);
  LabelSequence seq;
  int state = SampleCategorical(spec.initial, rng);
  seq.labels.push_back(state + 1);
  for (int i = 1; i < n; ++i) {
    state = SampleCategorical(spec.transitions.row(state).transpose(), rng);
    seq.labels.push_back(state + 1);
  }
  return seq;
}

// Features plus the emitting label of every frame.
std::pair<Matrix, std::vector<int>> SampleFeatures(const TaskSpec& spec,
                                                   const LabelSequence& seq,
                                                   std::mt19937_64& rng) {
  std::uniform_int_distribution<int> duration(spec.min_duration, spec.max_duration);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<int> frame_labels;
  for (int k : seq) {
    const int d = duration(rng);
    frame_labels.insert(frame_labels.end(), d, k);
  }
  Matrix feats(static_cast<Eigen::Index>(frame_labels.size()), spec.input_dim);
  for (std::size_t t = 0; t < frame_labels.size(); ++t) {
    for (int j = 0; j < spec.input_dim; ++j) {
      // Stored as float32 on disk; round here so in-memory and on-disk
      // corpora are identical.
      feats(t, j) = static_cast<float>(spec.prototypes(frame_labels[t] - 1, j) +
                                       spec.noise * noise(rng));
    }
  }
  return {std::move(feats), std::move(frame_labels)};
}

std::string UtteranceId(const std::string& stream, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return stream + "-" + buf;
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix JsonMatrix(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw InvalidConfigError("ragged matrix in task spec");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json SpecJson(const TaskSpec& spec) {
  json j;
  j["num_labels"] = spec.num_labels;
  j["input_dim"] = spec.input_dim;
  j["num_confusable_pairs"] = spec.num_confusable_pairs;
  j["min_duration"] = spec.min_duration;
  j["max_duration"] = spec.max_duration;
  j["noise"] = spec.noise;
  j["min_length"] = spec.min_length;
  j["max_length"] = spec.max_length;
  j["train_count"] = spec.train_count;
  j["dev_count"] = spec.dev_count;
  j["test_count"] = spec.test_count;
  j["lm_count"] = spec.lm_count;
  j["seed"] = spec.seed;
  json pairs = json::array();
  for (const auto& [a, b] : spec.confusable_pairs) pairs.push_back({a, b});
  j["confusable_pairs"] = pairs;
  j["prototypes"] = MatrixJson(spec.prototypes);
  j["transitions"] = MatrixJson(spec.transitions);
  j["initial"] = std::vector<double>(spec.initial.data(),
                                     spec.initial.data() + spec.initial.size());
  return j;
}

TaskSpec SpecFromJson(const json& j) {
  TaskSpec spec;
  spec.num_labels = j.value("num_labels", spec.num_labels);
  spec.input_dim = j.value("input_dim", spec.input_dim);
  spec.num_confusable_pairs =
      j.value("num_confusable_pairs", spec.num_confusable_pairs);
  spec.min_duration = j.value("min_duration", spec.min_duration);
  spec.max_duration = j.value("max_duration", spec.max_duration);
  spec.noise = j.value("noise", spec.noise);
  spec.min_length = j.value("min_length", spec.min_length);
  spec.max_length = j.value("max_length", spec.max_length);
  spec.train_count = j.value("train_count", spec.train_count);
  spec.dev_count = j.value("dev_count", spec.dev_count);
  spec.test_count = j.value("test_count", spec.test_count);
  spec.lm_count = j.value("lm_count", spec.lm_count);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("confusable_pairs")) {
    for (const auto& p : j.at("confusable_pairs")) {
      spec.confusable_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
  }
  if (j.contains("prototypes")) spec.prototypes = JsonMatrix(j.at("prototypes"));
  if (j.contains("transitions")) spec.transitions = JsonMatrix(j.at("transitions"));
  if (j.contains("initial")) {
    const auto v = j.at("initial").get<std::vector<double>>();
    spec.initial = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return spec;
}

}  // namespace

Vocabulary TaskSpec::MakeVocabulary() const {
  std::vector<std::string> labels;
  for (int i = 0; i < num_labels; ++i) {
    labels.push_back(i < 26 ? std::string(1, static_cast<char>('a' + i))
                            : "l" + std::to_string(i + 1));
  }
  return Vocabulary(labels);
}

void TaskSpec::Materialize() {
  if (num_labels < 1 || input_dim < 1) {
    throw InvalidConfigError("task needs at least one label and one feature");
  }
  if (num_confusable_pairs < 0 || 2 * num_confusable_pairs > num_labels) {
    throw InvalidConfigError("too many confusable pairs for the label count");
  }
  std::mt19937_64 rng(DeriveSeed(seed, "task"));
  if (confusable_pairs.empty()) {
    for (int p = 0; p < num_confusable_pairs; ++p) {
      confusable_pairs.emplace_back(2 * p + 1, 2 * p + 2);
    }
  }
  if (prototypes.size() == 0) {
    // One center per group; pair members sit at +-sigma/4 along a random
    // direction, so they are sigma/2 apart.
    const double unit = std::max(noise, 0.1);
    const double scale = 5.5 * unit / std::sqrt(static_cast<double>(input_dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPrototypeDraws && !ok; ++attempt) {
      prototypes = Matrix::Zero(num_labels, input_dim);
      std::vector<bool> placed(num_labels, false);
      auto center = [&]() {
        Vector c(input_dim);
        for (int j = 0; j < input_dim; ++j) c(j) = scale * gauss(rng);
        return c;
      };
      for (const auto& [a, b] : confusable_pairs) {
        const Vector c = center();
        Vector dir(input_dim);
        for (int j = 0; j < input_dim; ++j) dir(j) = gauss(rng);
        dir.normalize();
        prototypes.row(a - 1) = (c + 0.25 * noise * dir).transpose();
        prototypes.row(b - 1) = (c - 0.25 * noise * dir).transpose();
        placed[a - 1] = placed[b - 1] = true;
      }
      for (int i = 0; i < num_labels; ++i) {
        if (!placed[i]) prototypes.row(i) = center().transpose();
      }
      ok = true;
      for (int a = 1; a <= num_labels && ok; ++a) {
        for (int b = a + 1; b <= num_labels && ok; ++b) {
          if (!IsConfusable(*this, a, b) &&
              Distance(prototypes, a - 1, b - 1) <= 4.0 * noise + 0.5 * unit) {
            ok = false;
          }
        }
      }
    }
    if (!ok) throw InvalidConfigError("could not place separable prototypes");
  }
  if (transitions.size() == 0) {
    transitions = Matrix::Zero(num_labels, num_labels);
    std::uniform_real_distribution<double> weight(0.5, 1.5);
    for (int i = 0; i < num_labels; ++i) {
      std::vector<int> others;
      for (int j = 0; j < num_labels; ++j) {
        if (j != i) others.push_back(j);
      }
      if (others.empty()) {
        transitions(i, i) = 1.0;
        continue;
      }
      std::shuffle(others.begin(), others.end(), rng);
      const int fan = std::min<int>(static_cast<int>(others.size()),
                                    std::uniform_int_distribution<int>(2, 3)(rng));
      double total = 0.0;
      for (int s = 0; s < fan; ++s) {
        transitions(i, others[s]) = weight(rng);
        total += transitions(i, others[s]);
      }
      transitions.row(i) /= total;
    }
  }
  if (initial.size() == 0) {
    initial = Vector::Constant(num_labels, 1.0 / num_labels);
  }
  Validate();
}

void TaskSpec::Validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfigError(what); };
  if (num_labels < 1 || input_dim < 1) fail("task needs labels and features");
  if (min_duration < 1 || max_duration < min_duration) fail("bad duration range");
  if (min_length < 1 || max_length < min_length) fail("bad length range");
  if (!(noise >= 0.0)) fail("noise must be >= 0");
  if (train_count < 0 || dev_count < 0 || test_count < 0 || lm_count < 0) {
    fail("split sizes must be >= 0");
  }
  if (prototypes.rows() != num_labels || prototypes.cols() != input_dim) {
    fail("prototype matrix must be num_labels x input_dim");
  }
  if (transitions.rows() != num_labels || transitions.cols() != num_labels) {
    fail("transition matrix must be num_labels x num_labels");
  }
  if (initial.size() != num_labels) fail("initial distribution has wrong size");
  bool self_loops = false;
  for (int i = 0; i < num_labels; ++i) {
    if ((transitions.row(i).array() < 0.0).any()) fail("negative transition");
    if (std::abs(transitions.row(i).sum() - 1.0) > 1e-9) {
      fail("transition row " + std::to_string(i + 1) + " does not sum to 1");
    }
    if (transitions(i, i) > 0.0) self_loops = true;
  }
  if ((initial.array() < 0.0).any() || std::abs(initial.sum() - 1.0) > 1e-9) {
    fail("initial distribution must be a probability vector");
  }
  if (self_loops && min_duration < 2) {
    fail("repeated labels need min_duration >= 2 to stay CTC-feasible");
  }
  std::set<int> used;
  for (const auto& [a, b] : confusable_pairs) {
    if (a < 1 || b < 1 || a > num_labels || b > num_labels || a == b) {
      fail("bad confusable pair");
    }
    if (!used.insert(a).second || !used.insert(b).second) {
      fail("label in more than one confusable pair");
    }
    if (!(Distance(prototypes, a - 1, b - 1) < noise)) {
      fail("confusable pair prototypes must be closer than the noise level");
    }
  }
  for (int a = 1; a <= num_labels; ++a) {
    for (int b = a + 1; b <= num_labels; ++b) {
      if (!IsConfusable(*this, a, b) &&
          !(Distance(prototypes, a - 1, b - 1) > 4.0 * noise)) {
        fail("labels " + std::to_string(a) + " and " + std::to_string(b) +
             " are closer than 4 sigma");
      }
    }
  }
}

TaskSpec DefaultTaskSpec(std::uint64_t seed) {
  TaskSpec spec;
  spec.seed = seed;
  spec.Materialize();
  return spec;
}

std::vector<Utterance> Generate(const TaskSpec& spec, int count,
                                const std::string& stream) {
  spec.Validate();
  if (count < 0) throw InvalidConfigError("count must be >= 0");
  std::mt19937_64 rng(DeriveSeed(spec.seed, "data/" + stream));
  std::vector<Utterance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Utterance utt;
    utt.id = UtteranceId(stream, i);
    utt.transcript = SampleTranscript(spec, rng);
    utt.features = SampleFeatures(spec, utt.transcript, rng).first;
    out.push_back(std::move(utt));
  }
  return out;
}

std::vector<LabelSequence> LmCorpus(const TaskSpec& spec, int count) {
  spec.Validate();
  std::mt19937_64 rng(DeriveSeed(spec.seed, "lm"));
  std::vector<LabelSequence> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) out.push_back(SampleTranscript(spec, rng));
  return out;
}

double MeasureConfusion(const TaskSpec& spec, int count) {
  spec.Validate();
  std::mt19937_64 rng(DeriveSeed(spec.seed, "confusion"));
  long frames = 0, confused = 0;
  for (int i = 0; i < count; ++i) {
    const LabelSequence seq = SampleTranscript(spec, rng);
    const auto [feats, labels] = SampleFeatures(spec, seq, rng);
    for (Eigen::Index t = 0; t < feats.rows(); ++t) {
      const int truth = labels[t];
      int partner = 0;
      for (const auto& [a, b] : spec.confusable_pairs) {
        if (a == truth) partner = b;
        if (b == truth) partner = a;
      }
      if (partner == 0) continue;
      int nearest = 1;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= spec.num_labels; ++k) {
        const double d = (feats.row(t) - spec.prototypes.row(k - 1)).squaredNorm();
        if (d < best) {
          best = d;
          nearest = k;
        }
      }
      ++frames;
      if (nearest == partner) ++confused;
    }
  }
  return frames == 0 ? 0.0 : static_cast<double>(confused) / frames;
}

Dataset GenerateDataset(const TaskSpec& spec) {
  Dataset data;
  data.spec = spec;
  if (data.spec.prototypes.size() == 0 || data.spec.transitions.size() == 0 ||
      data.spec.initial.size() == 0) {
    data.spec.Materialize();
  }
  data.spec.Validate();
  data.vocab = data.spec.MakeVocabulary();
  data.splits["train"] = Generate(data.spec, data.spec.train_count, "train");
  data.splits["dev"] = Generate(data.spec, data.spec.dev_count, "dev");
  data.splits["test"] = Generate(data.spec, data.spec.test_count, "test");
  data.lm_corpus = LmCorpus(data.spec, data.spec.lm_count);
  return data;
}

std::string TaskSpecToJson(const TaskSpec& spec) {
  return SpecJson(spec).dump(1) + "\n";
}

TaskSpec TaskSpecFromJson(const std::string& text) {
  try {
    return SpecFromJson(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidConfigError(std::string("bad task spec: ") + e.what());
  }
}

void WriteDataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir / "features");
  WriteVocabulary(data.vocab, dir / "vocab.txt");
  TranscriptMap transcripts;
  json splits = json::object();
  for (const auto& [name, utts] : data.splits) {
    json ids = json::array();
    for (const auto& utt : utts) {
      WriteMatrixFile(utt.features, kFeatureMagic,
                      dir / "features" / (utt.id + ".bin"));
      transcripts[utt.id] = utt.transcript;
      ids.push_back(utt.id);
    }
    splits[name] = std::move(ids);
  }
  WriteTranscripts(transcripts, data.vocab, dir / "transcripts.tsv");
  std::string corpus;
  for (const auto& seq : data.lm_corpus) corpus += ToString(seq, data.vocab) + "\n";
  WriteTextFile(dir / "lm_corpus.txt", corpus);
  json manifest;
  manifest["dataset_version"] = 1;
  manifest["spec"] = SpecJson(data.spec);
  manifest["splits"] = std::move(splits);
  WriteTextFile(dir / "manifest.json", manifest.dump(1) + "\n");
}

Dataset ReadDataset(const fs::path& dir) {
  RequireFiles({dir / "manifest.json", dir / "vocab.txt", dir / "transcripts.tsv"});
  Dataset data;
  json manifest;
  try {
    manifest = json::parse(ReadTextFile(dir / "manifest.json"));
    data.spec = SpecFromJson(manifest.at("spec"));
    data.spec.Validate();
  } catch (const json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  } catch (const InvalidConfigError& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
  data.vocab = ReadVocabulary(dir / "vocab.txt");
  const TranscriptMap transcripts =
      ReadTranscripts(dir / "transcripts.tsv", data.vocab);
  std::vector<fs::path> feature_files;
  try {
    for (const auto& [name, ids] : manifest.at("splits").items()) {
      for (const auto& id : ids) {
        feature_files.push_back(dir / "features" / (id.get<std::string>() + ".bin"));
      }
    }
  } catch (const json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
  RequireFiles(feature_files);
  for (const auto& [name, ids] : manifest.at("splits").items()) {
    auto& utts = data.splits[name];
    for (const auto& id_json : ids) {
      const std::string id = id_json.get<std::string>();
      auto it = transcripts.find(id);
      if (it == transcripts.end()) {
        throw DataError("transcripts.tsv lacks utterance " + id);
      }
      Utterance utt;
      utt.id = id;
      utt.features = ReadMatrixFile(dir / "features" / (id + ".bin"), kFeatureMagic);
      utt.transcript = it->second;
      utts.push_back(std::move(utt));
    }
  }
  if (fs::exists(dir / "lm_corpus.txt")) {
    std::istringstream in(ReadTextFile(dir / "lm_corpus.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      data.lm_corpus.push_back(ParseLabels(line, data.vocab));
    }
  }
  return data;
}

}  // namespace selfcond
