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

#include <string>

#include "json.hpp"
#include "selfcond/io.h"
#include "selfcond/model.h"
#include "selfcond/status.h"

namespace selfcond {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void JsonToMatrix(const json& j, Matrix& m, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw DataError("checkpoint tensor " + name + " has wrong row count");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw DataError("checkpoint tensor " + name + " has wrong column count");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
  }
}

}  // namespace

std::string SerializeModel(const EncoderModel& model) {
  const EncoderConfig& cfg = model.config();
  json j;
  j["model_version"] = kModelVersion;
  j["config"] = {
      {"input_dim", cfg.input_dim},
      {"dim", cfg.dim},
      {"num_layers", cfg.num_layers},
      {"context_radius", cfg.context_radius},
      {"conditioning_layers", cfg.conditioning_layers},
      {"init_scale", cfg.init_scale},
  };
  j["vocabulary"] = model.vocab().labels();
  json params = json::object();
  model.ForEachParam([&](const std::string& name, const Matrix& m) {
    params[name] = MatrixToJson(m);
  });
  j["params"] = std::move(params);
  return j.dump(1) + "\n";
}

EncoderModel DeserializeModel(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("model_version", 0) != kModelVersion) {
      throw DataError("unsupported checkpoint model_version");
    }
    const json& c = j.at("config");
    EncoderConfig cfg;
    cfg.input_dim = c.at("input_dim").get<int>();
    cfg.dim = c.at("dim").get<int>();
    cfg.num_layers = c.at("num_layers").get<int>();
    cfg.context_radius = c.at("context_radius").get<int>();
    cfg.conditioning_layers = c.at("conditioning_layers").get<std::vector<int>>();
    cfg.init_scale = c.value("init_scale", 1.0);
    Vocabulary vocab(j.at("vocabulary").get<std::vector<std::string>>());
    EncoderModel model(cfg, vocab, 0);
    const json& params = j.at("params");
    model.ForEachParam([&](const std::string& name, Matrix& m) {
      if (!params.contains(name)) {
        throw DataError("checkpoint lacks tensor " + name);
      }
      JsonToMatrix(params.at(name), m, name);
    });
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InvalidConfigError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  } catch (const InvalidInputError& e) {
    throw DataError(std::string("checkpoint vocabulary: ") + e.what());
  }
}

void SaveModel(const EncoderModel& model, const std::filesystem::path& file) {
  WriteTextFile(file, SerializeModel(model));
}

EncoderModel LoadModel(const std::filesystem::path& file) {
  try {
    return DeserializeModel(ReadTextFile(file));
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

}  // namespace selfcond
