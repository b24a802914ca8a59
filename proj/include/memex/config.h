// Copyright 2026 The Memex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMEX_CONFIG_H_
#define MEMEX_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "memex/corpus.h"
#include "memex/metrics.h"
#include "memex/model.h"
#include "memex/trainer.h"

namespace memex {

// JSON forms of the configuration records. Readers reject unknown keys and
// wrong types with ConfigError; missing keys keep their defaults.
nlohmann::json ToJson(const ModelConfig &config);
ModelConfig ModelConfigFromJson(const nlohmann::json &j);
nlohmann::json ToJson(const TrainConfig &config);
TrainConfig TrainConfigFromJson(const nlohmann::json &j);

struct DataConfig {
  std::filesystem::path manifest;
  std::filesystem::path split;  // optional; generated when empty
  SplitRatios ratios;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
  BleuSmoothing bleu_smoothing = BleuSmoothing::kAddOne;
  std::filesystem::path out = "memex_out";
  int repeats = 1;

  // Propagates the run seed to the model and the trainer.
  void SetSeed(std::uint64_t seed);
  // Mode/schedule consistency plus model validation.
  void Validate() const;
};

// Relative data paths resolve against the config file's directory.
RunConfig LoadRunConfig(const std::filesystem::path &path);
RunConfig RunConfigFromJson(const nlohmann::json &j, const std::filesystem::path &base_dir);

}  // namespace memex

#endif  // MEMEX_CONFIG_H_
