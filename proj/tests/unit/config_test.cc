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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "memex/config.h"
#include "memex/errors.h"
#include "support/toy.h"

namespace memex {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

TEST_SUITE("config") {
  TEST_CASE("model and train configs round trip through JSON") {
    ModelConfig m = testing::ToyModelConfig(Mode::kMultitask);
    m.neck.gate = false;
    m.textgen.variant = FusionVariant::kDotProduct;
    m.backbone.vocabulary = {"a", "b"};
    const json jm = ToJson(m);
    CHECK(ToJson(ModelConfigFromJson(jm)) == jm);

    TrainConfig t = testing::ToyTrainConfig();
    t.schedule = LossSchedule{20, {LossKind::kSegmentation, LossKind::kGeneration}};
    const json jt = ToJson(t);
    const TrainConfig back = TrainConfigFromJson(jt);
    CHECK(ToJson(back) == jt);
    CHECK(back.schedule == t.schedule);
  }

  TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(ModelConfigFromJson(json{{"mode", "multitask"}, {"colour", 1}}), ConfigError);
    CHECK_THROWS_AS(ModelConfigFromJson(json{{"neck", {{"heads", "eight"}}}}), ConfigError);
    CHECK_THROWS_AS(ModelConfigFromJson(json{{"textgen", {{"variant", "A3"}}}}), ConfigError);
    CHECK_THROWS_AS(TrainConfigFromJson(json{{"epochs", 0}}), ConfigError);
    CHECK_THROWS_AS(TrainConfigFromJson(json{{"schedule", {{"ep", 5}, {"order", {"generation"}}}}}), ConfigError);
    CHECK_THROWS_AS(TrainConfigFromJson(json{{"schedule", {{"order", {"generation", "generation"}}}}}),
                    ConfigError);
  }

  TEST_CASE("run config resolves paths and propagates the seed") {
    const auto dir = testing::ScratchDir("config");
    const json j = {{"mode", "single_text"},
                    {"seed", 9},
                    {"data", {{"manifest", "data/manifest.jsonl"}, {"ratios", {0.8, 0.1, 0.1}}}},
                    {"out", "runs/a"},
                    {"repeats", 2}};
    std::ofstream(dir / "run.json") << j.dump();
    const RunConfig c = LoadRunConfig(dir / "run.json");
    CHECK(c.model.mode == Mode::kSingleText);
    CHECK(c.data.manifest == dir / "data/manifest.jsonl");
    CHECK(c.out == dir / "runs/a");
    CHECK(c.data.ratios.train == 0.8);
    CHECK(c.model.seed == 9);
    CHECK(c.train.seed == 9);
    CHECK(c.repeats == 2);
    CHECK_NOTHROW(c.Validate());
    fs::remove_all(dir);
  }

  TEST_CASE("run config validation") {
    RunConfig c;
    c.model.mode = Mode::kSingleVision;
    c.train.schedule = LossSchedule{};
    CHECK_THROWS_AS(c.Validate(), ConfigError);
    c.train.schedule.reset();
    c.data.ratios = {0.5, 0.1, 0.1};
    CHECK_THROWS_AS(c.Validate(), ConfigError);
    CHECK_THROWS_AS(LoadRunConfig("/nonexistent/run.json"), ConfigError);
  }

  TEST_CASE("shipped configs parse and validate") {
    for (const auto &entry : fs::directory_iterator(fs::path(MEMEX_SOURCE_DIR) / "configs")) {
      if (entry.path().extension() != ".json") continue;
      const RunConfig c = LoadRunConfig(entry.path());
      CHECK_NOTHROW(c.Validate());
    }
  }
}

}  // namespace
}  // namespace memex
