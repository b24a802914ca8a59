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

#include "memex/config.h"

#include <cmath>
#include <fstream>
#include <set>

#include "memex/errors.h"

namespace memex {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Checked access to one JSON object; every key read is remembered so that
// leftovers (usually typos) can be reported.
class Reader {
 public:
  Reader(const json &j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void Get(const char *key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception &) {
      throw ConfigError(where_ + "." + key + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  const json *Child(const char *key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void Finish() const {
    for (const auto &[key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json &j_;
  std::string where_;
  std::set<std::string> seen_;
};

void ReadBackbone(const json &j, BackboneConfig &c) {
  Reader r(j, "backbone");
  r.Get("kind", c.kind);
  r.Get("d_t", c.d_t);
  r.Get("patch_rows", c.patch_rows);
  r.Get("patch_cols", c.patch_cols);
  r.Get("layers", c.layer_count);
  r.Get("max_positions", c.max_positions);
  r.Get("seed", c.seed);
  r.Get("vocabulary", c.vocabulary);
  r.Finish();
}

void ReadNeck(const json &j, NeckConfig &c) {
  Reader r(j, "neck");
  r.Get("projected_length", c.projected_length);
  r.Get("layers", c.layers);
  r.Get("heads", c.heads);
  if (const json *g = r.Child("gate"); g && !g->is_null()) {
    if (!g->is_boolean()) throw ConfigError("neck.gate: expected true, false or null");
    c.gate = g->get<bool>();
  }
  r.Finish();
}

void ReadTextGen(const json &j, TextGenConfig &c) {
  Reader r(j, "textgen");
  std::string variant = FusionVariantName(c.variant);
  r.Get("variant", variant);
  c.variant = ParseFusionVariant(variant);
  r.Get("layers", c.layers);
  r.Get("heads", c.heads);
  r.Get("decoder_layers", c.decoder_layers);
  r.Get("max_len", c.max_len);
  r.Get("adapter", c.adapter);
  r.Finish();
}

void ReadSeg(const json &j, SegConfig &c) {
  Reader r(j, "seg");
  r.Get("threshold", c.threshold);
  r.Get("blocks", c.blocks);
  r.Get("heads", c.heads);
  r.Get("modulation", c.modulation);
  r.Finish();
}

LossSchedule ReadSchedule(const json &j) {
  Reader r(j, "train.schedule");
  LossSchedule s;
  r.Get("ep", s.ep);
  std::vector<std::string> order;
  r.Get("order", order);
  if (!order.empty()) {
    if (order.size() != 2) throw ConfigError("train.schedule.order must list exactly two losses");
    s.order = {ParseLossKind(order[0]), ParseLossKind(order[1])};
  }
  r.Finish();
  s.Validate();
  return s;
}

void ReadModelKeys(Reader &r, ModelConfig &c) {
  std::string mode = ModeName(c.mode);
  r.Get("mode", mode);
  c.mode = ParseMode(mode);
  r.Get("seed", c.seed);
  if (const json *b = r.Child("backbone")) ReadBackbone(*b, c.backbone);
  if (const json *n = r.Child("neck")) ReadNeck(*n, c.neck);
  if (const json *t = r.Child("textgen")) ReadTextGen(*t, c.textgen);
  if (const json *s = r.Child("seg")) ReadSeg(*s, c.seg);
}

fs::path Resolve(const fs::path &base, const fs::path &p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

json ToJson(const ModelConfig &c) {
  json j;
  j["mode"] = ModeName(c.mode);
  j["seed"] = c.seed;
  j["backbone"] = {{"kind", c.backbone.kind},
                   {"d_t", c.backbone.d_t},
                   {"patch_rows", c.backbone.patch_rows},
                   {"patch_cols", c.backbone.patch_cols},
                   {"layers", c.backbone.layer_count},
                   {"max_positions", c.backbone.max_positions},
                   {"seed", c.backbone.seed},
                   {"vocabulary", c.backbone.vocabulary}};
  j["neck"] = {{"projected_length", c.neck.projected_length},
               {"layers", c.neck.layers},
               {"heads", c.neck.heads},
               {"gate", c.neck.gate ? json(*c.neck.gate) : json(nullptr)}};
  j["textgen"] = {{"variant", FusionVariantName(c.textgen.variant)},
                  {"layers", c.textgen.layers},
                  {"heads", c.textgen.heads},
                  {"decoder_layers", c.textgen.decoder_layers},
                  {"max_len", c.textgen.max_len},
                  {"adapter", c.textgen.adapter}};
  j["seg"] = {{"threshold", c.seg.threshold},
              {"blocks", c.seg.blocks},
              {"heads", c.seg.heads},
              {"modulation", c.seg.modulation}};
  return j;
}

ModelConfig ModelConfigFromJson(const json &j) {
  Reader r(j, "model");
  ModelConfig c;
  ReadModelKeys(r, c);
  r.Finish();
  return c;
}

json ToJson(const TrainConfig &c) {
  json j = {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"linear_decay", c.linear_decay},
            {"seed", c.seed}};
  if (c.schedule) {
    j["schedule"] = {{"ep", c.schedule->ep},
                     {"order", {LossName(c.schedule->order[0]), LossName(c.schedule->order[1])}}};
  } else {
    j["schedule"] = nullptr;
  }
  return j;
}

TrainConfig TrainConfigFromJson(const json &j) {
  Reader r(j, "train");
  TrainConfig c;
  r.Get("epochs", c.epochs);
  r.Get("batch_size", c.batch_size);
  r.Get("learning_rate", c.learning_rate);
  r.Get("beta1", c.beta1);
  r.Get("beta2", c.beta2);
  r.Get("epsilon", c.epsilon);
  r.Get("linear_decay", c.linear_decay);
  r.Get("seed", c.seed);
  if (const json *s = r.Child("schedule"); s && !s->is_null()) c.schedule = ReadSchedule(*s);
  r.Finish();
  c.Validate();
  return c;
}

void RunConfig::SetSeed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
}

void RunConfig::Validate() const {
  model.Validate();
  CheckModeSchedule(model.mode, train);
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  const SplitRatios &r = data.ratios;
  if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw ConfigError("data.ratios must be non-negative and sum to 1");
  }
}

RunConfig RunConfigFromJson(const json &j, const fs::path &base_dir) {
  Reader r(j, "config");
  RunConfig c;
  ReadModelKeys(r, c.model);
  if (const json *t = r.Child("train")) c.train = TrainConfigFromJson(*t);
  if (const json *d = r.Child("data")) {
    Reader dr(*d, "data");
    std::string manifest, split;
    dr.Get("manifest", manifest);
    dr.Get("split", split);
    std::vector<double> ratios;
    dr.Get("ratios", ratios);
    if (!ratios.empty()) {
      if (ratios.size() != 3) throw ConfigError("data.ratios must be [train, val, test]");
      c.data.ratios = {ratios[0], ratios[1], ratios[2]};
    }
    dr.Finish();
    c.data.manifest = Resolve(base_dir, manifest);
    c.data.split = Resolve(base_dir, split);
  }
  if (const json *m = r.Child("metrics")) {
    Reader mr(*m, "metrics");
    std::string smoothing = BleuSmoothingName(c.bleu_smoothing);
    mr.Get("bleu_smoothing", smoothing);
    c.bleu_smoothing = ParseBleuSmoothing(smoothing);
    mr.Finish();
  }
  std::string out;
  r.Get("out", out);
  if (!out.empty()) c.out = Resolve(base_dir, out);
  r.Get("repeats", c.repeats);
  r.Finish();
  // The run seed, when present, seeds both initialization and batch order.
  if (j.contains("seed")) c.SetSeed(c.model.seed);
  return c;
}

RunConfig LoadRunConfig(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return RunConfigFromJson(j, path.parent_path());
}

}  // namespace memex
