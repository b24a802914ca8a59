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

#include "memex/corpus.h"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "memex/errors.h"
#include "memex/random.h"

namespace memex {
namespace {

using nlohmann::json;

struct ManifestRecord {
  int line = 0;
  MemeSample sample;
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
};

std::string Where(int line, const std::string &id) {
  std::string s = "manifest line " + std::to_string(line);
  if (!id.empty()) s += " (record '" + id + "')";
  return s;
}

ManifestRecord ParseRecord(const std::string &text, int line, const std::filesystem::path &base) {
  ManifestRecord rec;
  rec.line = line;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw DataError(Where(line, "") + ": malformed record: " + e.what());
  }
  MemeSample &s = rec.sample;
  try {
    s.id = j.at("id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto &v : j.at("rationale")) {
      const int label = v.get<int>();
      if (label != 0 && label != 1) {
        throw DataError(Where(line, s.id) + ": rationale label " + std::to_string(label) +
                        " is not 0 or 1");
      }
      s.rationale.push_back(std::uint8_t(label));
    }
    s.bully_label = j.at("bully_label").get<int>();
    rec.image_path = j.at("image_path").get<std::string>();
    rec.mask_path = j.at("mask_path").get<std::string>();
  } catch (const json::exception &e) {
    throw DataError(Where(line, s.id) + ": malformed record: " + e.what());
  }
  if (s.id.empty()) throw DataError(Where(line, "") + ": empty id");
  if (s.bully_label != 0 && s.bully_label != 1) {
    throw DataError(Where(line, s.id) + ": bully_label must be 0 or 1");
  }
  if (s.rationale.size() != s.tokens.size()) {
    throw DataError(Where(line, s.id) + ": rationale/token length mismatch (" +
                    std::to_string(s.tokens.size()) + " tokens, " +
                    std::to_string(s.rationale.size()) + " labels)");
  }
  if (rec.image_path.is_relative()) rec.image_path = base / rec.image_path;
  if (rec.mask_path.is_relative()) rec.mask_path = base / rec.mask_path;
  return rec;
}

}  // namespace

std::vector<std::string> SplitWhitespace(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string JoinTokens(const std::vector<std::string> &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string NormalizeWhitespace(const std::string &text) { return JoinTokens(SplitWhitespace(text)); }

void ValidateSample(const MemeSample &s) {
  const std::string who = "sample '" + s.id + "'";
  if (s.rationale.size() != s.tokens.size()) {
    throw DataError(who + ": rationale/token length mismatch");
  }
  for (auto r : s.rationale) {
    if (r > 1) throw DataError(who + ": rationale label is not binary");
  }
  if (JoinTokens(s.tokens) != NormalizeWhitespace(s.text)) {
    throw DataError(who + ": tokens do not reconstruct the text");
  }
  if (s.image.width() < 1 || s.image.height() < 1) throw DataError(who + ": empty image");
  if (s.mask.width() != s.image.width() || s.mask.height() != s.image.height()) {
    throw DataError(who + ": mask is " + std::to_string(s.mask.width()) + "x" +
                    std::to_string(s.mask.height()) + " but image is " +
                    std::to_string(s.image.width()) + "x" + std::to_string(s.image.height()));
  }
  for (auto v : s.mask.data()) {
    if (v > 1) throw DataError(who + ": mask is not binary");
  }
}

std::vector<MemeSample> LoadManifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const auto base = path.parent_path();

  std::vector<ManifestRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (NormalizeWhitespace(line).empty()) continue;
    records.push_back(ParseRecord(line, lineno, base));
    if (!seen.insert(records.back().sample.id).second) {
      throw DataError(Where(lineno, records.back().sample.id) + ": duplicate id");
    }
  }

  // Decoding fans out over records; the first failure in file order wins.
  std::vector<std::optional<std::string>> errors(records.size());
  const int n = int(records.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    ManifestRecord &rec = records[i];
    try {
      rec.sample.image = ReadImagePng(rec.image_path);
      rec.sample.mask = ReadMaskPng(rec.mask_path);
      ValidateSample(rec.sample);
    } catch (const std::exception &e) {
      errors[i] = Where(rec.line, rec.sample.id) + ": " + e.what();
    }
  }
  for (const auto &e : errors) {
    if (e) throw DataError(*e);
  }

  std::vector<MemeSample> out;
  out.reserve(records.size());
  for (auto &rec : records) out.push_back(std::move(rec.sample));
  return out;
}

void WriteManifest(const std::filesystem::path &path, const std::vector<MemeSample> &samples) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::filesystem::create_directories(base / "images");
  std::filesystem::create_directories(base / "masks");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto &s : samples) {
    ValidateSample(s);
    const std::string image_rel = "images/" + s.id + ".png";
    const std::string mask_rel = "masks/" + s.id + ".png";
    WriteImagePng(base / image_rel, s.image);
    WriteMaskPng(base / mask_rel, s.mask);
    json j;
    j["id"] = s.id;
    j["image_path"] = image_rel;
    j["text"] = s.text;
    j["tokens"] = s.tokens;
    std::vector<int> labels(s.rationale.begin(), s.rationale.end());
    j["rationale"] = labels;
    j["mask_path"] = mask_rel;
    j["bully_label"] = s.bully_label;
    out << j.dump() << '\n';
  }
}

DatasetSplit SplitDataset(const std::vector<MemeSample> &samples, SplitRatios ratios,
                          std::uint64_t seed) {
  if (samples.empty()) throw DataError("cannot split an empty dataset");
  if (samples.size() < 3) throw DataError("splitting needs at least 3 samples");
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto &s : samples) ids.push_back(s.id);
  Rng rng(seed);
  rng.Shuffle(ids);

  const double n = double(ids.size());
  const auto n_val = std::size_t(std::llround(n * ratios.val));
  const auto n_test = std::size_t(std::llround(n * ratios.test));
  if (n_val + n_test > ids.size()) throw ConfigError("split ratios leave no room for train");
  const std::size_t n_train = ids.size() - n_val - n_test;

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + std::ptrdiff_t(n_train));
  split.val.assign(ids.begin() + std::ptrdiff_t(n_train),
                   ids.begin() + std::ptrdiff_t(n_train + n_val));
  split.test.assign(ids.begin() + std::ptrdiff_t(n_train + n_val), ids.end());
  return split;
}

void WriteSplit(const std::filesystem::path &path, const DatasetSplit &split) {
  json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split file " + path.string());
  out << j.dump(2) << '\n';
}

DatasetSplit ReadSplit(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file " + path.string());
  try {
    json j = json::parse(in);
    DatasetSplit split;
    split.seed = j.at("seed").get<std::uint64_t>();
    split.train = j.at("train").get<std::vector<std::string>>();
    split.val = j.at("val").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const json::exception &e) {
    throw DataError("malformed split file " + path.string() + ": " + e.what());
  }
}

std::vector<MemeSample> SelectSamples(const std::vector<MemeSample> &samples,
                                      const std::vector<std::string> &ids) {
  std::unordered_map<std::string, const MemeSample *> by_id;
  for (const auto &s : samples) by_id[s.id] = &s;
  std::vector<MemeSample> out;
  out.reserve(ids.size());
  for (const auto &id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("split references unknown id '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

std::string RationaleTarget(const MemeSample &sample) {
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < sample.tokens.size(); ++i) {
    if (sample.rationale[i] == 1) picked.push_back(sample.tokens[i]);
  }
  return JoinTokens(picked);
}

}  // namespace memex
