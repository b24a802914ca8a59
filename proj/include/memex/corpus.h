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

#ifndef MEMEX_CORPUS_H_
#define MEMEX_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memex/image.h"

namespace memex {

// One annotated meme. Rationale labels are per whitespace token.
struct MemeSample {
  std::string id;
  ImageTensor image;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> rationale;
  BinaryMask mask;
  int bully_label = 1;

  bool operator==(const MemeSample &) const = default;
};

// Throws DataError naming the sample id when an invariant does not hold.
void ValidateSample(const MemeSample &sample);

std::vector<std::string> SplitWhitespace(const std::string &text);
std::string NormalizeWhitespace(const std::string &text);
std::string JoinTokens(const std::vector<std::string> &tokens);

// Reads a JSON-lines manifest. Each record carries id, image_path, text,
// tokens, rationale, mask_path and bully_label; relative paths resolve against
// the manifest's directory. Order follows the file.
std::vector<MemeSample> LoadManifest(const std::filesystem::path &path);

// Writes images/<id>.png, masks/<id>.png and the manifest itself under the
// manifest's directory.
void WriteManifest(const std::filesystem::path &path, const std::vector<MemeSample> &samples);

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit &) const = default;
};

// Seeded shuffle, then val and test take round(n·ratio) ids each and train
// takes the remainder.
DatasetSplit SplitDataset(const std::vector<MemeSample> &samples, SplitRatios ratios,
                          std::uint64_t seed);

void WriteSplit(const std::filesystem::path &path, const DatasetSplit &split);
DatasetSplit ReadSplit(const std::filesystem::path &path);

// Selects `ids` from `samples` in id-list order.
std::vector<MemeSample> SelectSamples(const std::vector<MemeSample> &samples,
                                      const std::vector<std::string> &ids);

// Rationale tokens in original order, space-joined.
std::string RationaleTarget(const MemeSample &sample);

}  // namespace memex

#endif  // MEMEX_CORPUS_H_
