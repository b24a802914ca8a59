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

#ifndef MEMEX_AGREEMENT_H_
#define MEMEX_AGREEMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memex/corpus.h"
#include "memex/image.h"

namespace memex {

using LabelRow = std::vector<std::uint8_t>;

struct VoteResult {
  LabelRow labels;  // strict-majority label; 0 where tied
  LabelRow ties;    // 1 where no strict majority exists
  std::size_t tie_count() const;
};

// Per-token strict majority over annotators. Ties are flagged, never
// resolved. Throws DataError on fewer than two rows or unequal lengths.
VoteResult MajorityVote(const std::vector<LabelRow> &rows);

// counts[i][j] = raters assigning category j to item i.
using RatingMatrix = std::vector<std::vector<int>>;

// Binary labels (annotator × token) to a token × {0, 1} count matrix.
RatingMatrix RatingsFromLabels(const std::vector<LabelRow> &rows);

// Fleiss' kappa. When chance agreement is 1 the ratio is 0/0; the result is
// then 1 if observed agreement is perfect and 0 otherwise.
double FleissKappa(const RatingMatrix &m);

enum class Decision { kAcceptFirst, kRouteToExpert };
const char *DecisionName(Decision d);

struct AdjudicationResult {
  Decision decision = Decision::kRouteToExpert;
  double dice = 0.0;
};

// accept_first iff dice(a, b) > 0.5.
AdjudicationResult AdjudicateMasks(const BinaryMask &a, const BinaryMask &b);

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::size_t> counts;
};

// Fixed-width bins starting at lo; values past the last bin land in it.
Histogram MakeHistogram(const std::vector<double> &values, double lo, double width, int bins);

struct CorpusStats {
  std::size_t samples = 0;
  double mean_rationale_tokens = 0.0;
  double mean_tokens = 0.0;
  double mean_area_percent = 0.0;
  Histogram rationale_tokens;
  Histogram tokens;
  Histogram area_percent;
};

CorpusStats ComputeCorpusStats(const std::vector<MemeSample> &samples);

void WriteStatsCsv(const std::filesystem::path &path, const CorpusStats &stats);
void WriteHistogramCsv(const std::filesystem::path &path, const Histogram &h);

// Annotation bundle (JSON):
// {"samples": [{"id": "...", "tokens": [...],
//               "annotators": [{"rationale": [0,1,...], "mask_path": "..."}, ...]}]}
// Mask paths are relative to the bundle file.
struct AnnotatorRecord {
  LabelRow rationale;
  BinaryMask mask;
  bool has_mask = false;
};

struct BundleSample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<AnnotatorRecord> annotators;
};

std::vector<BundleSample> LoadBundle(const std::filesystem::path &path);

struct BundleAnalysis {
  double kappa = 0.0;
  std::vector<VoteResult> votes;  // per sample
  // Mask decision between the first two annotators, per sample with masks.
  std::vector<std::pair<std::string, AdjudicationResult>> adjudications;
  CorpusStats stats;  // over voted rationales and first-annotator masks
};

BundleAnalysis AnalyzeBundle(const std::vector<BundleSample> &bundle);

}  // namespace memex

#endif  // MEMEX_AGREEMENT_H_
