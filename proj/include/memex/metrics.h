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

#ifndef MEMEX_METRICS_H_
#define MEMEX_METRICS_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memex/image.h"

namespace memex {

using TokenList = std::vector<std::string>;

// F1 over clipped n-gram overlap; 0 when either side has no n-grams, except
// that two nonempty sequences both shorter than n score exact match (1 or 0).
double RougeN(const TokenList &hyp, const TokenList &ref, int n);
// F1 from the longest common subsequence.
double RougeL(const TokenList &hyp, const TokenList &ref);

enum class BleuSmoothing {
  kNone,    // plain modified precision; any zero precision gives 0
  kAddOne,  // (matches + 1) / (total + 1) for n >= 2
};

const char *BleuSmoothingName(BleuSmoothing s);
BleuSmoothing ParseBleuSmoothing(const std::string &name);

// Uniformly weighted geometric mean of n-gram precisions 1..max_n times the
// brevity penalty exp(1 - |ref|/|hyp|) for short hypotheses.
double Bleu(const TokenList &hyp, const TokenList &ref, int max_n,
            BleuSmoothing smoothing = BleuSmoothing::kAddOne);

// Set overlap measures over foreground pixels. Both-empty scores 1.
double Dice(const BinaryMask &a, const BinaryMask &b);
double Jaccard(const BinaryMask &a, const BinaryMask &b);
// Mean of foreground and background IoU; a class absent from both masks
// contributes 1.
double MeanIou(const BinaryMask &pred, const BinaryMask &gt);

struct TextScore {
  double r1 = 0, r2 = 0, rl = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0;
};

struct MaskScore {
  double dice = 0, jaccard = 0, miou = 0;
};

TextScore ScoreText(const std::string &hyp, const std::string &ref,
                    BleuSmoothing smoothing = BleuSmoothing::kAddOne);
MaskScore ScoreMask(const BinaryMask &pred, const BinaryMask &gt);

// Corpus scores are per-sample means. Either modality may be absent (empty
// lists); present lists must be aligned.
struct CorpusScore {
  std::optional<TextScore> text;
  std::optional<MaskScore> mask;
  std::size_t count = 0;
};

CorpusScore ScoreCorpus(const std::vector<std::string> &hyps, const std::vector<std::string> &refs,
                        const std::vector<BinaryMask> &pred_masks,
                        const std::vector<BinaryMask> &gold_masks,
                        BleuSmoothing smoothing = BleuSmoothing::kAddOne);

// Value ×100 rounded half away from zero to 2 decimals.
double ReportValue(double v);

struct ReportRow {
  std::string label;
  CorpusScore score;
};

// Columns R1 R2 R-L B1 B2 B3 B4 DC JS mIOU; a modality's columns appear only
// when some row carries it.
std::vector<std::string> ReportColumns(const std::vector<ReportRow> &rows);
void WriteReportCsv(std::ostream &out, const std::vector<ReportRow> &rows);
std::string FormatReportTable(const std::vector<ReportRow> &rows);

struct TTestResult {
  double t = 0;
  double df = 0;
  double p_value = 1;  // two-sided
  bool significant(double alpha = 0.05) const { return p_value < alpha; }
};

// Paired two-sided Student t-test on per-sample differences.
TTestResult PairedTTest(const std::vector<double> &a, const std::vector<double> &b);

}  // namespace memex

#endif  // MEMEX_METRICS_H_
