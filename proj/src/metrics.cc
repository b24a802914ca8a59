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

#include "memex/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "memex/corpus.h"
#include "memex/errors.h"

namespace memex {
namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts Ngrams(const TokenList &tokens, int n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[TokenList(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

// (clipped matches, hypothesis n-gram total, reference n-gram total)
struct Overlap {
  int matches = 0;
  int hyp_total = 0;
  int ref_total = 0;
};

Overlap CountOverlap(const TokenList &hyp, const TokenList &ref, int n) {
  Overlap o;
  const NgramCounts h = Ngrams(hyp, n);
  const NgramCounts r = Ngrams(ref, n);
  for (const auto &[gram, c] : h) {
    o.hyp_total += c;
    auto it = r.find(gram);
    if (it != r.end()) o.matches += std::min(c, it->second);
  }
  for (const auto &[gram, c] : r) o.ref_total += c;
  return o;
}

double F1(double matches, double hyp_total, double ref_total) {
  if (hyp_total == 0 || ref_total == 0 || matches == 0) return 0.0;
  const double p = matches / hyp_total;
  const double r = matches / ref_total;
  return 2 * p * r / (p + r);
}

void CheckShapes(const BinaryMask &a, const BinaryMask &b, const char *what) {
  if (!a.SameShape(b)) {
    throw ShapeError(std::string(what) + ": mask shapes differ (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
  }
}

struct PixelCounts {
  std::size_t a = 0, b = 0, both = 0;
};

PixelCounts Count(const BinaryMask &a, const BinaryMask &b) {
  PixelCounts c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.a += a[i];
    c.b += b[i];
    c.both += a[i] & b[i];
  }
  return c;
}

std::string Fixed2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::vector<double> RowValues(const CorpusScore &s, bool text, bool mask) {
  std::vector<double> v;
  if (text) {
    const TextScore t = s.text.value_or(TextScore{});
    v = {t.r1, t.r2, t.rl, t.b1, t.b2, t.b3, t.b4};
  }
  if (mask) {
    const MaskScore m = s.mask.value_or(MaskScore{});
    v.insert(v.end(), {m.dice, m.jaccard, m.miou});
  }
  return v;
}

void Presence(const std::vector<ReportRow> &rows, bool &text, bool &mask) {
  text = mask = false;
  for (const auto &r : rows) {
    text |= r.score.text.has_value();
    mask |= r.score.mask.has_value();
  }
}

}  // namespace

double RougeN(const TokenList &hyp, const TokenList &ref, int n) {
  if (n < 1) throw std::invalid_argument("RougeN: n must be >= 1");
  const Overlap o = CountOverlap(hyp, ref, n);
  // Two nonempty sequences both shorter than n have nothing to compare but
  // may still be identical.
  if (o.hyp_total == 0 && o.ref_total == 0 && !hyp.empty() && !ref.empty()) return hyp == ref ? 1.0 : 0.0;
  return F1(o.matches, o.hyp_total, o.ref_total);
}

double RougeL(const TokenList &hyp, const TokenList &ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  std::vector<int> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = hyp[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return F1(prev[ref.size()], double(hyp.size()), double(ref.size()));
}

const char *BleuSmoothingName(BleuSmoothing s) { return s == BleuSmoothing::kNone ? "none" : "add_one"; }

BleuSmoothing ParseBleuSmoothing(const std::string &name) {
  if (name == "none") return BleuSmoothing::kNone;
  if (name == "add_one") return BleuSmoothing::kAddOne;
  throw ConfigError("unknown BLEU smoothing '" + name + "' (expected none or add_one)");
}

double Bleu(const TokenList &hyp, const TokenList &ref, int max_n, BleuSmoothing smoothing) {
  if (max_n < 1) throw std::invalid_argument("Bleu: max_n must be >= 1");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const Overlap o = CountOverlap(hyp, ref, n);
    double num = o.matches, den = o.hyp_total;
    if (smoothing == BleuSmoothing::kAddOne && n >= 2) {
      num += 1;
      den += 1;
    }
    if (num == 0 || den == 0) return 0.0;
    log_sum += std::log(num / den);
  }
  const double h = double(hyp.size()), r = double(ref.size());
  const double bp = h < r ? std::exp(1.0 - r / h) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

double Dice(const BinaryMask &a, const BinaryMask &b) {
  CheckShapes(a, b, "dice");
  const PixelCounts c = Count(a, b);
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * double(c.both) / double(c.a + c.b);
}

double Jaccard(const BinaryMask &a, const BinaryMask &b) {
  CheckShapes(a, b, "jaccard");
  const PixelCounts c = Count(a, b);
  const std::size_t uni = c.a + c.b - c.both;
  if (uni == 0) return 1.0;
  return double(c.both) / double(uni);
}

double MeanIou(const BinaryMask &pred, const BinaryMask &gt) {
  CheckShapes(pred, gt, "miou");
  const PixelCounts c = Count(pred, gt);
  const std::size_t n = pred.size();
  const std::size_t fg_union = c.a + c.b - c.both;
  // Background: pixels off in both, over pixels off in either.
  const std::size_t bg_inter = n - fg_union;
  const std::size_t bg_union = n - c.both;
  const double fg = fg_union == 0 ? 1.0 : double(c.both) / double(fg_union);
  const double bg = bg_union == 0 ? 1.0 : double(bg_inter) / double(bg_union);
  return 0.5 * (fg + bg);
}

TextScore ScoreText(const std::string &hyp, const std::string &ref, BleuSmoothing smoothing) {
  const TokenList h = SplitWhitespace(hyp), r = SplitWhitespace(ref);
  TextScore s;
  s.r1 = RougeN(h, r, 1);
  s.r2 = RougeN(h, r, 2);
  s.rl = RougeL(h, r);
  s.b1 = Bleu(h, r, 1, smoothing);
  s.b2 = Bleu(h, r, 2, smoothing);
  s.b3 = Bleu(h, r, 3, smoothing);
  s.b4 = Bleu(h, r, 4, smoothing);
  return s;
}

MaskScore ScoreMask(const BinaryMask &pred, const BinaryMask &gt) {
  return {Dice(pred, gt), Jaccard(pred, gt), MeanIou(pred, gt)};
}

CorpusScore ScoreCorpus(const std::vector<std::string> &hyps, const std::vector<std::string> &refs,
                        const std::vector<BinaryMask> &pred_masks,
                        const std::vector<BinaryMask> &gold_masks, BleuSmoothing smoothing) {
  if (hyps.size() != refs.size()) throw ShapeError("ScoreCorpus: text list lengths differ");
  if (pred_masks.size() != gold_masks.size()) {
    throw ShapeError("ScoreCorpus: mask list lengths differ");
  }
  if (!hyps.empty() && !pred_masks.empty() && hyps.size() != pred_masks.size()) {
    throw std::invalid_argument("ScoreCorpus: text and mask lists cover different sample counts");
  }
  CorpusScore out;
  if (!hyps.empty()) {
    std::vector<TextScore> per(hyps.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(hyps.size()); ++i) {
      per[i] = ScoreText(hyps[i], refs[i], smoothing);
    }
    TextScore mean;
    for (const auto &s : per) {
      mean.r1 += s.r1, mean.r2 += s.r2, mean.rl += s.rl;
      mean.b1 += s.b1, mean.b2 += s.b2, mean.b3 += s.b3, mean.b4 += s.b4;
    }
    const double n = double(per.size());
    mean.r1 /= n, mean.r2 /= n, mean.rl /= n;
    mean.b1 /= n, mean.b2 /= n, mean.b3 /= n, mean.b4 /= n;
    out.text = mean;
    out.count = per.size();
  }
  if (!pred_masks.empty()) {
    MaskScore mean;
    for (std::size_t i = 0; i < pred_masks.size(); ++i) {
      const MaskScore s = ScoreMask(pred_masks[i], gold_masks[i]);
      mean.dice += s.dice, mean.jaccard += s.jaccard, mean.miou += s.miou;
    }
    const double n = double(pred_masks.size());
    mean.dice /= n, mean.jaccard /= n, mean.miou /= n;
    out.mask = mean;
    out.count = pred_masks.size();
  }
  return out;
}

double ReportValue(double v) { return std::round(v * 100.0 * 100.0) / 100.0; }

std::vector<std::string> ReportColumns(const std::vector<ReportRow> &rows) {
  bool text, mask;
  Presence(rows, text, mask);
  std::vector<std::string> cols;
  if (text) cols = {"R1", "R2", "R-L", "B1", "B2", "B3", "B4"};
  if (mask) cols.insert(cols.end(), {"DC", "JS", "mIOU"});
  return cols;
}

void WriteReportCsv(std::ostream &out, const std::vector<ReportRow> &rows) {
  bool text, mask;
  Presence(rows, text, mask);
  out << "model";
  for (const auto &c : ReportColumns(rows)) out << ',' << c;
  out << '\n';
  for (const auto &r : rows) {
    out << r.label;
    for (double v : RowValues(r.score, text, mask)) out << ',' << Fixed2(ReportValue(v));
    out << '\n';
  }
}

std::string FormatReportTable(const std::vector<ReportRow> &rows) {
  bool text, mask;
  Presence(rows, text, mask);
  const auto cols = ReportColumns(rows);
  std::size_t label_width = 5;
  for (const auto &r : rows) label_width = std::max(label_width, r.label.size());
  std::ostringstream s;
  s << std::left << std::setw(int(label_width)) << "Model";
  for (const auto &c : cols) s << "  " << std::right << std::setw(6) << c;
  s << '\n';
  for (const auto &r : rows) {
    s << std::left << std::setw(int(label_width)) << r.label;
    for (double v : RowValues(r.score, text, mask)) {
      s << "  " << std::right << std::setw(6) << Fixed2(ReportValue(v));
    }
    s << '\n';
  }
  return s.str();
}

TTestResult PairedTTest(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) throw std::invalid_argument("PairedTTest: sample sizes differ");
  if (a.size() < 2) throw std::invalid_argument("PairedTTest: need at least two pairs");
  const double n = double(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TTestResult r;
  r.df = n - 1;
  const double se = std::sqrt(ss / (n - 1) / n);
  if (se == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / se;
  boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

}  // namespace memex
