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

#ifndef MEMEX_TESTS_SUPPORT_ORACLES_H_
#define MEMEX_TESTS_SUPPORT_ORACLES_H_

// Deliberately naive reference implementations. They share no code with the
// library: n-grams are counted by linear search, LCS by subset enumeration,
// mask overlaps by coordinate sets, attention by explicit loops.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "memex/image.h"
#include "memex/matrix.h"

namespace memex::oracle {

using Tokens = std::vector<std::string>;
using Grams = std::vector<Tokens>;

inline Grams AllGrams(const Tokens &t, int n) {
  Grams g;
  for (int i = 0; i + n <= int(t.size()); ++i) g.push_back(Tokens(t.begin() + i, t.begin() + i + n));
  return g;
}

inline int CountOf(const Grams &gs, const Tokens &g) { return int(std::count(gs.begin(), gs.end(), g)); }

// Sum over distinct hypothesis n-grams of min(count in hyp, count in ref).
inline int ClippedMatches(const Grams &hyp, const Grams &ref) {
  int matches = 0;
  Grams seen;
  for (const auto &g : hyp) {
    if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
    seen.push_back(g);
    matches += std::min(CountOf(hyp, g), CountOf(ref, g));
  }
  return matches;
}

inline double HarmonicF1(double m, double hyp_total, double ref_total) {
  if (m == 0) return 0.0;
  const double p = m / hyp_total, r = m / ref_total;
  return 2 * p * r / (p + r);
}

inline double RougeN(const Tokens &hyp, const Tokens &ref, int n) {
  const Grams h = AllGrams(hyp, n), r = AllGrams(ref, n);
  if (h.empty() && r.empty() && !hyp.empty() && !ref.empty()) return hyp == ref ? 1.0 : 0.0;
  if (h.empty() || r.empty()) return 0.0;
  return HarmonicF1(ClippedMatches(h, r), double(h.size()), double(r.size()));
}

inline bool IsSubsequence(const Tokens &sub, const Tokens &seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i) {
    if (seq[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

// Longest common subsequence by enumerating every subsequence of `a`
// (|a| stays small in the property tests).
inline int BruteLcs(const Tokens &a, const Tokens &b) {
  int best = 0;
  const unsigned limit = 1u << a.size();
  for (unsigned bits = 0; bits < limit; ++bits) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (bits & (1u << i)) sub.push_back(a[i]);
    }
    if (int(sub.size()) > best && IsSubsequence(sub, b)) best = int(sub.size());
  }
  return best;
}

inline double RougeL(const Tokens &hyp, const Tokens &ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  return HarmonicF1(BruteLcs(hyp, ref), double(hyp.size()), double(ref.size()));
}

// Add-one smoothing on orders >= 2, uniform geometric mean, brevity penalty.
inline double Bleu(const Tokens &hyp, const Tokens &ref, int max_n) {
  if (hyp.empty()) return 0.0;
  double product = 1.0;
  for (int n = 1; n <= max_n; ++n) {
    const Grams h = AllGrams(hyp, n), r = AllGrams(ref, n);
    double num = ClippedMatches(h, r), den = double(h.size());
    if (n >= 2) num += 1, den += 1;
    if (num == 0) return 0.0;
    product *= num / den;
  }
  const double bp = hyp.size() < ref.size() ? std::exp(1.0 - double(ref.size()) / double(hyp.size())) : 1.0;
  return bp * std::pow(product, 1.0 / max_n);
}

using PixelSet = std::set<std::pair<int, int>>;

inline PixelSet Foreground(const BinaryMask &m, bool value = true) {
  PixelSet s;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if ((m.at(y, x) != 0) == value) s.insert({y, x});
    }
  }
  return s;
}

inline std::size_t IntersectionSize(const PixelSet &a, const PixelSet &b) {
  std::size_t n = 0;
  for (const auto &p : a) n += b.count(p);
  return n;
}

inline std::size_t UnionSize(const PixelSet &a, const PixelSet &b) {
  PixelSet u = a;
  u.insert(b.begin(), b.end());
  return u.size();
}

inline double Dice(const BinaryMask &a, const BinaryMask &b) {
  const PixelSet A = Foreground(a), B = Foreground(b);
  if (A.empty() && B.empty()) return 1.0;
  return 2.0 * double(IntersectionSize(A, B)) / double(A.size() + B.size());
}

inline double Jaccard(const BinaryMask &a, const BinaryMask &b) {
  const PixelSet A = Foreground(a), B = Foreground(b);
  if (A.empty() && B.empty()) return 1.0;
  return double(IntersectionSize(A, B)) / double(UnionSize(A, B));
}

inline double ClassIou(const PixelSet &a, const PixelSet &b) {
  const std::size_t u = UnionSize(a, b);
  return u == 0 ? 1.0 : double(IntersectionSize(a, b)) / double(u);
}

inline double MeanIou(const BinaryMask &pred, const BinaryMask &gt) {
  return 0.5 * (ClassIou(Foreground(pred, true), Foreground(gt, true)) +
                ClassIou(Foreground(pred, false), Foreground(gt, false)));
}

// softmax(q·kᵀ / sqrt(d)) · v, single head, explicit loops.
inline Matrix SingleHeadAttention(const Matrix &q, const Matrix &k, const Matrix &v, Matrix *weights = nullptr) {
  const int n = q.rows(), m = k.rows(), d = q.cols();
  Matrix w(n, m), out(n, v.cols());
  for (int i = 0; i < n; ++i) {
    double mx = -INFINITY;
    for (int j = 0; j < m; ++j) {
      double s = 0;
      for (int c = 0; c < d; ++c) s += q(i, c) * k(j, c);
      w(i, j) = s / std::sqrt(double(d));
      mx = std::max(mx, w(i, j));
    }
    double z = 0;
    for (int j = 0; j < m; ++j) z += (w(i, j) = std::exp(w(i, j) - mx));
    for (int j = 0; j < m; ++j) w(i, j) /= z;
    for (int c = 0; c < v.cols(); ++c) {
      double s = 0;
      for (int j = 0; j < m; ++j) s += w(i, j) * v(j, c);
      out(i, c) = s;
    }
  }
  if (weights) *weights = w;
  return out;
}

inline Matrix Product(const Matrix &a, const Matrix &b) {
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

// Mean negative log-likelihood of targets under row softmax.
inline double CrossEntropy(const Matrix &logits, const std::vector<int> &targets) {
  double total = 0;
  for (int i = 0; i < logits.rows(); ++i) {
    double z = 0;
    for (int j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j));
    total += -std::log(std::exp(logits(i, targets[i])) / z);
  }
  return total / logits.rows();
}

inline double BinaryCrossEntropy(const Matrix &logits, const Matrix &targets) {
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-logits[i]));
    total += -(targets[i] * std::log(p) + (1 - targets[i]) * std::log(1 - p));
  }
  return total / double(logits.size());
}

// Fleiss' kappa from the textbook definition.
inline double FleissKappa(const std::vector<std::vector<int>> &m) {
  const double items = double(m.size());
  double raters = 0;
  for (int c : m[0]) raters += c;
  double p_bar = 0;
  std::vector<double> totals(m[0].size(), 0.0);
  for (const auto &row : m) {
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      s += double(row[j]) * row[j];
      totals[j] += row[j];
    }
    p_bar += (s - raters) / (raters * (raters - 1));
  }
  p_bar /= items;
  double p_e = 0;
  for (double t : totals) p_e += (t / (items * raters)) * (t / (items * raters));
  return (p_bar - p_e) / (1 - p_e);
}

}  // namespace memex::oracle

#endif  // MEMEX_TESTS_SUPPORT_ORACLES_H_
