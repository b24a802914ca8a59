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

#include "memex/agreement.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "memex/errors.h"
#include "memex/metrics.h"

namespace memex {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double Mean(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

std::ofstream OpenCsv(const fs::path &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

}  // namespace

std::size_t VoteResult::tie_count() const { return std::size_t(std::count(ties.begin(), ties.end(), 1)); }

VoteResult MajorityVote(const std::vector<LabelRow> &rows) {
  if (rows.size() < 2) throw DataError("majority vote needs at least two annotators");
  const std::size_t n = rows.front().size();
  for (const auto &r : rows) {
    if (r.size() != n) throw DataError("majority vote: annotator rows have different lengths");
  }
  VoteResult out;
  out.labels.assign(n, 0);
  out.ties.assign(n, 0);
  const std::size_t raters = rows.size();
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t ones = 0;
    for (const auto &r : rows) ones += r[t] != 0;
    const std::size_t zeros = raters - ones;
    if (2 * ones > raters) {
      out.labels[t] = 1;
    } else if (2 * zeros <= raters) {
      out.ties[t] = 1;
    }
  }
  return out;
}

RatingMatrix RatingsFromLabels(const std::vector<LabelRow> &rows) {
  if (rows.empty()) return {};
  RatingMatrix m(rows.front().size(), std::vector<int>(2, 0));
  for (const auto &r : rows) {
    if (r.size() != m.size()) throw DataError("rating rows have different lengths");
    for (std::size_t t = 0; t < r.size(); ++t) ++m[t][r[t] ? 1 : 0];
  }
  return m;
}

double FleissKappa(const RatingMatrix &m) {
  if (m.empty()) throw DataError("fleiss kappa: no items");
  const std::size_t categories = m.front().size();
  long raters = -1;
  for (const auto &row : m) {
    if (row.size() != categories) throw DataError("fleiss kappa: ragged category columns");
    long sum = 0;
    for (int c : row) {
      if (c < 0) throw DataError("fleiss kappa: negative count");
      sum += c;
    }
    if (raters < 0) raters = sum;
    if (sum != raters) throw DataError("fleiss kappa: items have different rater counts");
  }
  if (raters < 2) throw DataError("fleiss kappa: need at least two raters per item");
  const double n = double(raters), items = double(m.size());
  std::vector<double> p(categories, 0.0);
  double p_bar = 0.0;
  for (const auto &row : m) {
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      agree += double(row[j]) * (row[j] - 1);
      p[j] += row[j];
    }
    p_bar += agree / (n * (n - 1));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (double pj : p) {
    const double share = pj / (items * n);
    p_e += share * share;
  }
  if (p_e >= 1.0) return p_bar >= 1.0 ? 1.0 : 0.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

const char *DecisionName(Decision d) {
  return d == Decision::kAcceptFirst ? "accept_first" : "route_to_expert";
}

AdjudicationResult AdjudicateMasks(const BinaryMask &a, const BinaryMask &b) {
  AdjudicationResult r;
  r.dice = Dice(a, b);
  r.decision = r.dice > 0.5 ? Decision::kAcceptFirst : Decision::kRouteToExpert;
  return r;
}

Histogram MakeHistogram(const std::vector<double> &values, double lo, double width, int bins) {
  if (bins < 1 || !(width > 0)) throw std::invalid_argument("MakeHistogram: bad bin layout");
  Histogram h{lo, width, std::vector<std::size_t>(bins, 0)};
  for (double v : values) {
    const int b = std::clamp(int(std::floor((v - lo) / width)), 0, bins - 1);
    ++h.counts[b];
  }
  return h;
}

CorpusStats ComputeCorpusStats(const std::vector<MemeSample> &samples) {
  if (samples.empty()) throw DataError("corpus stats: no samples");
  std::vector<double> rationale, tokens, area;
  for (const auto &s : samples) {
    rationale.push_back(double(std::count(s.rationale.begin(), s.rationale.end(), 1)));
    tokens.push_back(double(s.tokens.size()));
    const double pixels = double(s.mask.size());
    area.push_back(pixels == 0 ? 0.0 : 100.0 * double(s.mask.Foreground()) / pixels);
  }
  CorpusStats st;
  st.samples = samples.size();
  st.mean_rationale_tokens = Mean(rationale);
  st.mean_tokens = Mean(tokens);
  st.mean_area_percent = Mean(area);
  const double max_tokens = *std::max_element(tokens.begin(), tokens.end());
  const int token_bins = std::max(1, int(max_tokens) + 1);
  st.rationale_tokens = MakeHistogram(rationale, 0.0, 1.0, token_bins);
  st.tokens = MakeHistogram(tokens, 0.0, 1.0, token_bins);
  st.area_percent = MakeHistogram(area, 0.0, 10.0, 10);
  return st;
}

void WriteStatsCsv(const fs::path &path, const CorpusStats &stats) {
  auto out = OpenCsv(path);
  out << "samples,mean_rationale_tokens,mean_tokens,mean_area_percent\n"
      << stats.samples << ',' << stats.mean_rationale_tokens << ',' << stats.mean_tokens << ','
      << stats.mean_area_percent << '\n';
}

void WriteHistogramCsv(const fs::path &path, const Histogram &h) {
  auto out = OpenCsv(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.lo + h.width * double(i) << ',' << h.lo + h.width * double(i + 1) << ',' << h.counts[i]
        << '\n';
  }
}

std::vector<BundleSample> LoadBundle(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read bundle " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  std::vector<BundleSample> out;
  try {
    for (const auto &s : j.at("samples")) {
      BundleSample b;
      b.id = s.at("id").get<std::string>();
      b.tokens = s.at("tokens").get<std::vector<std::string>>();
      const std::string where = path.string() + ": sample '" + b.id + "'";
      for (const auto &a : s.at("annotators")) {
        AnnotatorRecord r;
        for (int v : a.at("rationale").get<std::vector<int>>()) {
          if (v != 0 && v != 1) throw DataError(where + ": rationale labels must be 0 or 1");
          r.rationale.push_back(std::uint8_t(v));
        }
        if (r.rationale.size() != b.tokens.size()) {
          throw DataError(where + ": rationale/token length mismatch");
        }
        if (a.contains("mask_path") && !a["mask_path"].is_null()) {
          r.mask = ReadMaskPng(base / a["mask_path"].get<std::string>());
          r.has_mask = true;
        }
        b.annotators.push_back(std::move(r));
      }
      if (b.annotators.size() < 2) throw DataError(where + ": needs at least two annotators");
      out.push_back(std::move(b));
    }
  } catch (const json::exception &e) {
    throw DataError(path.string() + ": malformed bundle: " + e.what());
  }
  if (out.empty()) throw DataError(path.string() + ": bundle has no samples");
  return out;
}

BundleAnalysis AnalyzeBundle(const std::vector<BundleSample> &bundle) {
  BundleAnalysis a;
  RatingMatrix all;
  std::vector<MemeSample> aggregated;
  for (const auto &b : bundle) {
    std::vector<LabelRow> rows;
    for (const auto &r : b.annotators) rows.push_back(r.rationale);
    a.votes.push_back(MajorityVote(rows));
    const RatingMatrix m = RatingsFromLabels(rows);
    all.insert(all.end(), m.begin(), m.end());

    MemeSample s;
    s.id = b.id;
    s.tokens = b.tokens;
    s.rationale = a.votes.back().labels;
    if (b.annotators[0].has_mask) s.mask = b.annotators[0].mask;
    if (b.annotators[0].has_mask && b.annotators[1].has_mask) {
      a.adjudications.emplace_back(b.id, AdjudicateMasks(b.annotators[0].mask, b.annotators[1].mask));
    }
    aggregated.push_back(std::move(s));
  }
  if (!all.empty()) a.kappa = FleissKappa(all);
  a.stats = ComputeCorpusStats(aggregated);
  return a;
}

}  // namespace memex
