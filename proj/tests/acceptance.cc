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

// Acceptance runner: one PASS/FAIL/SKIP line per criterion. Every check is
// made against an independent oracle from tests/support or computed inline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memex/agreement.h"
#include "memex/metrics.h"
#include "memex/model.h"
#include "memex/neck.h"
#include "memex/segmenter.h"
#include "memex/textgen.h"
#include "memex/trainer.h"
#include "support/grad_check.h"
#include "support/oracles.h"
#include "support/toy.h"

namespace memex {
namespace {

namespace fs = std::filesystem;
using testing::CheckGradients;

// Collects failures for one criterion.
class Check {
 public:
  void operator()(bool ok, const std::string &what) {
    ++count_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  bool ok() const { return failed_ == 0; }
  std::string Summary() const {
    std::ostringstream s;
    s << count_ - failed_ << "/" << count_ << " checks";
    for (const auto &f : failures_) s << "; " << f;
    return s.str();
  }

 private:
  int count_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

std::string Num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

ag::Var Probe(const ag::Var &x, const Matrix &w) { return ag::Sum(ag::Mul(x, ag::Constant(w))); }

std::vector<SampleFeatures> Features(const MemexModel &m, const std::vector<MemeSample> &corpus) {
  std::vector<SampleFeatures> f;
  for (const auto &s : corpus) f.push_back(m.Prepare(s));
  return f;
}

// ---------------------------------------------------------------------------
// 1. Metric oracles.

BinaryMask RandomMask(Rng &rng) {
  BinaryMask m(8, 8);
  const double density = rng.Uniform();
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, rng.Uniform() < density);
  return m;
}

TokenList RandomTokens(Rng &rng) {
  static const char *kWords[] = {"a", "b", "c", "d", "e", "f"};
  TokenList t(rng.Below(9));
  for (auto &w : t) w = kWords[rng.Below(6)];
  return t;
}

void MetricOracles(Check &check) {
  Rng rng(101);
  double worst_relation = 0;
  for (int i = 0; i < 1000; ++i) {
    const BinaryMask a = RandomMask(rng), b = RandomMask(rng);
    check(Dice(a, b) == oracle::Dice(a, b), "dice pair " + std::to_string(i));
    check(Jaccard(a, b) == oracle::Jaccard(a, b), "jaccard pair " + std::to_string(i));
    check(MeanIou(a, b) == oracle::MeanIou(a, b), "miou pair " + std::to_string(i));
    const double j = Jaccard(a, b);
    worst_relation = std::max(worst_relation, std::fabs(Dice(a, b) - 2 * j / (1 + j)));
  }
  check(worst_relation < 1e-12, "D = 2J/(1+J) off by " + Num(worst_relation));
  for (int i = 0; i < 1000; ++i) {
    const TokenList h = RandomTokens(rng), r = RandomTokens(rng);
    for (int n = 1; n <= 2; ++n) {
      check(std::fabs(RougeN(h, r, n) - oracle::RougeN(h, r, n)) < 1e-9, "rouge-" + std::to_string(n));
    }
    check(std::fabs(RougeL(h, r) - oracle::RougeL(h, r)) < 1e-9, "rouge-l");
    for (int n = 1; n <= 4; ++n) {
      check(std::fabs(Bleu(h, r, n) - oracle::Bleu(h, r, n)) < 1e-9, "bleu-" + std::to_string(n));
    }
  }
}

// ---------------------------------------------------------------------------
// 2. Fusion contract.

void FusionContract(Check &check) {
  Rng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(rng.Below(12)), m = 1 + int(rng.Below(12));
    const int heads = 1 + int(rng.Below(4));
    const int d_t = heads * (1 + int(rng.Below(6))), d_v = 1 + int(rng.Below(16));
    const std::string tag = "N=" + std::to_string(n) + " M=" + std::to_string(m) + " d_t=" + std::to_string(d_t) +
                            " d_v=" + std::to_string(d_v);
    const ag::Var zt = ag::Constant(rng.NormalMatrix(n, d_t, 1)), zv = ag::Constant(rng.NormalMatrix(m, d_v, 1));

    ParameterSet ps;
    FusionLayerParams dot(ps, "dot", FusionVariant::kDotProduct, d_t, d_v, 1, rng);
    FusionLayerParams multi(ps, "mh", FusionVariant::kMultiHead, d_t, d_v, heads, rng);
    const auto a = TvfDot(zt, zv, dot), b = TvfMultiHead(zt, zv, multi);
    check(a.output.rows() == n && a.output.cols() == d_t, "A1 shape " + tag);
    check(b.output.rows() == n && b.output.cols() == d_t, "A2 shape " + tag);
    double worst = 0;
    for (const auto *r : {&a, &b}) {
      for (const Matrix &w : r->attention) {
        for (int i = 0; i < w.rows(); ++i) {
          double s = 0;
          for (int j = 0; j < w.cols(); ++j) s += w(i, j);
          worst = std::max(worst, std::fabs(s - 1));
        }
      }
    }
    check(worst < 1e-9, "attention row sum off by " + Num(worst) + " " + tag);

    FusionLayerParams single(ps, "one", FusionVariant::kMultiHead, d_t, d_v, 1, rng);
    const auto s = TvfMultiHead(zt, zv, single);
    const Matrix o = oracle::SingleHeadAttention(oracle::Product(zt.value(), single.wq.value()),
                                                 oracle::Product(zv.value(), single.wk.value()),
                                                 oracle::Product(zv.value(), single.wv.value()));
    Matrix cat(n, 2 * d_t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d_t; ++j) cat(i, j) = zt.value()(i, j), cat(i, d_t + j) = o(i, j);
    }
    const double diff = MaxAbsDiff(s.output.value(), oracle::Product(cat, single.w3.value()));
    check(diff < 1e-9, "single-head oracle off by " + Num(diff) + " " + tag);
  }
}

// ---------------------------------------------------------------------------
// 3. Gradients.

void GradientSuite(Check &check) {
  Rng rng(303);
  auto expect = [&](const testing::GradCheckResult &r, double tol, const std::string &what) {
    check(r.rel_error < tol && r.analytic_norm > 0, what + " rel err " + Num(r.rel_error) + " at " + r.worst);
  };
  const Matrix joint = rng.NormalMatrix(1, kJointDim, 0.1);
  {
    ParameterSet ps;
    GateParams g(ps, "g", rng);
    expect(CheckGradients([&] { return ag::Mean(ApplyGate(ag::Constant(joint), g)); }, ps.items()), 1e-4, "gate");
  }
  for (int d : {8, 16}) {
    ParameterSet ps;
    NeckConfig c;
    c.projected_length = 3;
    c.heads = 2;
    GvpParams gvp(ps, "gvp", c, d, rng);
    GateParams gate(ps, "gate", rng);
    const Matrix w = rng.NormalMatrix(3, d, 1);
    auto loss = [&] { return Probe(GatedVisualProjection(ag::Constant(joint), gvp, &gate), w); };
    expect(CheckGradients(loss, ps.items(), 16), 1e-4, "gvp d=" + std::to_string(d));
    expect(CheckGradients(loss, {{"gvp.rw", gvp.rw}}, 24), 1e-4, "gvp rw d=" + std::to_string(d));
  }
  {
    ParameterSet ps;
    GtpParams gtp(ps, "gtp", 8, rng);
    GateParams gv(ps, "gv", rng), gt(ps, "gt", rng);
    const Matrix w = rng.NormalMatrix(1, 8, 1);
    expect(CheckGradients([&] { return Probe(GatedTextualProjection(ag::Constant(joint), gtp, &gv, &gt), w); },
                          ps.items(), 24),
           1e-4, "gtp");
  }
  for (FusionVariant v : {FusionVariant::kDotProduct, FusionVariant::kMultiHead}) {
    ParameterSet ps;
    FusionLayerParams p(ps, "f", v, 8, 6, 2, rng);
    ag::Var zt = ps.Add("zt", rng.NormalMatrix(4, 8, 1)), zv = ps.Add("zv", rng.NormalMatrix(3, 6, 1));
    auto loss = [&] { return ag::Sum((v == FusionVariant::kDotProduct ? TvfDot(zt, zv, p) : TvfMultiHead(zt, zv, p)).output); };
    expect(CheckGradients(loss, ps.items(), 64), 1e-4, std::string("tvf ") + FusionVariantName(v));
  }
  for (FusionVariant v : {FusionVariant::kDotProduct, FusionVariant::kMultiHead}) {
    ParameterSet ps;
    EncoderLayerParams a(ps, "a", v, 8, 2, rng), b(ps, "b", v, 8, 2, rng);
    const ag::Var z0 = ag::Constant(rng.NormalMatrix(5, 8, 1)), pv = ag::Constant(rng.NormalMatrix(3, 8, 1));
    const Matrix w = rng.NormalMatrix(5, 8, 1);
    expect(CheckGradients([&] { return Probe(EncoderLayer(EncoderLayer(z0, pv, a), pv, b), w); }, ps.items(), 12),
           1e-3, std::string("2-layer encoder ") + FusionVariantName(v));
  }
  {
    BackboneConfig bb;
    bb.d_t = 8;
    bb.patch_rows = bb.patch_cols = 2;
    bb.layer_count = 2;
    ParameterSet ps;
    SegConfig sc;
    sc.heads = 2;
    Segmenter seg(ps, sc, bb, rng);
    ag::Var pt = ps.Add("pt", rng.NormalMatrix(1, 8, 1));
    LayerStack stack;
    for (int l = 0; l < 2; ++l) stack.layers.push_back(rng.NormalMatrix(4, 8, 1));
    const Matrix w = rng.NormalMatrix(6, 6, 1);
    auto loss = [&] { return Probe(seg.Logits(stack, pt, 6, 6), w); };
    expect(CheckGradients(loss, ps.items(), 16), 1e-3, "cp-unet");
    expect(CheckGradients(loss, ps.WithPrefix("seg.skip."), 24), 1e-3, "cp-unet skips");
    expect(CheckGradients(loss, {{"pt", pt}}, 8), 1e-3, "cp-unet modulation input");
  }
}

// ---------------------------------------------------------------------------
// 4. Loss prioritization.

double MaxGrad(const ParameterSet &ps, const std::vector<std::string> &prefixes) {
  double g = 0;
  for (const auto &prefix : prefixes) {
    for (const auto &p : ps.WithPrefix(prefix)) {
      if (!p.var.grad().empty()) g = std::max(g, p.var.grad().MaxAbs());
    }
  }
  return g;
}

void LossPrioritization(Check &check) {
  for (int ep : {15, 20, 25}) {
    for (auto order : {std::array<LossKind, 2>{LossKind::kGeneration, LossKind::kSegmentation},
                       std::array<LossKind, 2>{LossKind::kSegmentation, LossKind::kGeneration}}) {
      const LossSchedule s{ep, order};
      for (int epoch = 0; epoch < 40; ++epoch) {
        const auto active = ActiveLosses(epoch, s);
        const bool ok = epoch < ep ? active == std::vector<LossKind>{order[0]} : active.size() == 2;
        check(ok, "ep=" + std::to_string(ep) + " epoch " + std::to_string(epoch));
      }
    }
  }
  // Toy multitask run with the default ep = 15.
  const auto corpus = testing::ToyCorpus(10);
  const ModelConfig c = testing::ToyModelConfig(Mode::kMultitask);
  MemexModel model(c, MakeBackbone(c.backbone), BuildVocab(corpus));
  TrainConfig t = testing::ToyTrainConfig(17);
  Trainer trainer(model, t);
  double worst_before = 0, least_after = 1e300;
  TrainHooks hooks;
  hooks.after_backward = [&](const StepInfo &info, const ParameterSet &ps) {
    const double g = MaxGrad(ps, MemexModel::SegmentationOnlyPrefixes());
    if (info.epoch < 15) {
      worst_before = std::max(worst_before, g);
    } else {
      least_after = std::min(least_after, g);
    }
  };
  trainer.Fit(Features(model, corpus), hooks);
  check(worst_before < 1e-12, "segmentation grad before ep " + Num(worst_before));
  check(least_after > 0, "segmentation grad after ep " + Num(least_after));
}

// ---------------------------------------------------------------------------
// 5. Learnability.

// Token-level rationale F1: generated words are aligned to the meme tokens in
// order; a word that cannot be aligned counts as a false positive.
struct Counts {
  int tp = 0, fp = 0, fn = 0;
};

void AddTokenCounts(const MemeSample &s, const std::string &generated, Counts &c) {
  std::istringstream in(generated);
  std::vector<bool> flagged(s.tokens.size(), false);
  std::size_t pos = 0;
  for (std::string w; in >> w;) {
    std::size_t k = pos;
    while (k < s.tokens.size() && s.tokens[k] != w) ++k;
    if (k == s.tokens.size()) {
      ++c.fp;
      continue;
    }
    flagged[k] = true;
    pos = k + 1;
  }
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (flagged[i] && s.rationale[i]) ++c.tp;
    if (flagged[i] && !s.rationale[i]) ++c.fp;
    if (!flagged[i] && s.rationale[i]) ++c.fn;
  }
}

void Learnability(Check &check) {
  const auto corpus = testing::ToyCorpus(10);
  for (Mode mode : {Mode::kMultitask, Mode::kSingleText, Mode::kSingleVision}) {
    const ModelConfig c = testing::ToyModelConfig(mode);
    MemexModel model(c, MakeBackbone(c.backbone), BuildVocab(corpus));
    Trainer trainer(model, testing::ToyTrainConfig(40));
    const auto features = Features(model, corpus);
    trainer.Fit(features);
    const std::string name = ModeName(mode);
    check(trainer.state().step <= 500, name + " used " + std::to_string(trainer.state().step) + " steps");
    if (c.has_text()) {
      Counts counts;
      for (std::size_t i = 0; i < corpus.size(); ++i) AddTokenCounts(corpus[i], model.Generate(features[i]).text, counts);
      const double f1 = 2.0 * counts.tp / std::max(1, 2 * counts.tp + counts.fp + counts.fn);
      check(f1 >= 0.9, name + " rationale F1 " + Num(f1));
    }
    if (c.has_seg()) {
      double dice = 0;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        dice += oracle::Dice(model.PredictMask(features[i]), corpus[i].mask) / double(corpus.size());
      }
      check(dice >= 0.95, name + " dice " + Num(dice));
    }
  }
}

// ---------------------------------------------------------------------------
// 6. Mode contract, read from the checkpoint bytes.

template <typename T>
T Take(std::istream &in) {
  T v{};
  in.read(reinterpret_cast<char *>(&v), sizeof(T));
  return v;
}

std::vector<std::string> CheckpointParamNames(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  Take<std::uint32_t>(in);  // blob version
  Take<std::uint64_t>(in);  // config hash
  const auto count = Take<std::uint32_t>(in);
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < count && in; ++i) {
    std::string name(Take<std::uint32_t>(in), '\0');
    in.read(name.data(), std::streamsize(name.size()));
    const auto rows = Take<std::uint32_t>(in), cols = Take<std::uint32_t>(in);
    in.seekg(std::streamoff(std::uint64_t(rows) * cols * sizeof(double)), std::ios::cur);
    names.push_back(name);
  }
  return names;
}

bool Starts(const std::string &s, const char *prefix) { return s.rfind(prefix, 0) == 0; }

void ModeContract(Check &check) {
  const auto dir = testing::ScratchDir("acceptance_modes");
  const auto corpus = testing::ToyCorpus(3);
  for (Mode mode : {Mode::kSingleText, Mode::kSingleVision, Mode::kMultitask}) {
    const ModelConfig c = testing::TinyModelConfig(mode);
    MemexModel model(c, MakeBackbone(c.backbone), BuildVocab(corpus));
    Trainer trainer(model, testing::ToyTrainConfig(1));
    trainer.Fit(Features(model, corpus));
    const fs::path ck = dir / ModeName(mode);
    SaveCheckpoint(ck, model, trainer);
    bool gate = false, text = false, seg = false, shared_neck = false;
    for (const auto &n : CheckpointParamNames(ck / "params.bin")) {
      gate |= Starts(n, "neck.gate");
      text |= Starts(n, "textgen.") || Starts(n, "neck.gvp.");
      seg |= Starts(n, "seg.") || Starts(n, "neck.gtp.");
      shared_neck |= Starts(n, "neck.gate_v.");
    }
    const std::string name = ModeName(mode);
    check(text == (mode != Mode::kSingleVision), name + " text head presence");
    check(seg == (mode != Mode::kSingleText), name + " segmentation head presence");
    check(gate == (mode == Mode::kMultitask), name + " gate presence");
    check(shared_neck == (mode == Mode::kMultitask), name + " shared neck presence");
  }
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 7. Agreement.

void Agreement(Check &check) {
  check(FleissKappa({{3, 0}, {0, 3}, {3, 0}}) == 1.0, "perfect 3 raters");
  check(FleissKappa({{0, 4, 0}, {4, 0, 0}, {0, 0, 4}, {0, 4, 0}}) == 1.0, "perfect 3 categories");
  check(FleissKappa({{5, 0}, {5, 0}}) == 1.0, "single category");
  // Hand values: P̄ = 1, P̄e = 0.5 and P̄ = 0, P̄e = 0.5.
  check(std::fabs(FleissKappa({{2, 0}, {0, 2}}) - 1.0) < 1e-9, "[[2,0],[0,2]]");
  check(std::fabs(FleissKappa({{1, 1}, {1, 1}}) + 1.0) < 1e-9, "[[1,1],[1,1]]");

  BinaryMask a(2, 2), b(2, 2);
  a.set(0, 0, true), a.set(0, 1, true);
  b.set(0, 1, true), b.set(1, 1, true);
  check(AdjudicateMasks(a, b).decision == Decision::kRouteToExpert, "dice exactly 0.5 routes to expert");
  Rng rng(707);
  int routed = 0, accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    const BinaryMask x = RandomMask(rng), y = RandomMask(rng);
    const bool accept = oracle::Dice(x, y) > 0.5;
    const Decision d = AdjudicateMasks(x, y).decision;
    check(d == (accept ? Decision::kAcceptFirst : Decision::kRouteToExpert), "random adjudication " + std::to_string(i));
    (accept ? accepted : routed)++;
  }
  check(routed > 0 && accepted > 0, "random pairs cover both decisions");
  // Exact boundary on larger masks: |A| = |B| = 8, overlap 4.
  BinaryMask c(4, 4), d(4, 4);
  for (int i = 0; i < 8; ++i) c.set(std::size_t(i), true), d.set(std::size_t(i + 4), true);
  check(oracle::Dice(c, d) == 0.5 && AdjudicateMasks(c, d).decision == Decision::kRouteToExpert, "8/8 overlap 4");
  d.set(3, true);
  check(AdjudicateMasks(c, d).decision == Decision::kAcceptFirst, "just above 0.5 accepts");
}

// ---------------------------------------------------------------------------
// 8. Determinism and round trips.

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Matrix ProbeLogits(const MemexModel &m, const SampleFeatures &f) {
  ag::NoGradGuard guard;
  const Matrix seg = m.SegmentationLogits(f).value(), gen = m.Generate(f).logits;
  Matrix both(1, int(seg.size() + gen.size()));
  std::size_t k = 0;
  for (double v : seg.values()) both[k++] = v;
  for (double v : gen.values()) both[k++] = v;
  return both;
}

void Determinism(Check &check) {
  const auto dir = testing::ScratchDir("acceptance_det");
  const auto corpus = testing::ToyCorpus(6);
  {
    const std::vector<MemeSample> &saved = corpus;
    WriteManifest(dir / "m" / "manifest.jsonl", saved);
    const auto reloaded = LoadManifest(dir / "m" / "manifest.jsonl");
    check(reloaded.size() == saved.size(), "manifest size");
    for (std::size_t i = 0; i < std::min(reloaded.size(), saved.size()); ++i) {
      check(reloaded[i] == saved[i], "manifest sample " + saved[i].id);
    }
    WriteManifest(dir / "again" / "manifest.jsonl", reloaded);
    check(Slurp(dir / "m" / "manifest.jsonl") == Slurp(dir / "again" / "manifest.jsonl"), "manifest rewrite bytes");
  }

  const ModelConfig c = testing::TinyModelConfig(Mode::kMultitask);
  TrainConfig t = testing::ToyTrainConfig(4);
  t.schedule = LossSchedule{2, {LossKind::kGeneration, LossKind::kSegmentation}};
  MemexModel straight(c, MakeBackbone(c.backbone), BuildVocab(corpus));
  Trainer a(straight, t);
  const auto features = Features(straight, corpus);
  a.Fit(features, 4);

  MemexModel first(c, MakeBackbone(c.backbone), BuildVocab(corpus));
  Trainer b(first, t);
  b.Fit(Features(first, corpus), 3);
  SaveCheckpoint(dir / "ck", first, b);
  const LoadedCheckpoint loaded = LoadCheckpoint(dir / "ck");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    check(ProbeLogits(*loaded.model, loaded.model->Prepare(corpus[i])) == ProbeLogits(first, first.Prepare(corpus[i])),
          "probe logits bitwise " + corpus[i].id);
  }
  auto resumed = loaded.MakeTrainer();
  resumed->Fit(Features(*loaded.model, corpus), 4);
  const double loss_diff =
      std::fabs(resumed->state().history.back().total_loss - a.state().history.back().total_loss);
  check(loss_diff < 1e-9, "resume loss diff " + Num(loss_diff));
  double worst = 0;
  for (std::size_t i = 0; i < straight.params().items().size(); ++i) {
    worst = std::max(worst, MaxAbsDiff(straight.params().items()[i].var.value(),
                                       loaded.model->params().items()[i].var.value()));
  }
  check(worst < 1e-9, "resume params diff " + Num(worst));

  const auto many = testing::ToyCorpus(30);
  check(SplitDataset(many, {}, 11) == SplitDataset(many, {}, 11), "same seed same split");
  check(SplitDataset(many, {}, 11).train != SplitDataset(many, {}, 12).train, "different seed different split");
  MemexModel again(c, MakeBackbone(c.backbone), BuildVocab(corpus));
  Trainer a2(again, t);
  a2.Fit(Features(again, corpus), 4);
  check(a2.state().history.back().total_loss == a.state().history.back().total_loss, "same seed same final loss");
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 9. Released corpus statistics (needs the data).

bool CorpusStatistics(Check &check) {
  const char *manifest = std::getenv("MEMEX_MULTIBULLY_MANIFEST");
  if (manifest == nullptr || !fs::exists(manifest)) return false;
  const CorpusStats s = ComputeCorpusStats(LoadManifest(manifest));
  check(std::fabs(s.mean_rationale_tokens - 6.79) <= 0.05, "mean rationale tokens " + Num(s.mean_rationale_tokens));
  check(std::fabs(s.mean_tokens - 14.12) <= 0.05, "mean tokens " + Num(s.mean_tokens));
  check(std::fabs(s.mean_area_percent - 35.18) <= 0.05, "mean mask area " + Num(s.mean_area_percent));
  std::ostringstream csv;
  WriteReportCsv(csv, {{"m", ScoreCorpus({"a"}, {"a"}, {BinaryMask(1, 1)}, {BinaryMask(1, 1)})}});
  check(csv.str().rfind("model,R1,R2,R-L,B1,B2,B3,B4,DC,JS,mIOU\n", 0) == 0, "report columns");
  return true;
}

struct Criterion {
  int id;
  const char *name;
  double limit_seconds;
  std::function<bool(Check &)> run;  // false: skipped
};

}  // namespace
}  // namespace memex

int main() {
  using namespace memex;
  auto always = [](void (*f)(Check &)) { return [f](Check &c) { f(c); return true; }; };
  const std::vector<Criterion> criteria = {
      {1, "metric oracles", 30, always(MetricOracles)},
      {2, "fusion contract", 60, always(FusionContract)},
      {3, "gradients", 300, always(GradientSuite)},
      {4, "loss prioritization", 600, always(LossPrioritization)},
      {5, "end-to-end learnability", 600, always(Learnability)},
      {6, "mode contract", 600, always(ModeContract)},
      {7, "agreement", 600, always(Agreement)},
      {8, "determinism and round trips", 600, always(Determinism)},
      {9, "released corpus statistics", 600, CorpusStatistics},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    bool ran = false;
    std::string error;
    try {
      ran = c.run(check);
    } catch (const std::exception &e) {
      ran = true;
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!ran) {
      std::printf("SKIP criterion %d: %s (set MEMEX_MULTIBULLY_MANIFEST to run)\n", c.id, c.name);
      continue;
    }
    check(error.empty(), "exception: " + error);
    check(secs < c.limit_seconds, "runtime over " + Num(c.limit_seconds) + " s");
    const bool ok = check.ok();
    failed += !ok;
    std::printf("%s criterion %d: %s (%s, %.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.name, check.Summary().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
