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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "memex/errors.h"
#include "memex/model.h"
#include "memex/textgen.h"
#include "memex/trainer.h"
#include "support/grad_check.h"
#include "support/oracles.h"
#include "support/toy.h"

namespace memex {
namespace {

using testing::CheckGradients;

ag::Var Probe(const ag::Var &x, const Matrix &w) { return ag::Sum(ag::Mul(x, ag::Constant(w))); }

TEST_SUITE("textgen") {
  TEST_CASE("dot-product fusion shape and uniform attention") {
    Rng rng(1);
    ParameterSet ps;
    FusionLayerParams p(ps, "f", FusionVariant::kDotProduct, 8, 8, 1, rng);
    const auto r = TvfDot(ag::Constant(rng.NormalMatrix(4, 8, 1)), ag::Constant(rng.NormalMatrix(2, 8, 1)), p);
    CHECK(r.output.rows() == 4);
    CHECK(r.output.cols() == 8);

    // Textual rows orthogonal to every projected visual row.
    p.w1.mutable_value() = Matrix(8, 8);
    for (int i = 0; i < 4; ++i) p.w1.mutable_value()(i, i) = 1.0;
    Matrix zt(4, 8), zv = rng.NormalMatrix(2, 8, 1);
    for (int i = 0; i < 4; ++i) zt(i, 4 + i) = 1.0 + i;
    const auto u = TvfDot(ag::Constant(zt), ag::Constant(zv), p);
    for (double a : u.attention[0].values()) CHECK(a == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("dot-product fusion is invariant to visual row order") {
    Rng rng(2);
    ParameterSet ps;
    FusionLayerParams p(ps, "f", FusionVariant::kDotProduct, 8, 6, 1, rng);
    const Matrix zt = rng.NormalMatrix(5, 8, 1), zv = rng.NormalMatrix(4, 6, 1);
    Matrix shuffled(4, 6);
    const int perm[] = {2, 0, 3, 1};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 6; ++j) shuffled(i, j) = zv(perm[i], j);
    }
    CHECK(MaxAbsDiff(TvfDot(ag::Constant(zt), ag::Constant(zv), p).output.value(),
                     TvfDot(ag::Constant(zt), ag::Constant(shuffled), p).output.value()) < 1e-12);
  }

  TEST_CASE("dot-product fusion gradient w.r.t. weights and both inputs") {
    Rng rng(3);
    ParameterSet ps;
    FusionLayerParams p(ps, "f", FusionVariant::kDotProduct, 8, 8, 1, rng);
    ag::Var zt = ps.Add("zt", rng.NormalMatrix(4, 8, 1));
    ag::Var zv = ps.Add("zv", rng.NormalMatrix(3, 8, 1));
    const auto r = CheckGradients([&] { return ag::Sum(TvfDot(zt, zv, p).output); }, ps.items(), 64);
    CHECK_MESSAGE(r.rel_error < 1e-4, r.worst, " ", r.rel_error);
  }

  TEST_CASE("multi-head fusion shape, singleton memory and head check") {
    Rng rng(4);
    ParameterSet ps;
    FusionLayerParams p(ps, "f", FusionVariant::kMultiHead, 8, 8, 2, rng);
    const Matrix zt = rng.NormalMatrix(4, 8, 1);
    CHECK(TvfMultiHead(ag::Constant(zt), ag::Constant(rng.NormalMatrix(3, 8, 1)), p).output.rows() == 4);

    const Matrix single = rng.NormalMatrix(1, 8, 1);
    const auto r = TvfMultiHead(ag::Constant(zt), ag::Constant(single), p);
    for (const auto &a : r.attention) {
      for (double w : a.values()) CHECK(w == 1.0);
    }
    // With one memory row the attended values are that row's projection.
    const Matrix v = oracle::Product(single, p.wv.value());
    Matrix expect(4, 16);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 8; ++j) expect(i, j) = zt(i, j), expect(i, 8 + j) = v(0, j);
    }
    CHECK(MaxAbsDiff(r.output.value(), oracle::Product(expect, p.w3.value())) < 1e-12);
    CHECK_THROWS_AS(FusionLayerParams(ps, "bad", FusionVariant::kMultiHead, 8, 8, 3, rng), ConfigError);
  }

  TEST_CASE("single-head multi-head fusion equals the scaled dot-product oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + int(rng.Below(6)), m = 1 + int(rng.Below(6));
      const int d_t = 2 + int(rng.Below(10)), d_v = 1 + int(rng.Below(10));
      ParameterSet ps;
      FusionLayerParams p(ps, "f", FusionVariant::kMultiHead, d_t, d_v, 1, rng);
      const Matrix zt = rng.NormalMatrix(n, d_t, 1), zv = rng.NormalMatrix(m, d_v, 1);
      const auto r = TvfMultiHead(ag::Constant(zt), ag::Constant(zv), p);
      Matrix w;
      const Matrix o = oracle::SingleHeadAttention(oracle::Product(zt, p.wq.value()), oracle::Product(zv, p.wk.value()),
                                                   oracle::Product(zv, p.wv.value()), &w);
      Matrix cat(n, 2 * d_t);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d_t; ++j) cat(i, j) = zt(i, j), cat(i, d_t + j) = o(i, j);
      }
      CHECK(MaxAbsDiff(r.output.value(), oracle::Product(cat, p.w3.value())) < 1e-9);
      CHECK(MaxAbsDiff(r.attention[0], w) < 1e-9);
    }
  }

  TEST_CASE("multi-head fusion gradient") {
    Rng rng(6);
    ParameterSet ps;
    FusionLayerParams p(ps, "f", FusionVariant::kMultiHead, 8, 6, 2, rng);
    ag::Var zt = ps.Add("zt", rng.NormalMatrix(4, 8, 1));
    ag::Var zv = ps.Add("zv", rng.NormalMatrix(3, 6, 1));
    const auto r = CheckGradients([&] { return ag::Sum(TvfMultiHead(zt, zv, p).output); }, ps.items(), 64);
    CHECK_MESSAGE(r.rel_error < 1e-4, r.worst, " ", r.rel_error);
  }

  TEST_CASE("encoder layers stack, normalize and differentiate") {
    Rng rng(7);
    for (FusionVariant variant : {FusionVariant::kDotProduct, FusionVariant::kMultiHead}) {
      ParameterSet ps;
      std::vector<EncoderLayerParams> layers;
      for (int l = 0; l < 3; ++l) layers.emplace_back(ps, "enc." + std::to_string(l), variant, 8, 2, rng);
      const ag::Var z0 = ag::Constant(rng.NormalMatrix(5, 8, 1));
      const ag::Var pv = ag::Constant(rng.NormalMatrix(3, 8, 1));
      ag::Var z = z0;
      for (int k = 0; k < 3; ++k) {
        z = EncoderLayer(z, pv, layers[k]);
        CHECK(z.rows() == 5);
        CHECK(z.cols() == 8);
      }
      for (int i = 0; i < 5; ++i) {
        double mean = 0, var = 0;
        for (double v : z.value().row(i)) mean += v;
        mean /= 8;
        for (double v : z.value().row(i)) var += (v - mean) * (v - mean);
        CHECK(std::fabs(mean) < 1e-6);
        CHECK(var / 8 == doctest::Approx(1.0).epsilon(1e-3));
      }
      const Matrix w = rng.NormalMatrix(5, 8, 1);
      ParameterSet two;
      EncoderLayerParams a(two, "a", variant, 8, 2, rng), b(two, "b", variant, 8, 2, rng);
      const auto r = CheckGradients([&] { return Probe(EncoderLayer(EncoderLayer(z0, pv, a), pv, b), w); },
                                    two.items(), 12);
      CHECK_MESSAGE(r.rel_error < 1e-3, FusionVariantName(variant), " ", r.worst, " ", r.rel_error);
    }
  }

  TEST_CASE("generation loss examples") {
    const std::vector<int> targets{3, 0, 9};
    CHECK(GenerationLoss(ag::Constant(Matrix(3, 10)), targets).value()[0] ==
          doctest::Approx(std::log(10.0)).epsilon(1e-12));
    Matrix sharp(3, 10, -50.0);
    for (int i = 0; i < 3; ++i) sharp(i, targets[i]) = 50.0;
    CHECK(GenerationLoss(ag::Constant(sharp), targets).value()[0] < 1e-40);
    Rng rng(8);
    const Matrix logits = rng.NormalMatrix(3, 10, 2);
    CHECK(std::fabs(GenerationLoss(ag::Constant(logits), targets).value()[0] -
                    oracle::CrossEntropy(logits, targets)) < 1e-9);
    CHECK_THROWS_AS(GenerationLoss(ag::Constant(logits), std::vector<int>{1}), ShapeError);
  }

  TEST_CASE("vocabulary") {
    TextVocab v({"pagal", "hai", "pagal", "</s>"});
    CHECK(v.size() == 5);
    CHECK(v.Piece(TextVocab::kBegin) == "<s>");
    CHECK(v.Piece(TextVocab::kEnd) == "</s>");
    CHECK(v.Id("hai") == 3);
    CHECK(v.Id("zzz") == TextVocab::kUnknown);
    CHECK(v.Decode({0, 4, 3, 1}) == "pagal hai");
  }

  TEST_CASE("generation is greedy, deterministic and capped") {
    const auto corpus = testing::ToyCorpus(2);
    ModelConfig c = testing::TinyModelConfig(Mode::kSingleText);
    MemexModel model(c, MakeBackbone(c.backbone), BuildVocab(corpus));
    const SampleFeatures f = model.Prepare(corpus[0]);
    const GenerationOutput a = model.Generate(f), b = model.Generate(f);
    CHECK(a.token_ids == b.token_ids);
    CHECK(a.text == b.text);
    CHECK(a.logits == b.logits);
    CHECK(int(a.token_ids.size()) == a.logits.rows());

    // An output layer that always prefers one ordinary word never ends.
    ag::Var w = model.textgen()->output_layer().w, bias = model.textgen()->output_layer().b;
    w.mutable_value().Fill(0.0);
    bias.mutable_value().Fill(0.0);
    bias.mutable_value()[3] = 5.0;
    const GenerationOutput capped = model.Generate(f);
    CHECK(capped.token_ids.size() == 64);
    CHECK(capped.logits.rows() == 64);
    CHECK(std::count(capped.token_ids.begin(), capped.token_ids.end(), TextVocab::kEnd) == 0);
  }

  TEST_CASE("overfitting one sample reproduces its rationale") {
    const auto corpus = testing::ToyCorpus(1, 4);
    ModelConfig c = testing::ToyModelConfig(Mode::kSingleText);
    MemexModel model(c, MakeBackbone(c.backbone), BuildVocab(corpus));
    TrainConfig t = testing::ToyTrainConfig(120);
    Trainer trainer(model, t);
    const std::vector<SampleFeatures> features{model.Prepare(corpus[0])};
    trainer.Fit(features);
    CHECK(trainer.state().step <= 500);
    CHECK(model.Generate(features[0]).text == RationaleTarget(corpus[0]));
  }
}

}  // namespace
}  // namespace memex
