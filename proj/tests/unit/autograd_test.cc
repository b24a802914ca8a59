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
#include <vector>

#include "doctest.h"
#include "memex/autograd.h"
#include "memex/errors.h"
#include "memex/layers.h"
#include "support/grad_check.h"
#include "support/oracles.h"

namespace memex {
namespace {

using testing::CheckGradients;

TEST_SUITE("autograd") {
  TEST_CASE("elementwise and structural ops pass finite differences") {
    Rng rng(1);
    ParameterSet ps;
    ag::Var a = ps.Add("a", rng.NormalMatrix(3, 4, 1.0));
    ag::Var b = ps.Add("b", rng.NormalMatrix(4, 5, 1.0));
    ag::Var row = ps.Add("row", rng.NormalMatrix(1, 5, 1.0));
    ag::Var g = ps.Add("g", rng.NormalMatrix(1, 5, 1.0));
    ag::Var beta = ps.Add("beta", rng.NormalMatrix(1, 5, 1.0));
    const Matrix mask = [] {
      Matrix m(3, 5);
      m(0, 4) = -1e9;
      return m;
    }();
    auto loss = [&] {
      ag::Var h = ag::AddRow(ag::MatMul(a, b), row);
      ag::Var s = ag::Softmax(ag::Tanh(h), mask);
      ag::Var n = ag::LayerNorm(ag::Gelu(h), g, beta);
      ag::Var parts[] = {s, ag::Sigmoid(n)};
      ag::Var cat = ag::ConcatCols(parts);
      ag::Var t = ag::Transpose(ag::SliceCols(cat, 2, 6));
      ag::Var r = ag::Reshape(t, 2, 9);
      ag::Var m = ag::MulRow(ag::MatMulNT(r, r), ag::SliceCols(row, 0, 2));
      return ag::Add(ag::Mean(ag::Mul(m, m)), ag::Sum(ag::MeanRows(ag::Scale(n, 0.3))));
    };
    const auto r = CheckGradients(loss, ps.items(), 64);
    CHECK_MESSAGE(r.rel_error < 1e-7, "worst ", r.worst);
  }

  TEST_CASE("losses pass finite differences") {
    Rng rng(2);
    ParameterSet ps;
    ag::Var x = ps.Add("x", rng.NormalMatrix(4, 6, 2.0));
    const std::vector<int> targets{0, 5, 2, 2};
    Matrix bin(4, 6);
    for (std::size_t i = 0; i < bin.size(); ++i) bin[i] = double(i % 3 == 0);
    auto loss = [&] {
      return ag::CrossEntropy(x, targets) + ag::BceWithLogits(ag::SliceRows(x, 1, 3), Matrix(3, 6, 1.0)) +
             ag::BceWithLogits(x, bin);
    };
    CHECK(CheckGradients(loss, ps.items(), 64).rel_error < 1e-7);
  }

  TEST_CASE("cross-entropy and bce match naive oracles") {
    Rng rng(3);
    const Matrix logits = rng.NormalMatrix(5, 7, 3.0);
    const std::vector<int> t{1, 0, 6, 3, 3};
    CHECK(std::fabs(ag::CrossEntropy(ag::Constant(logits), t).value()[0] - oracle::CrossEntropy(logits, t)) < 1e-12);
    Matrix bin(5, 7);
    for (std::size_t i = 0; i < bin.size(); ++i) bin[i] = double(rng.Below(2));
    CHECK(std::fabs(ag::BceWithLogits(ag::Constant(logits), bin).value()[0] -
                    oracle::BinaryCrossEntropy(logits, bin)) < 1e-12);
  }

  TEST_CASE("gradients accumulate until zeroed") {
    ParameterSet ps;
    ag::Var w = ps.Add("w", Matrix{{2.0}});
    ag::Backward(ag::Mul(w, w));
    ag::Backward(ag::Mul(w, w));
    CHECK(w.grad()[0] == 8.0);
    ps.ZeroGrad();
    CHECK(w.grad()[0] == 0.0);
  }

  TEST_CASE("no-grad guard records nothing") {
    ag::Var w = ag::Parameter(Matrix{{1.0, 2.0}});
    ag::NoGradGuard guard;
    ag::Var y = ag::Sum(ag::Scale(w, 3.0));
    CHECK(!y.requires_grad());
    CHECK(y.value()[0] == 9.0);
  }

  TEST_CASE("constants carry no gradient") {
    ag::Var c = ag::Constant(Matrix{{1.0}});
    ag::Var p = ag::Parameter(Matrix{{1.0}});
    CHECK(!ag::Mul(c, c).requires_grad());
    CHECK(ag::Mul(c, p).requires_grad());
  }

  TEST_CASE("shape errors") {
    CHECK_THROWS_AS(ag::Add(ag::Constant(Matrix(2, 2)), ag::Constant(Matrix(2, 3))), ShapeError);
    CHECK_THROWS_AS(ag::CrossEntropy(ag::Constant(Matrix(2, 3)), std::vector<int>{0}), ShapeError);
    CHECK_THROWS_AS(ag::CrossEntropy(ag::Constant(Matrix(1, 3)), std::vector<int>{3}), ShapeError);
  }

  TEST_CASE("stable scalar helpers") {
    CHECK(ag::StableSigmoid(-800) >= 0.0);
    CHECK(ag::StableSigmoid(800) == 1.0);
    CHECK(ag::Softplus(800) == doctest::Approx(800));
    CHECK(ag::Softplus(0) == doctest::Approx(std::log(2.0)));
  }
}

}  // namespace
}  // namespace memex
