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

#ifndef MEMEX_AUTOGRAD_H_
#define MEMEX_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "memex/matrix.h"

// Reverse-mode automatic differentiation over dense matrices.
//
// A Var is a handle to a node in a dynamically built graph. Leaves created
// with Parameter() accumulate gradients across Backward() calls until
// ZeroGrad(); everything else is rebuilt on every forward pass. Nodes that do
// not depend on any parameter carry no backward closure, so frozen inputs
// cost nothing at backward time.
namespace memex::ag {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward;

  void AccumulateGrad(const Matrix &g);
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix &value() const { return node_->value; }
  // Mutating a parameter's value in place is how optimizers and
  // finite-difference probes perturb it.
  Matrix &mutable_value() { return node_->value; }
  const Matrix &grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  int rows() const { return node_->value.rows(); }
  int cols() const { return node_->value.cols(); }
  bool defined() const { return node_ != nullptr; }
  Node *node() const { return node_.get(); }
  const std::shared_ptr<Node> &shared() const { return node_; }

  void ZeroGrad();

 private:
  std::shared_ptr<Node> node_;
};

// While alive on a thread, ops on that thread record no backward closures.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};

Var Constant(Matrix value);
Var Parameter(Matrix value);

// Seeds d(root)/d(root) = 1 and propagates to every parameter. root is 1×1.
void Backward(const Var &root);

Var MatMul(const Var &a, const Var &b);
Var MatMulNT(const Var &a, const Var &b);  // a·bᵀ
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);
Var AddRow(const Var &x, const Var &row);  // broadcast 1×n over rows
Var MulRow(const Var &x, const Var &row);
Var Scale(const Var &x, double s);
Var Sigmoid(const Var &x);
Var Tanh(const Var &x);
Var Gelu(const Var &x);  // tanh approximation
// Row-wise softmax of x + mask; mask is a constant additive bias (may be empty).
Var Softmax(const Var &x, const Matrix &mask = {});
Var LayerNorm(const Var &x, const Var &gamma, const Var &beta, double eps = 1e-5);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceRows(const Var &x, int start, int count);
Var SliceCols(const Var &x, int start, int count);
Var Transpose(const Var &x);
Var Reshape(const Var &x, int rows, int cols);
Var MeanRows(const Var &x);  // 1×cols column means
Var Sum(const Var &x);
Var Mean(const Var &x);
// Mean token cross-entropy of row-wise logits against class ids.
Var CrossEntropy(const Var &logits, std::span<const int> targets);
// Mean binary cross-entropy of sigmoid(logits) against a {0,1} target.
Var BceWithLogits(const Var &logits, const Matrix &targets);

inline Var operator+(const Var &a, const Var &b) { return Add(a, b); }
inline Var operator-(const Var &a, const Var &b) { return Sub(a, b); }

// Numerically stable scalar helpers shared with non-graph code.
double StableSigmoid(double x);
double Softplus(double x);

}  // namespace memex::ag

#endif  // MEMEX_AUTOGRAD_H_
