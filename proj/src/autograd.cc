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

#include "memex/autograd.h"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "memex/errors.h"
#include "memex/kernels.h"

namespace memex::ag {
namespace {

using NodePtr = std::shared_ptr<Node>;

thread_local bool t_no_grad = false;

Var MakeResult(Matrix value, std::vector<NodePtr> parents, std::function<void(Node &)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  bool tracked = false;
  if (!t_no_grad) {
    for (const auto &p : parents) tracked = tracked || p->requires_grad;
  }
  if (tracked) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void RequireSameShape(const Var &a, const Var &b, const char *op) {
  if (!a.value().SameShape(b.value())) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

void RequireRow(const Var &x, const Var &row, const char *op) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw ShapeError(std::string(op) + ": broadcast row has wrong shape");
  }
}

// Elementwise unary op given f and f' expressed through (x, y).
template <typename F, typename DF>
Var Unary(const Var &x, F f, DF df) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x.value()[i]);
  Node *px = x.node();
  return MakeResult(y, {x.shared()}, [px, df](Node &self) {
    if (!px->requires_grad) return;
    Matrix g(self.value.rows(), self.value.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = self.grad[i] * df(px->value[i], self.value[i]);
    }
    px->AccumulateGrad(g);
  });
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(t_no_grad) { t_no_grad = true; }
NoGradGuard::~NoGradGuard() { t_no_grad = previous_; }

void Node::AccumulateGrad(const Matrix &g) {
  if (grad.empty() && !value.empty()) {
    grad = g;
    return;
  }
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
}

void Var::ZeroGrad() {
  node_->grad = Matrix(node_->value.rows(), node_->value.cols());
}

Var Constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->grad = Matrix(value.rows(), value.cols());
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

void Backward(const Var &root) {
  if (root.rows() != 1 || root.cols() != 1) throw ShapeError("Backward: root must be scalar");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS yields a topological order.
  std::vector<Node *> order;
  std::unordered_set<Node *> visited;
  std::vector<std::pair<Node *, std::size_t>> stack{{root.node(), 0}};
  visited.insert(root.node());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node *parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->AccumulateGrad(Matrix(1, 1, 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  // Free intermediate gradients so a second Backward over a shared subgraph
  // starts clean; parameter leaves keep theirs.
  for (Node *node : order) {
    if (node->backward) node->grad = Matrix();
  }
}

Var MatMul(const Var &a, const Var &b) {
  Node *pa = a.node(), *pb = b.node();
  return MakeResult(kernels::MatMul(a.value(), b.value()), {a.shared(), b.shared()},
                    [pa, pb](Node &self) {
                      if (pa->requires_grad) pa->AccumulateGrad(kernels::MatMulNT(self.grad, pb->value));
                      if (pb->requires_grad) pb->AccumulateGrad(kernels::MatMulTN(pa->value, self.grad));
                    });
}

Var MatMulNT(const Var &a, const Var &b) {
  Node *pa = a.node(), *pb = b.node();
  return MakeResult(kernels::MatMulNT(a.value(), b.value()), {a.shared(), b.shared()},
                    [pa, pb](Node &self) {
                      if (pa->requires_grad) pa->AccumulateGrad(kernels::MatMul(self.grad, pb->value));
                      if (pb->requires_grad) pb->AccumulateGrad(kernels::MatMulTN(self.grad, pa->value));
                    });
}

Var Add(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Add");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  Node *pa = a.node(), *pb = b.node();
  return MakeResult(std::move(y), {a.shared(), b.shared()}, [pa, pb](Node &self) {
    if (pa->requires_grad) pa->AccumulateGrad(self.grad);
    if (pb->requires_grad) pb->AccumulateGrad(self.grad);
  });
}

Var Sub(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Sub");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  Node *pa = a.node(), *pb = b.node();
  return MakeResult(std::move(y), {a.shared(), b.shared()}, [pa, pb](Node &self) {
    if (pa->requires_grad) pa->AccumulateGrad(self.grad);
    if (pb->requires_grad) {
      Matrix g = self.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i];
      pb->AccumulateGrad(g);
    }
  });
}

Var Mul(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Mul");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  Node *pa = a.node(), *pb = b.node();
  return MakeResult(std::move(y), {a.shared(), b.shared()}, [pa, pb](Node &self) {
    if (pa->requires_grad) {
      Matrix g = self.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= pb->value[i];
      pa->AccumulateGrad(g);
    }
    if (pb->requires_grad) {
      Matrix g = self.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= pa->value[i];
      pb->AccumulateGrad(g);
    }
  });
}

Var AddRow(const Var &x, const Var &row) {
  RequireRow(x, row, "AddRow");
  Matrix y = x.value();
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) y(r, c) += row.value()(0, c);
  Node *px = x.node(), *pr = row.node();
  return MakeResult(std::move(y), {x.shared(), row.shared()}, [px, pr](Node &self) {
    if (px->requires_grad) px->AccumulateGrad(self.grad);
    if (pr->requires_grad) {
      Matrix g(1, self.grad.cols());
      for (int r = 0; r < self.grad.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) g(0, c) += self.grad(r, c);
      pr->AccumulateGrad(g);
    }
  });
}

Var MulRow(const Var &x, const Var &row) {
  RequireRow(x, row, "MulRow");
  Matrix y = x.value();
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) y(r, c) *= row.value()(0, c);
  Node *px = x.node(), *pr = row.node();
  return MakeResult(std::move(y), {x.shared(), row.shared()}, [px, pr](Node &self) {
    if (px->requires_grad) {
      Matrix g = self.grad;
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) g(r, c) *= pr->value(0, c);
      px->AccumulateGrad(g);
    }
    if (pr->requires_grad) {
      Matrix g(1, self.grad.cols());
      for (int r = 0; r < self.grad.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) g(0, c) += self.grad(r, c) * px->value(r, c);
      pr->AccumulateGrad(g);
    }
  });
}

Var Scale(const Var &x, double s) {
  return Unary(
      x, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Var Sigmoid(const Var &x) {
  return Unary(
      x, StableSigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var Tanh(const Var &x) {
  return Unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var Gelu(const Var &x) {
  return Unary(
      x,
      [](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v))); },
      [](double v, double) {
        const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      });
}

Var Softmax(const Var &x, const Matrix &mask) {
  Node *px = x.node();
  return MakeResult(kernels::SoftmaxRows(x.value(), mask), {x.shared()}, [px](Node &self) {
    const Matrix &y = self.value;
    Matrix g(y.rows(), y.cols());
    for (int r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < y.cols(); ++c) dot += self.grad(r, c) * y(r, c);
      for (int c = 0; c < y.cols(); ++c) g(r, c) = y(r, c) * (self.grad(r, c) - dot);
    }
    px->AccumulateGrad(g);
  });
}

Var LayerNorm(const Var &x, const Var &gamma, const Var &beta, double eps) {
  RequireRow(x, gamma, "LayerNorm");
  RequireRow(x, beta, "LayerNorm");
  Matrix inv_std;
  Matrix xhat = kernels::NormalizeRows(x.value(), eps, inv_std);
  Matrix y = xhat;
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) y(r, c) = y(r, c) * gamma.value()(0, c) + beta.value()(0, c);
  Node *px = x.node(), *pg = gamma.node(), *pb = beta.node();
  return MakeResult(std::move(y), {x.shared(), gamma.shared(), beta.shared()},
                    [px, pg, pb, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node &self) {
                      const int rows = xhat.rows(), n = xhat.cols();
                      if (pg->requires_grad || pb->requires_grad) {
                        Matrix dg(1, n), db(1, n);
                        for (int r = 0; r < rows; ++r)
                          for (int c = 0; c < n; ++c) {
                            dg(0, c) += self.grad(r, c) * xhat(r, c);
                            db(0, c) += self.grad(r, c);
                          }
                        if (pg->requires_grad) pg->AccumulateGrad(dg);
                        if (pb->requires_grad) pb->AccumulateGrad(db);
                      }
                      if (!px->requires_grad) return;
                      Matrix dx(rows, n);
                      for (int r = 0; r < rows; ++r) {
                        double sum = 0.0, sum_xhat = 0.0;
                        for (int c = 0; c < n; ++c) {
                          const double d = self.grad(r, c) * pg->value(0, c);
                          sum += d;
                          sum_xhat += d * xhat(r, c);
                        }
                        for (int c = 0; c < n; ++c) {
                          const double d = self.grad(r, c) * pg->value(0, c);
                          dx(r, c) = inv_std(r, 0) / n * (n * d - sum - xhat(r, c) * sum_xhat);
                        }
                      }
                      px->AccumulateGrad(dx);
                    });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatCols: no inputs");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const Var &p : parts) {
    if (p.rows() != rows) throw ShapeError("ConcatCols: row count mismatch");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  std::vector<NodePtr> parents;
  std::vector<Node *> raw;
  int offset = 0;
  for (const Var &p : parts) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < p.cols(); ++c) y(r, offset + c) = p.value()(r, c);
    offset += p.cols();
    parents.push_back(p.shared());
    raw.push_back(p.node());
  }
  return MakeResult(std::move(y), std::move(parents), [raw](Node &self) {
    int off = 0;
    for (Node *p : raw) {
      const int pc = p->value.cols();
      if (p->requires_grad) {
        Matrix g(p->value.rows(), pc);
        for (int r = 0; r < g.rows(); ++r)
          for (int c = 0; c < pc; ++c) g(r, c) = self.grad(r, off + c);
        p->AccumulateGrad(g);
      }
      off += pc;
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows: no inputs");
  const int cols = parts[0].cols();
  int rows = 0;
  for (const Var &p : parts) {
    if (p.cols() != cols) throw ShapeError("ConcatRows: column count mismatch");
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(std::size_t(rows) * cols);
  std::vector<NodePtr> parents;
  std::vector<Node *> raw;
  for (const Var &p : parts) {
    data.insert(data.end(), p.value().values().begin(), p.value().values().end());
    parents.push_back(p.shared());
    raw.push_back(p.node());
  }
  return MakeResult(Matrix(rows, cols, std::move(data)), std::move(parents), [raw](Node &self) {
    std::size_t off = 0;
    for (Node *p : raw) {
      const std::size_t n = p->value.size();
      if (p->requires_grad) {
        Matrix g(p->value.rows(), p->value.cols());
        for (std::size_t i = 0; i < n; ++i) g[i] = self.grad[off + i];
        p->AccumulateGrad(g);
      }
      off += n;
    }
  });
}

Var SliceRows(const Var &x, int start, int count) {
  if (start < 0 || count < 0 || start + count > x.rows()) throw ShapeError("SliceRows: out of range");
  const int cols = x.cols();
  const auto first = x.value().values().begin() + std::ptrdiff_t(start) * cols;
  Matrix y(count, cols, std::vector<double>(first, first + std::ptrdiff_t(count) * cols));
  Node *px = x.node();
  return MakeResult(std::move(y), {x.shared()}, [px, start](Node &self) {
    Matrix g(px->value.rows(), px->value.cols());
    const std::size_t off = std::size_t(start) * g.cols();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[off + i] = self.grad[i];
    px->AccumulateGrad(g);
  });
}

Var SliceCols(const Var &x, int start, int count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw ShapeError("SliceCols: out of range");
  Matrix y(x.rows(), count);
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < count; ++c) y(r, c) = x.value()(r, start + c);
  Node *px = x.node();
  return MakeResult(std::move(y), {x.shared()}, [px, start](Node &self) {
    Matrix g(px->value.rows(), px->value.cols());
    for (int r = 0; r < self.grad.rows(); ++r)
      for (int c = 0; c < self.grad.cols(); ++c) g(r, start + c) = self.grad(r, c);
    px->AccumulateGrad(g);
  });
}

Var Transpose(const Var &x) {
  Matrix y(x.cols(), x.rows());
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) y(c, r) = x.value()(r, c);
  Node *px = x.node();
  return MakeResult(std::move(y), {x.shared()}, [px](Node &self) {
    Matrix g(px->value.rows(), px->value.cols());
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) g(r, c) = self.grad(c, r);
    px->AccumulateGrad(g);
  });
}

Var Reshape(const Var &x, int rows, int cols) {
  if (std::size_t(rows) * cols != x.value().size()) throw ShapeError("Reshape: size mismatch");
  Matrix y(rows, cols, std::vector<double>(x.value().values().begin(), x.value().values().end()));
  Node *px = x.node();
  return MakeResult(std::move(y), {x.shared()}, [px](Node &self) {
    Matrix g(px->value.rows(), px->value.cols(),
             std::vector<double>(self.grad.values().begin(), self.grad.values().end()));
    px->AccumulateGrad(g);
  });
}

Var MeanRows(const Var &x) {
  const int rows = x.rows(), cols = x.cols();
  Matrix y(1, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) y(0, c) += x.value()(r, c);
  for (int c = 0; c < cols; ++c) y(0, c) /= rows;
  Node *px = x.node();
  return MakeResult(std::move(y), {x.shared()}, [px, rows, cols](Node &self) {
    Matrix g(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) g(r, c) = self.grad(0, c) / rows;
    px->AccumulateGrad(g);
  });
}

Var Sum(const Var &x) {
  Node *px = x.node();
  return MakeResult(Matrix(1, 1, x.value().Sum()), {x.shared()}, [px](Node &self) {
    px->AccumulateGrad(Matrix(px->value.rows(), px->value.cols(), self.grad[0]));
  });
}

Var Mean(const Var &x) {
  const double n = double(x.value().size());
  Node *px = x.node();
  return MakeResult(Matrix(1, 1, x.value().Sum() / n), {x.shared()}, [px, n](Node &self) {
    px->AccumulateGrad(Matrix(px->value.rows(), px->value.cols(), self.grad[0] / n));
  });
}

Var CrossEntropy(const Var &logits, std::span<const int> targets) {
  const int rows = logits.rows(), vocab = logits.cols();
  if (int(targets.size()) != rows) throw ShapeError("CrossEntropy: length mismatch");
  Matrix probs = kernels::SoftmaxRows(logits.value());
  double loss = 0.0;
  for (int r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t < 0 || t >= vocab) throw ShapeError("CrossEntropy: target id out of range");
    const auto row = logits.value().row(r);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    loss += mx + std::log(z) - row[t];
  }
  loss /= rows;
  Node *pl = logits.node();
  std::vector<int> ids(targets.begin(), targets.end());
  return MakeResult(Matrix(1, 1, loss), {logits.shared()},
                    [pl, probs = std::move(probs), ids = std::move(ids)](Node &self) {
                      Matrix g = probs;
                      const double scale = self.grad[0] / g.rows();
                      for (int r = 0; r < g.rows(); ++r) {
                        g(r, ids[r]) -= 1.0;
                        for (int c = 0; c < g.cols(); ++c) g(r, c) *= scale;
                      }
                      pl->AccumulateGrad(g);
                    });
}

Var BceWithLogits(const Var &logits, const Matrix &targets) {
  if (!logits.value().SameShape(targets)) throw ShapeError("BceWithLogits: shape mismatch");
  const double n = double(targets.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double x = logits.value()[i];
    loss += Softplus(x) - targets[i] * x;
  }
  Node *pl = logits.node();
  return MakeResult(Matrix(1, 1, loss / n), {logits.shared()}, [pl, targets, n](Node &self) {
    Matrix g(targets.rows(), targets.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = (StableSigmoid(pl->value[i]) - targets[i]) * self.grad[0] / n;
    }
    pl->AccumulateGrad(g);
  });
}

}  // namespace memex::ag
