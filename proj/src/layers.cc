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

#include "memex/layers.h"

#include <cmath>
#include <limits>

#include "memex/errors.h"

namespace memex {

ag::Var ParameterSet::Add(std::string name, Matrix init) {
  if (Contains(name)) throw ConfigError("duplicate parameter name: " + name);
  ag::Var var = ag::Parameter(std::move(init));
  items_.push_back({std::move(name), var});
  return var;
}

bool ParameterSet::Contains(std::string_view name) const {
  for (const auto &p : items_) {
    if (p.name == name) return true;
  }
  return false;
}

ag::Var ParameterSet::Get(std::string_view name) const {
  for (const auto &p : items_) {
    if (p.name == name) return p.var;
  }
  throw ConfigError("unknown parameter: " + std::string(name));
}

bool ParameterSet::AnyWithPrefix(std::string_view prefix) const {
  for (const auto &p : items_) {
    if (p.name.starts_with(prefix)) return true;
  }
  return false;
}

std::vector<NamedParameter> ParameterSet::WithPrefix(std::string_view prefix) const {
  std::vector<NamedParameter> out;
  for (const auto &p : items_) {
    if (p.name.starts_with(prefix)) out.push_back(p);
  }
  return out;
}

std::size_t ParameterSet::ScalarCount() const { return ScalarCount(""); }

std::size_t ParameterSet::ScalarCount(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto &p : items_) {
    if (p.name.starts_with(prefix)) n += p.var.value().size();
  }
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto &p : items_) p.var.ZeroGrad();
}

Linear::Linear(ParameterSet &params, const std::string &prefix, int in, int out, Rng &rng,
               bool bias) {
  w = params.Add(prefix + ".w", rng.NormalMatrix(in, out, 1.0 / std::sqrt(double(in))));
  if (bias) b = params.Add(prefix + ".b", Matrix(1, out));
}

ag::Var Linear::operator()(const ag::Var &x) const {
  ag::Var y = ag::MatMul(x, w);
  return b.defined() ? ag::AddRow(y, b) : y;
}

LayerNormLayer::LayerNormLayer(ParameterSet &params, const std::string &prefix, int dim) {
  gamma = params.Add(prefix + ".gamma", Matrix(1, dim, 1.0));
  beta = params.Add(prefix + ".beta", Matrix(1, dim));
}

ag::Var LayerNormLayer::operator()(const ag::Var &x) const { return ag::LayerNorm(x, gamma, beta); }

FeedForward::FeedForward(ParameterSet &params, const std::string &prefix, int dim, int hidden,
                         Rng &rng)
    : in(params, prefix + ".in", dim, hidden, rng), out(params, prefix + ".out", hidden, dim, rng) {}

ag::Var FeedForward::operator()(const ag::Var &x) const { return out(ag::Gelu(in(x))); }

ag::Var ScaledDotProductAttention(const ag::Var &q, const ag::Var &k, const ag::Var &v, int heads,
                                  const Matrix &mask, std::vector<Matrix> *weights) {
  const int dim = q.cols();
  if (heads < 1 || dim % heads != 0) {
    throw ShapeError("attention width " + std::to_string(dim) + " not divisible by " +
                     std::to_string(heads) + " heads");
  }
  if (k.cols() != dim || v.cols() != dim || k.rows() != v.rows()) {
    throw ShapeError("attention: q/k/v shape mismatch");
  }
  const int head_dim = dim / heads;
  const double scale = 1.0 / std::sqrt(double(head_dim));
  if (weights != nullptr) weights->clear();
  std::vector<ag::Var> outs;
  outs.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    ag::Var qh = heads == 1 ? q : ag::SliceCols(q, h * head_dim, head_dim);
    ag::Var kh = heads == 1 ? k : ag::SliceCols(k, h * head_dim, head_dim);
    ag::Var vh = heads == 1 ? v : ag::SliceCols(v, h * head_dim, head_dim);
    ag::Var attn = ag::Softmax(ag::Scale(ag::MatMulNT(qh, kh), scale), mask);
    if (weights != nullptr) weights->push_back(attn.value());
    outs.push_back(ag::MatMul(attn, vh));
  }
  return heads == 1 ? outs[0] : ag::ConcatCols(outs);
}

Matrix CausalMask(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(i, j) = -std::numeric_limits<double>::infinity();
  return m;
}

MultiHeadAttention::MultiHeadAttention(ParameterSet &params, const std::string &prefix, int dim,
                                       int heads_in, Rng &rng)
    : heads(heads_in),
      q(params, prefix + ".q", dim, dim, rng),
      k(params, prefix + ".k", dim, dim, rng),
      v(params, prefix + ".v", dim, dim, rng),
      o(params, prefix + ".o", dim, dim, rng) {
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError(prefix + ": width " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
}

ag::Var MultiHeadAttention::operator()(const ag::Var &query, const ag::Var &memory,
                                       const Matrix &mask) const {
  return o(ScaledDotProductAttention(q(query), k(memory), v(memory), heads, mask));
}

TransformerBlock::TransformerBlock(ParameterSet &params, const std::string &prefix, int dim,
                                   int heads, int hidden, Rng &rng)
    : attn(params, prefix + ".msa", dim, heads, rng),
      ln1(params, prefix + ".ln1", dim),
      ffn(params, prefix + ".ffn", dim, hidden, rng),
      ln2(params, prefix + ".ln2", dim) {}

ag::Var TransformerBlock::operator()(const ag::Var &x) const {
  ag::Var h = ln1(x + attn(x, x));
  return ln2(h + ffn(h));
}

TransformerDecoderBlock::TransformerDecoderBlock(ParameterSet &params, const std::string &prefix,
                                                 int dim, int heads, int hidden, Rng &rng)
    : self_attn(params, prefix + ".self", dim, heads, rng),
      ln1(params, prefix + ".ln1", dim),
      cross_attn(params, prefix + ".cross", dim, heads, rng),
      ln2(params, prefix + ".ln2", dim),
      ffn(params, prefix + ".ffn", dim, hidden, rng),
      ln3(params, prefix + ".ln3", dim) {}

ag::Var TransformerDecoderBlock::operator()(const ag::Var &x, const ag::Var &memory) const {
  ag::Var h = ln1(x + self_attn(x, x, CausalMask(x.rows())));
  h = ln2(h + cross_attn(h, memory));
  return ln3(h + ffn(h));
}

std::size_t LinearParamCount(int in, int out, bool bias) {
  return std::size_t(in) * out + (bias ? out : 0);
}

std::size_t AttentionParamCount(int dim) { return 4 * LinearParamCount(dim, dim); }

std::size_t TransformerBlockParamCount(int dim, int hidden) {
  return AttentionParamCount(dim) + LinearParamCount(dim, hidden) + LinearParamCount(hidden, dim) +
         2 * 2 * std::size_t(dim);
}

std::size_t DecoderBlockParamCount(int dim, int hidden) {
  return 2 * AttentionParamCount(dim) + LinearParamCount(dim, hidden) +
         LinearParamCount(hidden, dim) + 3 * 2 * std::size_t(dim);
}

}  // namespace memex
