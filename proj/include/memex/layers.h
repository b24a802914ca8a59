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

#ifndef MEMEX_LAYERS_H_
#define MEMEX_LAYERS_H_

#include <string>
#include <string_view>
#include <vector>

#include "memex/autograd.h"
#include "memex/random.h"

namespace memex {

struct NamedParameter {
  std::string name;
  ag::Var var;
};

// Ordered registry of trainable parameters. Names are dotted paths such as
// "textgen.enc.0.msa.q.w"; registration order fixes checkpoint layout and
// optimizer iteration order.
class ParameterSet {
 public:
  ag::Var Add(std::string name, Matrix init);

  const std::vector<NamedParameter> &items() const { return items_; }
  bool Contains(std::string_view name) const;
  ag::Var Get(std::string_view name) const;
  bool AnyWithPrefix(std::string_view prefix) const;
  std::vector<NamedParameter> WithPrefix(std::string_view prefix) const;
  std::size_t ScalarCount() const;
  std::size_t ScalarCount(std::string_view prefix) const;
  void ZeroGrad();

 private:
  std::vector<NamedParameter> items_;
};

// x·W (+ b). W is in×out.
struct Linear {
  Linear() = default;
  Linear(ParameterSet &params, const std::string &prefix, int in, int out, Rng &rng,
         bool bias = true);
  ag::Var operator()(const ag::Var &x) const;

  ag::Var w;
  ag::Var b;  // undefined when constructed without bias
};

struct LayerNormLayer {
  LayerNormLayer() = default;
  LayerNormLayer(ParameterSet &params, const std::string &prefix, int dim);
  ag::Var operator()(const ag::Var &x) const;

  ag::Var gamma;
  ag::Var beta;
};

// Position-wise Linear → GELU → Linear.
struct FeedForward {
  FeedForward() = default;
  FeedForward(ParameterSet &params, const std::string &prefix, int dim, int hidden, Rng &rng);
  ag::Var operator()(const ag::Var &x) const;

  Linear in;
  Linear out;
};

// Per-head scaled dot-product attention over already projected q, k, v.
// Heads are contiguous column blocks. When `weights` is non-null it receives
// one attention matrix per head.
ag::Var ScaledDotProductAttention(const ag::Var &q, const ag::Var &k, const ag::Var &v, int heads,
                                  const Matrix &mask = {}, std::vector<Matrix> *weights = nullptr);

// Upper-triangular −∞ mask for causal self-attention.
Matrix CausalMask(int n);

struct MultiHeadAttention {
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet &params, const std::string &prefix, int dim, int heads, Rng &rng);
  ag::Var operator()(const ag::Var &query, const ag::Var &memory, const Matrix &mask = {}) const;

  int heads = 1;
  Linear q, k, v, o;
};

// Post-norm transformer encoder block: LN(x + MSA(x)) then LN(x + FFN(x)).
struct TransformerBlock {
  TransformerBlock() = default;
  TransformerBlock(ParameterSet &params, const std::string &prefix, int dim, int heads,
                   int hidden, Rng &rng);
  ag::Var operator()(const ag::Var &x) const;

  MultiHeadAttention attn;
  LayerNormLayer ln1;
  FeedForward ffn;
  LayerNormLayer ln2;
};

// Post-norm decoder block with causal self-attention and cross-attention.
struct TransformerDecoderBlock {
  TransformerDecoderBlock() = default;
  TransformerDecoderBlock(ParameterSet &params, const std::string &prefix, int dim, int heads,
                          int hidden, Rng &rng);
  ag::Var operator()(const ag::Var &x, const ag::Var &memory) const;

  MultiHeadAttention self_attn;
  LayerNormLayer ln1;
  MultiHeadAttention cross_attn;
  LayerNormLayer ln2;
  FeedForward ffn;
  LayerNormLayer ln3;
};

// Scalar counts of the blocks above, for architecture regression checks.
std::size_t LinearParamCount(int in, int out, bool bias = true);
std::size_t AttentionParamCount(int dim);
std::size_t TransformerBlockParamCount(int dim, int hidden);
std::size_t DecoderBlockParamCount(int dim, int hidden);

}  // namespace memex

#endif  // MEMEX_LAYERS_H_
