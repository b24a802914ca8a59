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

#include "memex/textgen.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "memex/corpus.h"
#include "memex/errors.h"

namespace memex {
namespace {

Matrix InitWeight(Rng &rng, int in, int out) {
  return rng.NormalMatrix(in, out, 1.0 / std::sqrt(double(in)));
}

int FfnHidden(int d_t) { return 2 * d_t; }

}  // namespace

const char *FusionVariantName(FusionVariant v) {
  return v == FusionVariant::kDotProduct ? "A1" : "A2";
}

FusionVariant ParseFusionVariant(const std::string &name) {
  if (name == "A1") return FusionVariant::kDotProduct;
  if (name == "A2") return FusionVariant::kMultiHead;
  throw ConfigError("textgen.variant must be A1 or A2, got '" + name + "'");
}

FusionLayerParams::FusionLayerParams(ParameterSet &params, const std::string &prefix,
                                     FusionVariant variant_in, int d_t, int d_v, int heads_in,
                                     Rng &rng)
    : variant(variant_in), heads(heads_in) {
  if (variant == FusionVariant::kDotProduct) {
    w1 = params.Add(prefix + ".w1", InitWeight(rng, d_v, d_t));
    w2 = params.Add(prefix + ".w2", InitWeight(rng, d_t + d_v, d_t));
  } else {
    if (heads < 1 || d_t % heads != 0) {
      throw ConfigError(prefix + ": d_t " + std::to_string(d_t) + " not divisible by " +
                        std::to_string(heads) + " heads");
    }
    wq = params.Add(prefix + ".wq", InitWeight(rng, d_t, d_t));
    wk = params.Add(prefix + ".wk", InitWeight(rng, d_v, d_t));
    wv = params.Add(prefix + ".wv", InitWeight(rng, d_v, d_t));
    w3 = params.Add(prefix + ".w3", InitWeight(rng, 2 * d_t, d_t));
  }
}

FusionResult TvfDot(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params) {
  if (params.variant != FusionVariant::kDotProduct) throw ShapeError("TvfDot needs A1 parameters");
  if (params.w1.rows() != z_v.cols()) throw ShapeError("TvfDot: W1 input width != d_v");
  if (params.w1.cols() != z_t.cols()) throw ShapeError("TvfDot: W1 output width != d_t");
  ag::Var projected = ag::MatMul(z_v, params.w1);
  ag::Var attention = ag::Softmax(ag::MatMulNT(z_t, projected));
  const ag::Var parts[] = {z_t, ag::MatMul(attention, z_v)};
  FusionResult result;
  result.output = ag::MatMul(ag::ConcatCols(parts), params.w2);
  result.attention.push_back(attention.value());
  return result;
}

FusionResult TvfMultiHead(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params) {
  if (params.variant != FusionVariant::kMultiHead) throw ShapeError("TvfMultiHead needs A2 parameters");
  if (params.heads < 1 || z_t.cols() % params.heads != 0) {
    throw ShapeError("TvfMultiHead: d_t not divisible by head count");
  }
  ag::Var q = ag::MatMul(z_t, params.wq);
  ag::Var k = ag::MatMul(z_v, params.wk);
  ag::Var v = ag::MatMul(z_v, params.wv);
  FusionResult result;
  ag::Var o = ScaledDotProductAttention(q, k, v, params.heads, {}, &result.attention);
  const ag::Var parts[] = {z_t, o};
  result.output = ag::MatMul(ag::ConcatCols(parts), params.w3);
  return result;
}

FusionResult Tvf(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params) {
  return params.variant == FusionVariant::kDotProduct ? TvfDot(z_t, z_v, params)
                                                      : TvfMultiHead(z_t, z_v, params);
}

EncoderLayerParams::EncoderLayerParams(ParameterSet &params, const std::string &prefix,
                                       FusionVariant variant, int d_t, int heads, Rng &rng)
    : msa(params, prefix + ".msa", d_t, heads, rng),
      ln1(params, prefix + ".ln1", d_t),
      fnn(params, prefix + ".fnn", d_t, FfnHidden(d_t), rng),
      ln2(params, prefix + ".ln2", d_t),
      tvf(params, prefix + ".tvf", variant, d_t, d_t, heads, rng),
      ln3(params, prefix + ".ln3", d_t) {}

ag::Var EncoderLayer(const ag::Var &z, const ag::Var &p_v, const EncoderLayerParams &params) {
  ag::Var z1 = params.ln1(z + params.msa(z, z));
  ag::Var z2 = params.ln2(z1 + params.fnn(z1));
  return params.ln3(z2 + Tvf(z2, p_v, params.tvf).output);
}

TextVocab::TextVocab() : TextVocab(std::vector<std::string>{}) {}

TextVocab::TextVocab(const std::vector<std::string> &words) {
  pieces_ = {kBeginToken, kEndToken, kUnknownToken};
  std::set<std::string> sorted(words.begin(), words.end());
  for (const auto &p : pieces_) sorted.erase(p);
  pieces_.insert(pieces_.end(), sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < pieces_.size(); ++i) ids_[pieces_[i]] = int(i);
}

int TextVocab::Id(const std::string &piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? kUnknown : it->second;
}

std::vector<int> TextVocab::Encode(const std::vector<std::string> &words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto &w : words) ids.push_back(Id(w));
  return ids;
}

std::string TextVocab::Decode(const std::vector<int> &ids) const {
  std::vector<std::string> words;
  for (int id : ids) {
    if (id == kBegin || id == kEnd) continue;
    words.push_back(Piece(id));
  }
  return JoinTokens(words);
}

ag::Var GenerationLoss(const ag::Var &logits, std::span<const int> target_ids) {
  if (int(target_ids.size()) != logits.rows()) {
    throw ShapeError("generation loss: " + std::to_string(logits.rows()) + " logit rows vs " +
                     std::to_string(target_ids.size()) + " targets");
  }
  return ag::CrossEntropy(logits, target_ids);
}

TextGenerator::TextGenerator(ParameterSet &params, const TextGenConfig &config, int d_t,
                             const TextVocab &vocab, const Backbone &backbone, Rng &rng)
    : config_(config), vocab_(vocab), backbone_(backbone) {
  if (config.adapter != "none") {
    throw ConfigError("text generation adapter '" + config.adapter + "' is not available");
  }
  if (config.layers < 1 || config.decoder_layers < 1) throw ConfigError("textgen needs >= 1 layer");
  if (config.max_len < 1) throw ConfigError("textgen.max_len must be positive");
  piece_table_ = Matrix(vocab.size(), d_t);
  for (int id = 0; id < vocab.size(); ++id) {
    const Matrix e = backbone.EmbedPiece(vocab.Piece(id));
    for (int c = 0; c < d_t; ++c) piece_table_(id, c) = e(0, c);
  }
  for (int l = 0; l < config.layers; ++l) {
    encoder_.emplace_back(params, "textgen.enc." + std::to_string(l), config.variant, d_t,
                          config.heads, rng);
  }
  for (int l = 0; l < config.decoder_layers; ++l) {
    decoder_.emplace_back(params, "textgen.dec." + std::to_string(l), d_t, config.heads,
                          FfnHidden(d_t), rng);
  }
  output_ = Linear(params, "textgen.out", d_t, vocab.size(), rng);
}

ag::Var TextGenerator::Encode(const Matrix &z0, const ag::Var &p_v) const {
  ag::Var z = ag::Constant(z0);
  for (const auto &layer : encoder_) z = EncoderLayer(z, p_v, layer);
  return z;
}

Matrix TextGenerator::DecoderInputs(const std::vector<int> &prefix_ids) const {
  Matrix x(int(prefix_ids.size()) + 1, piece_table_.cols());
  auto copy_row = [&](int dst, int id) {
    for (int c = 0; c < x.cols(); ++c) x(dst, c) = piece_table_(id, c);
  };
  copy_row(0, TextVocab::kBegin);
  for (std::size_t i = 0; i < prefix_ids.size(); ++i) copy_row(int(i) + 1, prefix_ids[i]);
  return backbone_.AddPositional(x);
}

ag::Var TextGenerator::DecoderLogits(const ag::Var &memory, const std::vector<int> &prefix_ids) const {
  ag::Var h = ag::Constant(DecoderInputs(prefix_ids));
  for (const auto &block : decoder_) h = block(h, memory);
  return output_(h);
}

ag::Var TextGenerator::Loss(const Matrix &z0, const ag::Var &p_v,
                            const std::vector<int> &target_ids) const {
  ag::Var memory = Encode(z0, p_v);
  std::vector<int> expected = target_ids;
  expected.push_back(TextVocab::kEnd);
  return GenerationLoss(DecoderLogits(memory, target_ids), expected);
}

GenerationOutput TextGenerator::Generate(const Matrix &z0, const ag::Var &p_v) const {
  ag::NoGradGuard no_grad;
  ag::Var memory = Encode(z0, p_v);
  GenerationOutput out;
  std::vector<double> rows;
  for (int step = 0; step < config_.max_len; ++step) {
    const Matrix logits = DecoderLogits(memory, out.token_ids).value();
    const auto last = logits.row(logits.rows() - 1);
    rows.insert(rows.end(), last.begin(), last.end());
    const int next = int(std::max_element(last.begin(), last.end()) - last.begin());
    out.token_ids.push_back(next);
    if (next == TextVocab::kEnd) break;
  }
  out.logits = Matrix(int(out.token_ids.size()), vocab_.size(), std::move(rows));
  out.text = vocab_.Decode(out.token_ids);
  return out;
}

std::size_t TextGenerator::EncoderLayerParamCount(FusionVariant variant, int d_t) {
  const std::size_t dd = std::size_t(d_t) * d_t;
  const std::size_t fusion = variant == FusionVariant::kDotProduct ? dd + 2 * dd : 3 * dd + 2 * dd;
  return AttentionParamCount(d_t) + LinearParamCount(d_t, FfnHidden(d_t)) +
         LinearParamCount(FfnHidden(d_t), d_t) + fusion + 3 * 2 * std::size_t(d_t);
}

std::size_t TextGenerator::ParamCount(const TextGenConfig &config, int d_t, int vocab_size) {
  return config.layers * EncoderLayerParamCount(config.variant, d_t) +
         config.decoder_layers * DecoderBlockParamCount(d_t, FfnHidden(d_t)) +
         LinearParamCount(d_t, vocab_size);
}

}  // namespace memex
