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

#ifndef MEMEX_TEXTGEN_H_
#define MEMEX_TEXTGEN_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "memex/backbone.h"
#include "memex/layers.h"

namespace memex {

// Text-vision fusion variants: A1 is dot-product attention fusion, A2 is
// multi-head cross-modal attention fusion.
enum class FusionVariant { kDotProduct, kMultiHead };

const char *FusionVariantName(FusionVariant v);  // "A1" / "A2"
FusionVariant ParseFusionVariant(const std::string &name);

struct FusionLayerParams {
  FusionLayerParams() = default;
  FusionLayerParams(ParameterSet &params, const std::string &prefix, FusionVariant variant, int d_t,
                    int d_v, int heads, Rng &rng);

  FusionVariant variant = FusionVariant::kMultiHead;
  int heads = 1;
  // A1
  ag::Var w1;  // d_v×d_t
  ag::Var w2;  // (d_t+d_v)×d_t
  // A2
  ag::Var wq;  // d_t×d_t
  ag::Var wk;  // d_v×d_t
  ag::Var wv;  // d_v×d_t
  ag::Var w3;  // 2·d_t×d_t
};

struct FusionResult {
  ag::Var output;                  // N×d_t
  std::vector<Matrix> attention;   // one N×M matrix per head
};

// Z'_v = Z_v·W1; A = softmax(Z_t·Z'_vᵀ); out = [Z_t, A·Z_v]·W2.
FusionResult TvfDot(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params);
// Q = Z_t·Wq, K = Z_v·Wk, V = Z_v·Wv; O = per-head softmax(QKᵀ/√d_head)·V;
// out = [Z_t, O]·W3.
FusionResult TvfMultiHead(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params);
FusionResult Tvf(const ag::Var &z_t, const ag::Var &z_v, const FusionLayerParams &params);

// Vision-aware encoder layer: MSA, FNN and TVF sublayers, each followed by a
// residual connection and layer normalization.
struct EncoderLayerParams {
  EncoderLayerParams() = default;
  EncoderLayerParams(ParameterSet &params, const std::string &prefix, FusionVariant variant,
                     int d_t, int heads, Rng &rng);

  MultiHeadAttention msa;
  LayerNormLayer ln1;
  FeedForward fnn;
  LayerNormLayer ln2;
  FusionLayerParams tvf;
  LayerNormLayer ln3;
};

ag::Var EncoderLayer(const ag::Var &z, const ag::Var &p_v, const EncoderLayerParams &params);

struct TextGenConfig {
  FusionVariant variant = FusionVariant::kMultiHead;
  int layers = 2;
  int heads = 8;
  int decoder_layers = 2;
  int max_len = 64;
  std::string adapter = "none";
};

// Output vocabulary: <s>, </s>, <unk>, then words in sorted order.
class TextVocab {
 public:
  static constexpr int kBegin = 0;
  static constexpr int kEnd = 1;
  static constexpr int kUnknown = 2;

  TextVocab();
  explicit TextVocab(const std::vector<std::string> &words);

  int size() const { return int(pieces_.size()); }
  int Id(const std::string &piece) const;
  const std::string &Piece(int id) const { return pieces_.at(id); }
  const std::vector<std::string> &pieces() const { return pieces_; }
  std::vector<int> Encode(const std::vector<std::string> &words) const;
  // Drops special ids.
  std::string Decode(const std::vector<int> &ids) const;

  bool operator==(const TextVocab &o) const { return pieces_ == o.pieces_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
};

struct GenerationOutput {
  std::vector<int> token_ids;  // includes the end id when one was emitted
  std::string text;
  Matrix logits;               // steps×vocab
};

// Mean token cross-entropy.
ag::Var GenerationLoss(const ag::Var &logits, std::span<const int> target_ids);

// Encoder stack + toy transformer decoder. Decoder inputs use the backbone's
// frozen piece embeddings.
class TextGenerator {
 public:
  TextGenerator(ParameterSet &params, const TextGenConfig &config, int d_t, const TextVocab &vocab,
                const Backbone &backbone, Rng &rng);

  // z0: N×d_t token embeddings with positions; p_v: M×d_t.
  ag::Var Encode(const Matrix &z0, const ag::Var &p_v) const;
  // Teacher-forced logits for inputs [<s>, ids...].
  ag::Var DecoderLogits(const ag::Var &memory, const std::vector<int> &prefix_ids) const;
  // Cross-entropy of predicting target_ids followed by </s>.
  ag::Var Loss(const Matrix &z0, const ag::Var &p_v, const std::vector<int> &target_ids) const;
  // Greedy decoding until </s> or max_len steps.
  GenerationOutput Generate(const Matrix &z0, const ag::Var &p_v) const;

  const Linear &output_layer() const { return output_; }
  const TextGenConfig &config() const { return config_; }

  static std::size_t EncoderLayerParamCount(FusionVariant variant, int d_t);
  static std::size_t ParamCount(const TextGenConfig &config, int d_t, int vocab_size);

 private:
  Matrix DecoderInputs(const std::vector<int> &prefix_ids) const;

  TextGenConfig config_;
  const TextVocab &vocab_;
  const Backbone &backbone_;
  Matrix piece_table_;  // vocab×d_t, frozen
  std::vector<EncoderLayerParams> encoder_;
  std::vector<TransformerDecoderBlock> decoder_;
  Linear output_;
};

}  // namespace memex

#endif  // MEMEX_TEXTGEN_H_
