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

#ifndef MEMEX_BACKBONE_H_
#define MEMEX_BACKBONE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "memex/image.h"
#include "memex/matrix.h"

namespace memex {

inline constexpr int kClipDim = 512;
// Alignment value for positions that do not come from a word (end marker).
inline constexpr int kSpecialPosition = -1;
inline constexpr const char *kEndToken = "</s>";
inline constexpr const char *kBeginToken = "<s>";
inline constexpr const char *kUnknownToken = "<unk>";

// Global CLIP-style embeddings of a meme; each a 1×512 row.
struct ClipFeatures {
  Matrix c_image;
  Matrix c_text;
};

// Length×dim feature sequence (token embeddings, patch features, ...).
using EmbeddingSeq = Matrix;

// One hidden state per visual encoder layer, all P×d_t.
struct LayerStack {
  std::vector<EmbeddingSeq> layers;
  int layer_count() const { return int(layers.size()); }
};

struct TokenEmbedding {
  EmbeddingSeq sequence;
  std::vector<std::string> pieces;
  // pieces[i] came from word alignment[i], or kSpecialPosition.
  std::vector<int> alignment;
};

struct BackboneConfig {
  std::string kind = "toy";  // "toy" or a registered adapter id
  int d_t = 64;
  int patch_rows = 4;
  int patch_cols = 4;
  int layer_count = 3;
  int max_positions = 512;
  std::uint64_t seed = 0;
  // Optional closed vocabulary; out-of-vocabulary words embed as <unk>.
  std::vector<std::string> vocabulary;

  int patch_count() const { return patch_rows * patch_cols; }
  void Validate() const;
};

// Encoder substrate. Implementations must be immutable after construction;
// adapters around stateful runtimes report reentrant() == false and are
// wrapped by MakeBackbone so that calls are serialized.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual const BackboneConfig &config() const = 0;
  virtual bool reentrant() const { return true; }

  virtual ClipFeatures EncodeGlobal(const ImageTensor &image, const std::string &text) const = 0;
  // Words in order followed by one end marker.
  virtual TokenEmbedding EmbedTokens(const std::string &text) const = 0;
  // Embedding of a single word or special token; used on the decoder side.
  virtual Matrix EmbedPiece(const std::string &piece) const = 0;
  virtual EmbeddingSeq AddPositional(const EmbeddingSeq &seq) const = 0;
  virtual LayerStack EncodePatches(const ImageTensor &image) const = 0;
};

// Deterministic, dependency-free backbone. Word embeddings are seeded hashes
// of the word; patch features are a seeded random-feature map of each patch's
// mean colour followed by fixed residual layers (the first one patch-local);
// global features are fixed projections of pooled states.
class ToyBackbone : public Backbone {
 public:
  explicit ToyBackbone(BackboneConfig config);

  const BackboneConfig &config() const override { return config_; }
  ClipFeatures EncodeGlobal(const ImageTensor &image, const std::string &text) const override;
  TokenEmbedding EmbedTokens(const std::string &text) const override;
  Matrix EmbedPiece(const std::string &piece) const override;
  EmbeddingSeq AddPositional(const EmbeddingSeq &seq) const override;
  LayerStack EncodePatches(const ImageTensor &image) const override;

  const Matrix &positional_table() const { return positional_; }

 private:
  Matrix PatchMeans(const ImageTensor &image) const;

  BackboneConfig config_;
  std::unordered_map<std::string, int> vocab_;
  Matrix positional_;
  Matrix color_freq_;   // 3×d_t
  Matrix color_phase_;  // 1×d_t
  std::vector<Matrix> layer_local_;   // d_t×d_t per layer
  std::vector<Matrix> layer_global_;  // d_t×d_t per layer (unused for layer 1)
  std::vector<Matrix> layer_bias_;    // 1×d_t per layer
  Matrix image_proj_;                 // d_t×512
  Matrix text_proj_;                  // d_t×512
};

// Serializes every call into a non-reentrant backbone.
class SerializedBackbone : public Backbone {
 public:
  explicit SerializedBackbone(std::unique_ptr<Backbone> inner) : inner_(std::move(inner)) {}

  const BackboneConfig &config() const override { return inner_->config(); }
  ClipFeatures EncodeGlobal(const ImageTensor &image, const std::string &text) const override;
  TokenEmbedding EmbedTokens(const std::string &text) const override;
  Matrix EmbedPiece(const std::string &piece) const override;
  EmbeddingSeq AddPositional(const EmbeddingSeq &seq) const override;
  LayerStack EncodePatches(const ImageTensor &image) const override;

 private:
  std::unique_ptr<Backbone> inner_;
  mutable std::mutex mu_;
};

using BackboneFactory = std::function<std::unique_ptr<Backbone>(const BackboneConfig &)>;

// Pretrained encoders (CLIP, multilingual BERT, ViT, BART/T5) plug in here
// under an id. Nothing is registered by default besides "toy".
void RegisterBackboneAdapter(const std::string &id, BackboneFactory factory);
bool HasBackboneAdapter(const std::string &id);

// Throws ConfigError when config.kind names no registered adapter.
std::shared_ptr<const Backbone> MakeBackbone(const BackboneConfig &config);

// Sinusoidal table, rows = positions.
Matrix SinusoidalTable(int positions, int dim);

}  // namespace memex

#endif  // MEMEX_BACKBONE_H_
