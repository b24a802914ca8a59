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

#include "memex/backbone.h"

#include <cmath>
#include <numbers>

#include "memex/corpus.h"
#include "memex/errors.h"
#include "memex/kernels.h"
#include "memex/random.h"

namespace memex {
namespace {

constexpr double kColorScale = 6.0;

std::mutex &RegistryMutex() {
  static std::mutex mu;
  return mu;
}

std::unordered_map<std::string, BackboneFactory> &Registry() {
  static std::unordered_map<std::string, BackboneFactory> registry;
  return registry;
}

void AddRowInPlace(Matrix &x, const Matrix &row) {
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) x(r, c) += row(0, c);
}

Matrix ColumnMean(const Matrix &x) {
  Matrix m(1, x.cols());
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) m(0, c) += x(r, c);
  for (int c = 0; c < x.cols(); ++c) m(0, c) /= std::max(1, x.rows());
  return m;
}

Matrix TanhOf(Matrix x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::tanh(x[i]);
  return x;
}

}  // namespace

void BackboneConfig::Validate() const {
  if (d_t <= 0) throw ConfigError("backbone.d_t must be positive");
  if (patch_rows < 1 || patch_cols < 1) throw ConfigError("backbone patch grid must be at least 1x1");
  if (layer_count < 1) throw ConfigError("backbone.layers must be at least 1");
  if (max_positions < 1) throw ConfigError("backbone.max_positions must be positive");
}

Matrix SinusoidalTable(int positions, int dim) {
  Matrix table(positions, dim);
  for (int pos = 0; pos < positions; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -double(2 * (i / 2)) / dim);
      table(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return table;
}

ToyBackbone::ToyBackbone(BackboneConfig config) : config_(std::move(config)) {
  config_.Validate();
  const int d = config_.d_t;
  for (std::size_t i = 0; i < config_.vocabulary.size(); ++i) vocab_[config_.vocabulary[i]] = int(i);
  positional_ = SinusoidalTable(config_.max_positions, d);

  Rng rng(Mix64(config_.seed ^ 0x746f79ULL));
  color_freq_ = rng.NormalMatrix(3, d, kColorScale);
  color_phase_ = Matrix(1, d);
  for (int c = 0; c < d; ++c) color_phase_(0, c) = 2.0 * std::numbers::pi * rng.Uniform();
  const double scale = 1.0 / std::sqrt(double(d));
  for (int l = 0; l < config_.layer_count; ++l) {
    layer_local_.push_back(rng.NormalMatrix(d, d, scale));
    layer_global_.push_back(l == 0 ? Matrix(d, d) : rng.NormalMatrix(d, d, scale));
    layer_bias_.push_back(rng.NormalMatrix(1, d, 0.1));
  }
  image_proj_ = rng.NormalMatrix(d, kClipDim, scale);
  text_proj_ = rng.NormalMatrix(d, kClipDim, scale);
}

Matrix ToyBackbone::EmbedPiece(const std::string &piece) const {
  const std::string &key =
      (!vocab_.empty() && piece != kEndToken && piece != kBeginToken && !vocab_.contains(piece))
          ? std::string(kUnknownToken)
          : piece;
  Rng rng(HashString(key, config_.seed));
  return rng.NormalMatrix(1, config_.d_t, 1.0);
}

TokenEmbedding ToyBackbone::EmbedTokens(const std::string &text) const {
  TokenEmbedding out;
  const auto words = SplitWhitespace(text);
  out.sequence = Matrix(int(words.size()) + 1, config_.d_t);
  for (std::size_t i = 0; i <= words.size(); ++i) {
    const bool special = i == words.size();
    const std::string piece = special ? std::string(kEndToken) : words[i];
    const Matrix e = EmbedPiece(piece);
    for (int c = 0; c < config_.d_t; ++c) out.sequence(int(i), c) = e(0, c);
    out.pieces.push_back(piece);
    out.alignment.push_back(special ? kSpecialPosition : int(i));
  }
  return out;
}

EmbeddingSeq ToyBackbone::AddPositional(const EmbeddingSeq &seq) const {
  if (seq.cols() != config_.d_t) throw ShapeError("AddPositional: width does not match d_t");
  if (seq.rows() > positional_.rows()) {
    throw ShapeError("sequence length " + std::to_string(seq.rows()) +
                     " exceeds positional capacity " + std::to_string(positional_.rows()));
  }
  EmbeddingSeq out = seq;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) += positional_(r, c);
  return out;
}

Matrix ToyBackbone::PatchMeans(const ImageTensor &image) const {
  const int rows = config_.patch_rows, cols = config_.patch_cols;
  if (image.width() < cols || image.height() < rows) {
    throw DataError("image " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " is smaller than the patch grid");
  }
  Matrix means(rows * cols, 3);
  for (int pr = 0; pr < rows; ++pr) {
    const int y0 = pr * image.height() / rows, y1 = (pr + 1) * image.height() / rows;
    for (int pc = 0; pc < cols; ++pc) {
      const int x0 = pc * image.width() / cols, x1 = (pc + 1) * image.width() / cols;
      const double count = double(y1 - y0) * (x1 - x0);
      for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) s += image.at(ch, y, x);
        means(pr * cols + pc, ch) = s / count - 0.5;
      }
    }
  }
  return means;
}

LayerStack ToyBackbone::EncodePatches(const ImageTensor &image) const {
  Matrix h = kernels::MatMul(PatchMeans(image), color_freq_);
  AddRowInPlace(h, color_phase_);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::sin(h[i]);
  h = AddPositional(h);

  LayerStack stack;
  for (int l = 0; l < config_.layer_count; ++l) {
    Matrix pre = kernels::MatMul(h, layer_local_[l]);
    if (l > 0) {
      const Matrix pooled = kernels::MatMul(ColumnMean(h), layer_global_[l]);
      AddRowInPlace(pre, pooled);
    }
    AddRowInPlace(pre, layer_bias_[l]);
    pre = TanhOf(std::move(pre));
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += pre[i];
    Matrix inv_std;
    h = kernels::NormalizeRows(h, 1e-5, inv_std);
    stack.layers.push_back(h);
  }
  return stack;
}

ClipFeatures ToyBackbone::EncodeGlobal(const ImageTensor &image, const std::string &text) const {
  ClipFeatures out;
  const LayerStack stack = EncodePatches(image);
  out.c_image = TanhOf(kernels::MatMul(ColumnMean(stack.layers.back()), image_proj_));
  const TokenEmbedding tokens = EmbedTokens(text);
  Matrix pooled(1, config_.d_t);
  const int words = tokens.sequence.rows() - 1;
  for (int r = 0; r < words; ++r)
    for (int c = 0; c < config_.d_t; ++c) pooled(0, c) += tokens.sequence(r, c) / words;
  out.c_text = TanhOf(kernels::MatMul(pooled, text_proj_));
  return out;
}

ClipFeatures SerializedBackbone::EncodeGlobal(const ImageTensor &image,
                                              const std::string &text) const {
  std::lock_guard lock(mu_);
  return inner_->EncodeGlobal(image, text);
}

TokenEmbedding SerializedBackbone::EmbedTokens(const std::string &text) const {
  std::lock_guard lock(mu_);
  return inner_->EmbedTokens(text);
}

Matrix SerializedBackbone::EmbedPiece(const std::string &piece) const {
  std::lock_guard lock(mu_);
  return inner_->EmbedPiece(piece);
}

EmbeddingSeq SerializedBackbone::AddPositional(const EmbeddingSeq &seq) const {
  std::lock_guard lock(mu_);
  return inner_->AddPositional(seq);
}

LayerStack SerializedBackbone::EncodePatches(const ImageTensor &image) const {
  std::lock_guard lock(mu_);
  return inner_->EncodePatches(image);
}

void RegisterBackboneAdapter(const std::string &id, BackboneFactory factory) {
  std::lock_guard lock(RegistryMutex());
  Registry()[id] = std::move(factory);
}

bool HasBackboneAdapter(const std::string &id) {
  std::lock_guard lock(RegistryMutex());
  return id == "toy" || Registry().contains(id);
}

std::shared_ptr<const Backbone> MakeBackbone(const BackboneConfig &config) {
  if (config.kind == "toy") return std::make_shared<ToyBackbone>(config);
  BackboneFactory factory;
  {
    std::lock_guard lock(RegistryMutex());
    auto it = Registry().find(config.kind);
    if (it == Registry().end()) {
      throw ConfigError("backbone adapter '" + config.kind + "' is not available");
    }
    factory = it->second;
  }
  std::unique_ptr<Backbone> backbone = factory(config);
  if (!backbone) throw ConfigError("backbone adapter '" + config.kind + "' failed to load");
  if (!backbone->reentrant()) return std::make_shared<SerializedBackbone>(std::move(backbone));
  return backbone;
}

}  // namespace memex
