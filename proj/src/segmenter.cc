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

#include "memex/segmenter.h"

#include <algorithm>
#include <cmath>

#include "memex/errors.h"

namespace memex {
namespace {

int FfnHidden(int d_t) { return 2 * d_t; }

}  // namespace

Matrix BilinearMatrix(int out_size, int in_size) {
  Matrix m(out_size, in_size);
  const double scale = double(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    const double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, double(in_size - 1));
    const int i0 = int(std::floor(src));
    const int i1 = std::min(i0 + 1, in_size - 1);
    const double w1 = src - i0;
    m(o, i0) += 1.0 - w1;
    m(o, i1) += w1;
  }
  return m;
}

BinaryMask Binarize(const MaskLogits &logits, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  BinaryMask mask(logits.cols(), logits.rows());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    mask.set(i, ag::StableSigmoid(logits[i]) > threshold);
  }
  return mask;
}

ag::Var SegmentationLoss(const ag::Var &logits, const BinaryMask &target) {
  if (logits.cols() != target.width() || logits.rows() != target.height()) {
    throw ShapeError("segmentation loss: logits and mask shapes differ");
  }
  Matrix t(target.height(), target.width());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = target[i];
  return ag::BceWithLogits(logits, t);
}

Segmenter::Segmenter(ParameterSet &params, const SegConfig &config, const BackboneConfig &backbone,
                     Rng &rng)
    : config_(config), patch_rows_(backbone.patch_rows), patch_cols_(backbone.patch_cols) {
  if (config_.blocks == 0) config_.blocks = backbone.layer_count;
  if (config_.blocks != backbone.layer_count) {
    throw ConfigError("seg.blocks (" + std::to_string(config_.blocks) +
                      ") must equal backbone.layers (" + std::to_string(backbone.layer_count) + ")");
  }
  if (!(config_.threshold > 0.0 && config_.threshold < 1.0)) {
    throw ConfigError("seg.threshold must lie in (0, 1)");
  }
  const int d = backbone.d_t;
  for (int l = 0; l < config_.blocks; ++l) {
    skips_.emplace_back(params, "seg.skip." + std::to_string(l), d, d, rng);
  }
  for (int l = 0; l < config_.blocks; ++l) {
    blocks_.emplace_back(params, "seg.block." + std::to_string(l), d, config_.heads, FfnHidden(d),
                         rng);
  }
  head_ = Linear(params, "seg.head", d, 1, rng);
}

ag::Var Segmenter::Logits(const LayerStack &encoder, const ag::Var &p_t, int width,
                          int height) const {
  const int layers = encoder.layer_count();
  if (layers != int(blocks_.size())) {
    throw ShapeError("segmenter has " + std::to_string(blocks_.size()) +
                     " blocks but the encoder produced " + std::to_string(layers) + " layers");
  }
  ag::Var modulation;
  if (config_.modulation) {
    if (!p_t.defined()) throw ShapeError("text modulation enabled but no projected text vector");
    modulation = ag::Sigmoid(p_t);
  }
  ag::Var x = ag::Constant(encoder.layers.back());
  for (int k = 0; k < layers; ++k) {
    // Skip k pairs the k-th decoder block with encoder layer L-k (0-based).
    ag::Var skip = skips_[k](ag::Constant(encoder.layers[layers - 1 - k]));
    if (modulation.defined()) x = ag::MulRow(x, modulation);
    x = blocks_[k](x + skip);
  }
  ag::Var grid = ag::Reshape(head_(x), patch_rows_, patch_cols_);
  ag::Var up_rows = ag::Constant(BilinearMatrix(height, patch_rows_));
  ag::Var up_cols = ag::Constant(BilinearMatrix(width, patch_cols_));
  return ag::MatMulNT(ag::MatMul(up_rows, grid), up_cols);
}

std::size_t Segmenter::ParamCount(const SegConfig &config, const BackboneConfig &backbone) {
  const int blocks = config.blocks == 0 ? backbone.layer_count : config.blocks;
  const int d = backbone.d_t;
  return blocks * (LinearParamCount(d, d) + TransformerBlockParamCount(d, FfnHidden(d))) +
         LinearParamCount(d, 1);
}

}  // namespace memex
