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

#ifndef MEMEX_SEGMENTER_H_
#define MEMEX_SEGMENTER_H_

#include <vector>

#include "memex/backbone.h"
#include "memex/image.h"
#include "memex/layers.h"

namespace memex {

struct SegConfig {
  double threshold = 0.5;
  int blocks = 0;  // 0 means "same as backbone.layers"; otherwise must match it
  int heads = 8;
  bool modulation = true;
};

// Per-pixel mask logits, height×width.
using MaskLogits = Matrix;

// Bilinear resampling weights (half-pixel centres, edge clamped), out×in.
Matrix BilinearMatrix(int out_size, int in_size);

// pixel = 1 iff sigmoid(logit) > threshold. Throws ConfigError unless
// threshold ∈ (0, 1).
BinaryMask Binarize(const MaskLogits &logits, double threshold = 0.5);

// Mean per-pixel binary cross-entropy on sigmoid probabilities.
ag::Var SegmentationLoss(const ag::Var &logits, const BinaryMask &target);

// Transformer decoder mirrored against the visual encoder's layers. Block k
// consumes (x_{k-1} ⊙ sigmoid(P_t)) + skip_k(encoder layer L-k+1), with
// x_0 the deepest encoder state; a per-patch head and bilinear upsampling
// produce logits at the image resolution.
class Segmenter {
 public:
  Segmenter(ParameterSet &params, const SegConfig &config, const BackboneConfig &backbone, Rng &rng);

  // p_t may be undefined when modulation is off.
  ag::Var Logits(const LayerStack &encoder, const ag::Var &p_t, int width, int height) const;

  const SegConfig &config() const { return config_; }
  int block_count() const { return int(blocks_.size()); }

  static std::size_t ParamCount(const SegConfig &config, const BackboneConfig &backbone);

 private:
  SegConfig config_;
  int patch_rows_;
  int patch_cols_;
  std::vector<Linear> skips_;
  std::vector<TransformerBlock> blocks_;
  Linear head_;
};

}  // namespace memex

#endif  // MEMEX_SEGMENTER_H_
