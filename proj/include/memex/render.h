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

#ifndef MEMEX_RENDER_H_
#define MEMEX_RENDER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "memex/image.h"

namespace memex {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

// Marks the tokens a generated rationale refers to: generated words are
// matched to meme tokens left to right as a subsequence, and any word left
// over marks the first unmarked occurrence of that token.
std::vector<std::uint8_t> RationaleFlags(const std::vector<std::string> &tokens,
                                         const std::vector<std::string> &generated);

struct OverlayInput {
  const ImageTensor *image = nullptr;
  const BinaryMask *predicted_mask = nullptr;
  const BinaryMask *gold_mask = nullptr;  // optional
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> predicted_rationale;    // per token; may be empty
  const std::vector<std::uint8_t> *gold_rationale = nullptr;  // optional
};

// Image with the predicted region tinted, above a strip with one block per
// token. Without gold data the prediction is tinted amber; with gold data
// agreement is green and disagreement red.
RgbImage RenderOverlay(const OverlayInput &input);

}  // namespace memex

#endif  // MEMEX_RENDER_H_
