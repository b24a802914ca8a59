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

#include "memex/render.h"

#include <algorithm>
#include <cmath>

#include "memex/errors.h"

namespace memex {
namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kAmber{1.0, 0.72, 0.1};
constexpr Rgb kGreen{0.1, 0.8, 0.2};
constexpr Rgb kRed{0.9, 0.15, 0.15};
constexpr Rgb kGray{0.55, 0.55, 0.55};
constexpr Rgb kStrip{0.12, 0.12, 0.12};
constexpr double kTint = 0.45;
constexpr int kMinWidth = 128;
constexpr int kBlockHeight = 8;
constexpr int kGap = 3;
constexpr int kCharWidth = 4;

std::uint8_t Byte(double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

void Put(RgbImage &img, int x, int y, Rgb c) {
  const std::size_t i = (std::size_t(y) * img.width + x) * 3;
  img.rgb[i] = Byte(c.r);
  img.rgb[i + 1] = Byte(c.g);
  img.rgb[i + 2] = Byte(c.b);
}

// Tint for one pixel, or nullptr when it stays untouched.
const Rgb *PixelTint(bool pred, const BinaryMask *gold, int y, int x) {
  if (!gold) return pred ? &kAmber : nullptr;
  const bool g = gold->at(y, x) != 0;
  if (pred && g) return &kGreen;
  if (pred != g) return &kRed;
  return nullptr;
}

Rgb TokenColor(bool pred, const std::vector<std::uint8_t> *gold, std::size_t i) {
  if (!gold) return pred ? kAmber : kGray;
  const bool g = (*gold)[i] != 0;
  if (pred && g) return kGreen;
  if (pred != g) return kRed;
  return kGray;
}

}  // namespace

std::vector<std::uint8_t> RationaleFlags(const std::vector<std::string> &tokens,
                                         const std::vector<std::string> &generated) {
  std::vector<std::uint8_t> flags(tokens.size(), 0);
  std::vector<std::string> leftover;
  std::size_t t = 0;
  for (const auto &w : generated) {
    std::size_t k = t;
    while (k < tokens.size() && tokens[k] != w) ++k;
    if (k < tokens.size()) {
      flags[k] = 1;
      t = k + 1;
    } else {
      leftover.push_back(w);
    }
  }
  for (const auto &w : leftover) {
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (!flags[k] && tokens[k] == w) {
        flags[k] = 1;
        break;
      }
    }
  }
  return flags;
}

RgbImage RenderOverlay(const OverlayInput &in) {
  if (!in.image || !in.predicted_mask) throw std::invalid_argument("RenderOverlay: image and mask required");
  const ImageTensor &image = *in.image;
  const BinaryMask &pred = *in.predicted_mask;
  if (pred.width() != image.width() || pred.height() != image.height()) {
    throw ShapeError("RenderOverlay: mask does not match the image");
  }
  if (in.gold_mask && !in.gold_mask->SameShape(pred)) throw ShapeError("RenderOverlay: gold mask shape");
  if (!in.predicted_rationale.empty() && in.predicted_rationale.size() != in.tokens.size()) {
    throw ShapeError("RenderOverlay: rationale flags do not match tokens");
  }
  if (in.gold_rationale && in.gold_rationale->size() != in.tokens.size()) {
    throw ShapeError("RenderOverlay: gold rationale does not match tokens");
  }

  const int scale = std::max(1, (kMinWidth + image.width() - 1) / image.width());
  RgbImage out;
  out.width = image.width() * scale;

  // Lay out token blocks in rows before sizing the strip.
  struct Block {
    int x, row, w;
  };
  std::vector<Block> blocks;
  int x = kGap, row = 0;
  for (const auto &tok : in.tokens) {
    const int w = std::min(out.width - 2 * kGap, std::max(kCharWidth, kCharWidth * int(tok.size())));
    if (x + w + kGap > out.width && x > kGap) {
      x = kGap;
      ++row;
    }
    blocks.push_back({x, row, w});
    x += w + kGap;
  }
  const int rows = in.tokens.empty() ? 0 : row + 1;
  const int strip = kGap + rows * (kBlockHeight + kGap);
  const int image_h = image.height() * scale;
  out.height = image_h + strip;
  out.rgb.assign(std::size_t(out.width) * out.height * 3, 0);

  for (int y = 0; y < image_h; ++y) {
    for (int xx = 0; xx < out.width; ++xx) {
      const int sy = y / scale, sx = xx / scale;
      Rgb c{image.at(0, sy, sx), image.at(1, sy, sx), image.at(2, sy, sx)};
      if (const Rgb *t = PixelTint(pred.at(sy, sx) != 0, in.gold_mask, sy, sx)) {
        c = {c.r * (1 - kTint) + t->r * kTint, c.g * (1 - kTint) + t->g * kTint,
             c.b * (1 - kTint) + t->b * kTint};
      }
      Put(out, xx, y, c);
    }
  }
  for (int y = image_h; y < out.height; ++y) {
    for (int xx = 0; xx < out.width; ++xx) Put(out, xx, y, kStrip);
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const bool p = !in.predicted_rationale.empty() && in.predicted_rationale[i] != 0;
    const Rgb c = TokenColor(p, in.gold_rationale, i);
    const int top = image_h + kGap + blocks[i].row * (kBlockHeight + kGap);
    for (int y = top; y < top + kBlockHeight; ++y) {
      for (int xx = blocks[i].x; xx < blocks[i].x + blocks[i].w; ++xx) Put(out, xx, y, c);
    }
  }
  return out;
}

}  // namespace memex
