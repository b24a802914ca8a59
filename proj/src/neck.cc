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

#include "memex/neck.h"

#include "memex/errors.h"

namespace memex {
namespace {

constexpr double kRwInitStd = 0.02;

int FfnHidden(int d_t) { return 2 * d_t; }

}  // namespace

Matrix JointFeatures(const ClipFeatures &clip) {
  if (clip.c_image.size() != kClipDim || clip.c_text.size() != kClipDim) {
    throw ShapeError("CLIP features must be 512-dimensional");
  }
  Matrix joint(1, kJointDim);
  for (int i = 0; i < kClipDim; ++i) {
    joint(0, i) = clip.c_image[i];
    joint(0, kClipDim + i) = clip.c_text[i];
  }
  return joint;
}

GateParams::GateParams(ParameterSet &params, const std::string &prefix, Rng &rng)
    : proj(params, prefix, kJointDim, kClipDim, rng) {}

ag::Var ApplyGate(const ag::Var &joint, const GateParams &gate) {
  if (joint.rows() != 1 || joint.cols() != kJointDim) throw ShapeError("gate input must be 1x1024");
  return ag::Sigmoid(gate.proj(joint));
}

GvpParams::GvpParams(ParameterSet &params, const std::string &prefix, const NeckConfig &config,
                     int d_t, Rng &rng)
    : input_proj(params, prefix + ".in", kClipDim, d_t, rng) {
  if (config.projected_length < 1) throw ConfigError("neck.M must be at least 1");
  if (config.layers < 1) throw ConfigError("neck.layers must be at least 1");
  rw = params.Add(prefix + ".rw", rng.NormalMatrix(config.projected_length, d_t, kRwInitStd));
  for (int l = 0; l < config.layers; ++l) {
    layers.emplace_back(params, prefix + ".layer." + std::to_string(l), d_t, config.heads,
                        FfnHidden(d_t), rng);
  }
}

GtpParams::GtpParams(ParameterSet &params, const std::string &prefix, int d_t, Rng &rng)
    : hidden(params, prefix + ".hidden", kJointDim, d_t, rng),
      out(params, prefix + ".out", d_t, d_t, rng) {}

ag::Var GatedVisualProjection(const ag::Var &joint, const GvpParams &gvp,
                              const GateParams *visual_gate) {
  ag::Var visual = ag::SliceCols(joint, 0, kClipDim);
  if (visual_gate != nullptr) visual = ag::Mul(ApplyGate(joint, *visual_gate), visual);
  const ag::Var tokens[] = {gvp.input_proj(visual), gvp.rw};
  ag::Var seq = ag::ConcatRows(tokens);
  for (const auto &layer : gvp.layers) seq = layer(seq);
  return ag::SliceRows(seq, 1, gvp.rw.rows());
}

ag::Var GatedTextualProjection(const ag::Var &joint, const GtpParams &gtp,
                               const GateParams *visual_gate, const GateParams *textual_gate) {
  ag::Var input = joint;
  if (visual_gate != nullptr || textual_gate != nullptr) {
    ag::Var visual = ag::SliceCols(joint, 0, kClipDim);
    ag::Var textual = ag::SliceCols(joint, kClipDim, kClipDim);
    if (visual_gate != nullptr) visual = ag::Mul(ApplyGate(joint, *visual_gate), visual);
    if (textual_gate != nullptr) textual = ag::Mul(ApplyGate(joint, *textual_gate), textual);
    const ag::Var parts[] = {visual, textual};
    input = ag::ConcatCols(parts);
  }
  return gtp.out(ag::Gelu(gtp.hidden(input)));
}

Neck::Neck(ParameterSet &params, const NeckConfig &config, int d_t, bool gated, bool with_gvp,
           bool with_gtp, Rng &rng) {
  if (gated) {
    if (with_gvp || with_gtp) visual_gate_.emplace(params, "neck.gate_v", rng);
    if (with_gtp) textual_gate_.emplace(params, "neck.gate_t", rng);
  }
  if (with_gvp) gvp_.emplace(params, "neck.gvp", config, d_t, rng);
  if (with_gtp) gtp_.emplace(params, "neck.gtp", d_t, rng);
}

ag::Var Neck::VisualProjection(const ag::Var &joint) const {
  if (!gvp_) throw ConfigError("this model has no gated visual projection");
  return GatedVisualProjection(joint, *gvp_, visual_gate());
}

ag::Var Neck::TextualProjection(const ag::Var &joint) const {
  if (!gtp_) throw ConfigError("this model has no gated textual projection");
  return GatedTextualProjection(joint, *gtp_, visual_gate(), textual_gate());
}

std::size_t Neck::GateParamCount() { return LinearParamCount(kJointDim, kClipDim); }

std::size_t Neck::GvpParamCount(const NeckConfig &config, int d_t) {
  return LinearParamCount(kClipDim, d_t) + std::size_t(config.projected_length) * d_t +
         config.layers * TransformerBlockParamCount(d_t, FfnHidden(d_t));
}

std::size_t Neck::GtpParamCount(int d_t) {
  return LinearParamCount(kJointDim, d_t) + LinearParamCount(d_t, d_t);
}

}  // namespace memex
