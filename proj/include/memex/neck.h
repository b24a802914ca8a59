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

#ifndef MEMEX_NECK_H_
#define MEMEX_NECK_H_

#include <optional>
#include <string>
#include <vector>

#include "memex/backbone.h"
#include "memex/layers.h"

namespace memex {

inline constexpr int kJointDim = 2 * kClipDim;

// [c_image ; c_text] as a 1×1024 row.
Matrix JointFeatures(const ClipFeatures &clip);

// g = sigmoid(joint·W + b), one gate value per dimension of the gated
// modality's 512-dim slice.
struct GateParams {
  GateParams() = default;
  GateParams(ParameterSet &params, const std::string &prefix, Rng &rng);
  Linear proj;  // 1024 → 512
};

ag::Var ApplyGate(const ag::Var &joint, const GateParams &gate);

struct NeckConfig {
  int projected_length = 16;  // M
  int layers = 2;
  int heads = 8;
  // Unset means "gated iff multitask".
  std::optional<bool> gate;
};

// Learnable query tokens plus a small transformer. The (gated) visual feature
// is projected to one d_t token, prepended to the M query rows, and only the
// query rows are emitted.
struct GvpParams {
  GvpParams() = default;
  GvpParams(ParameterSet &params, const std::string &prefix, const NeckConfig &config, int d_t,
            Rng &rng);

  Linear input_proj;  // 512 → d_t
  ag::Var rw;         // M×d_t
  std::vector<TransformerBlock> layers;
};

// 1024 → d_t → d_t feed-forward projection into the segmentation decoder.
struct GtpParams {
  GtpParams() = default;
  GtpParams(ParameterSet &params, const std::string &prefix, int d_t, Rng &rng);

  Linear hidden;
  Linear out;
};

// P_v = GVP(C_I, C_T), M×d_t. Without a gate the raw visual slice is used.
ag::Var GatedVisualProjection(const ag::Var &joint, const GvpParams &gvp,
                              const GateParams *visual_gate);

// P_t, 1×d_t. The projection consumes [g_v ⊙ C_I ; g_t ⊙ C_T]; with gates
// absent it consumes the raw joint vector.
ag::Var GatedTextualProjection(const ag::Var &joint, const GtpParams &gtp,
                               const GateParams *visual_gate, const GateParams *textual_gate);

// The shared cross-modal neck. Which pieces exist depends on the training
// mode: GVP only for text, GTP only for vision, both (plus gates) for
// multitask.
class Neck {
 public:
  Neck(ParameterSet &params, const NeckConfig &config, int d_t, bool gated, bool with_gvp,
       bool with_gtp, Rng &rng);

  ag::Var VisualProjection(const ag::Var &joint) const;
  ag::Var TextualProjection(const ag::Var &joint) const;

  bool gated() const { return visual_gate_.has_value(); }
  bool has_gvp() const { return gvp_.has_value(); }
  bool has_gtp() const { return gtp_.has_value(); }
  const GateParams *visual_gate() const { return visual_gate_ ? &*visual_gate_ : nullptr; }
  const GateParams *textual_gate() const { return textual_gate_ ? &*textual_gate_ : nullptr; }
  const GvpParams &gvp() const { return *gvp_; }
  const GtpParams &gtp() const { return *gtp_; }

  static std::size_t GateParamCount();
  static std::size_t GvpParamCount(const NeckConfig &config, int d_t);
  static std::size_t GtpParamCount(int d_t);

 private:
  std::optional<GateParams> visual_gate_;
  std::optional<GateParams> textual_gate_;
  std::optional<GvpParams> gvp_;
  std::optional<GtpParams> gtp_;
};

}  // namespace memex

#endif  // MEMEX_NECK_H_
