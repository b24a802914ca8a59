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

#ifndef MEMEX_MODEL_H_
#define MEMEX_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memex/backbone.h"
#include "memex/corpus.h"
#include "memex/neck.h"
#include "memex/segmenter.h"
#include "memex/textgen.h"

namespace memex {

enum class Mode { kSingleText, kSingleVision, kMultitask };

const char *ModeName(Mode mode);
Mode ParseMode(const std::string &name);

struct ModelConfig {
  Mode mode = Mode::kMultitask;
  BackboneConfig backbone;
  NeckConfig neck;
  TextGenConfig textgen;
  SegConfig seg;
  std::uint64_t seed = 0;

  bool has_text() const { return mode != Mode::kSingleVision; }
  bool has_seg() const { return mode != Mode::kSingleText; }
  // Gates exist only in multitask mode (optionally switched off there).
  bool gated() const;
  // Throws ConfigError on inconsistent settings.
  void Validate() const;
};

// Everything the frozen backbone contributes for one meme, computed once.
struct SampleFeatures {
  Matrix joint;        // 1×1024
  Matrix token_seq;    // N×d_t, positions added
  LayerStack patches;
  int width = 0;
  int height = 0;
  std::vector<int> target_ids;  // rationale in vocab ids (no </s>)
  BinaryMask mask;              // empty for unlabeled input
};

// The shared-private multitask network. Construction order (and thus
// parameter registration order) is neck, text path, segmentation path.
class MemexModel {
 public:
  MemexModel(ModelConfig config, std::shared_ptr<const Backbone> backbone, TextVocab vocab);
  MemexModel(const MemexModel &) = delete;
  MemexModel &operator=(const MemexModel &) = delete;

  SampleFeatures Prepare(const MemeSample &sample) const;
  SampleFeatures PrepareInput(const ImageTensor &image, const std::string &text) const;

  ag::Var GenerationLossFor(const SampleFeatures &features) const;
  ag::Var SegmentationLogits(const SampleFeatures &features) const;
  ag::Var SegmentationLossFor(const SampleFeatures &features) const;

  GenerationOutput Generate(const SampleFeatures &features) const;
  BinaryMask PredictMask(const SampleFeatures &features) const;

  const ModelConfig &config() const { return config_; }
  const TextVocab &vocab() const { return vocab_; }
  const Backbone &backbone() const { return *backbone_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  const Neck &neck() const { return *neck_; }
  const TextGenerator *textgen() const { return textgen_.get(); }
  const Segmenter *segmenter() const { return segmenter_.get(); }

  // Name prefixes of parameters used only by one task's loss.
  static std::vector<std::string> TextOnlyPrefixes();
  static std::vector<std::string> SegmentationOnlyPrefixes();
  static std::vector<std::string> SharedPrefixes();

  // Expected scalar parameter count for a configuration.
  static std::size_t ExpectedParamCount(const ModelConfig &config, int vocab_size);

 private:
  ag::Var JointVar(const SampleFeatures &f) const;

  ModelConfig config_;
  std::shared_ptr<const Backbone> backbone_;
  TextVocab vocab_;
  ParameterSet params_;
  std::unique_ptr<Neck> neck_;
  std::unique_ptr<TextGenerator> textgen_;
  std::unique_ptr<Segmenter> segmenter_;
};

// Output vocabulary from every token in the given samples.
TextVocab BuildVocab(const std::vector<MemeSample> &samples);

}  // namespace memex

#endif  // MEMEX_MODEL_H_
