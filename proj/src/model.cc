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

#include "memex/model.h"

#include "memex/errors.h"
#include "memex/random.h"

namespace memex {

const char *ModeName(Mode mode) {
  switch (mode) {
    case Mode::kSingleText:
      return "single_text";
    case Mode::kSingleVision:
      return "single_vision";
    case Mode::kMultitask:
      return "multitask";
  }
  return "?";
}

Mode ParseMode(const std::string &name) {
  if (name == "single_text") return Mode::kSingleText;
  if (name == "single_vision") return Mode::kSingleVision;
  if (name == "multitask") return Mode::kMultitask;
  throw ConfigError("unknown mode '" + name + "' (expected single_text, single_vision or multitask)");
}

bool ModelConfig::gated() const {
  if (mode != Mode::kMultitask) return false;
  return neck.gate.value_or(true);
}

void ModelConfig::Validate() const {
  backbone.Validate();
  if (mode != Mode::kMultitask && neck.gate.value_or(false)) {
    throw ConfigError(std::string("neck.gate cannot be on in ") + ModeName(mode) +
                      " mode: single-task models have no gating mechanism");
  }
  if (neck.heads < 1 || backbone.d_t % neck.heads != 0) {
    throw ConfigError("backbone.d_t must be divisible by neck.heads");
  }
  if (has_text() && (textgen.heads < 1 || backbone.d_t % textgen.heads != 0)) {
    throw ConfigError("backbone.d_t must be divisible by textgen.heads");
  }
  if (has_seg()) {
    if (seg.heads < 1 || backbone.d_t % seg.heads != 0) {
      throw ConfigError("backbone.d_t must be divisible by seg.heads");
    }
    if (seg.blocks != 0 && seg.blocks != backbone.layer_count) {
      throw ConfigError("seg.blocks must equal backbone.layers");
    }
    if (!(seg.threshold > 0.0 && seg.threshold < 1.0)) {
      throw ConfigError("seg.threshold must lie in (0, 1)");
    }
  }
}

MemexModel::MemexModel(ModelConfig config, std::shared_ptr<const Backbone> backbone, TextVocab vocab)
    : config_(std::move(config)), backbone_(std::move(backbone)), vocab_(std::move(vocab)) {
  config_.Validate();
  if (backbone_->config().d_t != config_.backbone.d_t) {
    throw ConfigError("backbone d_t differs from model configuration");
  }
  Rng rng(Mix64(config_.seed));
  const int d = config_.backbone.d_t;
  neck_ = std::make_unique<Neck>(params_, config_.neck, d, config_.gated(), config_.has_text(),
                                 config_.has_seg(), rng);
  if (config_.has_text()) {
    textgen_ = std::make_unique<TextGenerator>(params_, config_.textgen, d, vocab_, *backbone_, rng);
  }
  if (config_.has_seg()) {
    segmenter_ = std::make_unique<Segmenter>(params_, config_.seg, config_.backbone, rng);
  }
}

SampleFeatures MemexModel::PrepareInput(const ImageTensor &image, const std::string &text) const {
  SampleFeatures f;
  f.joint = JointFeatures(backbone_->EncodeGlobal(image, text));
  f.token_seq = backbone_->AddPositional(backbone_->EmbedTokens(text).sequence);
  f.patches = backbone_->EncodePatches(image);
  f.width = image.width();
  f.height = image.height();
  return f;
}

SampleFeatures MemexModel::Prepare(const MemeSample &sample) const {
  SampleFeatures f = PrepareInput(sample.image, sample.text);
  f.target_ids = vocab_.Encode(SplitWhitespace(RationaleTarget(sample)));
  f.mask = sample.mask;
  return f;
}

ag::Var MemexModel::JointVar(const SampleFeatures &f) const { return ag::Constant(f.joint); }

ag::Var MemexModel::GenerationLossFor(const SampleFeatures &f) const {
  if (!textgen_) throw ConfigError("generation loss requested from a model without a text path");
  ag::Var p_v = neck_->VisualProjection(JointVar(f));
  return textgen_->Loss(f.token_seq, p_v, f.target_ids);
}

ag::Var MemexModel::SegmentationLogits(const SampleFeatures &f) const {
  if (!segmenter_) throw ConfigError("segmentation requested from a model without a vision path");
  ag::Var p_t;
  if (segmenter_->config().modulation) p_t = neck_->TextualProjection(JointVar(f));
  return segmenter_->Logits(f.patches, p_t, f.width, f.height);
}

ag::Var MemexModel::SegmentationLossFor(const SampleFeatures &f) const {
  return SegmentationLoss(SegmentationLogits(f), f.mask);
}

GenerationOutput MemexModel::Generate(const SampleFeatures &f) const {
  if (!textgen_) throw ConfigError("generation requested from a model without a text path");
  ag::NoGradGuard no_grad;
  ag::Var p_v = neck_->VisualProjection(JointVar(f));
  return textgen_->Generate(f.token_seq, p_v);
}

BinaryMask MemexModel::PredictMask(const SampleFeatures &f) const {
  ag::NoGradGuard no_grad;
  const Matrix logits = SegmentationLogits(f).value();
  return Binarize(logits, segmenter_->config().threshold);
}

std::vector<std::string> MemexModel::TextOnlyPrefixes() { return {"neck.gvp.", "textgen."}; }

std::vector<std::string> MemexModel::SegmentationOnlyPrefixes() {
  return {"neck.gate_t.", "neck.gtp.", "seg."};
}

std::vector<std::string> MemexModel::SharedPrefixes() { return {"neck.gate_v."}; }

std::size_t MemexModel::ExpectedParamCount(const ModelConfig &config, int vocab_size) {
  const int d = config.backbone.d_t;
  std::size_t n = 0;
  if (config.gated()) n += Neck::GateParamCount() * 2;
  if (config.has_text()) {
    n += Neck::GvpParamCount(config.neck, d) + TextGenerator::ParamCount(config.textgen, d, vocab_size);
  }
  if (config.has_seg()) n += Neck::GtpParamCount(d) + Segmenter::ParamCount(config.seg, config.backbone);
  return n;
}

TextVocab BuildVocab(const std::vector<MemeSample> &samples) {
  std::vector<std::string> words;
  for (const auto &s : samples) words.insert(words.end(), s.tokens.begin(), s.tokens.end());
  return TextVocab(words);
}

}  // namespace memex
