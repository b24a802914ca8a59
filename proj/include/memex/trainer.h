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

#ifndef MEMEX_TRAINER_H_
#define MEMEX_TRAINER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memex/model.h"

namespace memex {

enum class LossKind { kGeneration, kSegmentation };

const char *LossName(LossKind kind);
LossKind ParseLossKind(const std::string &name);

// Loss i_q becomes active at epoch q·ep and stays active.
struct LossSchedule {
  int ep = 15;
  std::array<LossKind, 2> order{LossKind::kGeneration, LossKind::kSegmentation};

  void Validate() const;
  bool operator==(const LossSchedule &) const = default;
};

// Losses summed at the given (0-based) epoch.
std::vector<LossKind> ActiveLosses(int epoch, const LossSchedule &schedule);

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Linearly anneal the learning rate to zero over `epochs`.
  bool linear_decay = false;
  std::uint64_t seed = 0;
  // Required shape depends on the mode: multitask uses it (a default is
  // supplied when absent), single-task modes must leave it unset.
  std::optional<LossSchedule> schedule;

  void Validate() const;
};

// Throws ConfigError when the schedule does not fit the mode.
void CheckModeSchedule(Mode mode, const TrainConfig &config);

// The losses trained at the given epoch for a model in the given mode.
std::vector<LossKind> LossesFor(Mode mode, const TrainConfig &config, int epoch);

class Adam {
 public:
  Adam(ParameterSet &params, double lr, double beta1, double beta2, double epsilon);

  void Step();
  std::int64_t step_count() const { return step_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void Save(const std::filesystem::path &path) const;
  void Load(const std::filesystem::path &path);

 private:
  ParameterSet &params_;
  double lr_, beta1_, beta2_, epsilon_;
  std::int64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct EpochRecord {
  int epoch = 0;
  std::optional<double> generation_loss;
  std::optional<double> segmentation_loss;
  double total_loss = 0.0;
};

struct TrainState {
  int epoch = 0;  // completed epochs
  std::int64_t step = 0;
  std::vector<EpochRecord> history;
};

struct StepInfo {
  int epoch = 0;
  std::int64_t step = 0;
  std::vector<LossKind> active;
};

struct TrainHooks {
  // After the batch's backward pass and before the optimizer update, so
  // parameter gradients are inspectable.
  std::function<void(const StepInfo &, const ParameterSet &)> after_backward;
  std::function<void(const EpochRecord &)> on_epoch;
};

class Trainer {
 public:
  // The model must outlive the trainer.
  Trainer(MemexModel &model, TrainConfig config);

  // Runs epochs state().epoch .. until_epoch-1 over the training features.
  void Fit(const std::vector<SampleFeatures> &train, int until_epoch, const TrainHooks &hooks = {});
  void Fit(const std::vector<SampleFeatures> &train, const TrainHooks &hooks = {}) {
    Fit(train, config_.epochs, hooks);
  }

  const TrainConfig &config() const { return config_; }
  TrainState &state() { return state_; }
  const TrainState &state() const { return state_; }
  Adam &optimizer() { return optimizer_; }
  const Adam &optimizer() const { return optimizer_; }

 private:
  MemexModel &model_;
  TrainConfig config_;
  Adam optimizer_;
  TrainState state_;
};

// Deterministic per-epoch visiting order.
std::vector<int> EpochOrder(std::size_t count, std::uint64_t seed, int epoch);

// Hash binding a checkpoint to its model configuration and vocabulary.
std::uint64_t ConfigHash(const ModelConfig &config, const TextVocab &vocab);

// Checkpoint directory layout:
//   params.bin     parameters (name, shape, raw doubles)
//   optimizer.bin  Adam moments and step count
//   config.json    model and training configuration
//   state.json     format version, config hash, epoch, step, history
//   vocab.txt      output vocabulary, one piece per line
//   loss_log.csv   per-epoch losses
void SaveCheckpoint(const std::filesystem::path &dir, const MemexModel &model, const Trainer &trainer);
// Parameters only (no optimizer/trainer state).
void SaveCheckpoint(const std::filesystem::path &dir, const MemexModel &model,
                    const TrainConfig &train, const TrainState &state);

struct LoadedCheckpoint {
  ModelConfig model_config;
  TrainConfig train_config;
  TrainState state;
  std::unique_ptr<MemexModel> model;
  std::filesystem::path dir;

  // A trainer positioned to continue where the checkpoint stopped.
  std::unique_ptr<Trainer> MakeTrainer() const;
};

// Throws VersionError on format or config-hash mismatch and DataError on
// missing or corrupt files.
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path &dir);

void WriteLossLog(const std::filesystem::path &path, const std::vector<EpochRecord> &history);

// Moving average over a trailing window (shorter at the start).
std::vector<double> MovingAverage(const std::vector<double> &values, int window);

}  // namespace memex

#endif  // MEMEX_TRAINER_H_
