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

#include "memex/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "memex/config.h"
#include "memex/errors.h"
#include "memex/random.h"

namespace memex {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kParamsMagic[4] = {'M', 'X', 'P', 'B'};
constexpr char kOptimizerMagic[4] = {'M', 'X', 'O', 'B'};
constexpr std::uint32_t kBlobVersion = 1;
constexpr int kStateFormatVersion = 1;

template <typename T>
void Put(std::ostream &out, T value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T Take(std::istream &in, const fs::path &path) {
  T value{};
  if (!in.read(reinterpret_cast<char *>(&value), sizeof(T))) {
    throw DataError(path.string() + ": truncated file");
  }
  return value;
}

void PutMatrix(std::ostream &out, const Matrix &m) {
  Put<std::uint32_t>(out, m.rows());
  Put<std::uint32_t>(out, m.cols());
  out.write(reinterpret_cast<const char *>(m.values().data()), std::streamsize(m.size() * sizeof(double)));
}

Matrix TakeMatrix(std::istream &in, const fs::path &path) {
  const auto rows = Take<std::uint32_t>(in, path);
  const auto cols = Take<std::uint32_t>(in, path);
  if (std::uint64_t(rows) * cols > (std::uint64_t(1) << 32)) throw DataError(path.string() + ": corrupt shape");
  std::vector<double> values(std::size_t(rows) * cols);
  if (!in.read(reinterpret_cast<char *>(values.data()), std::streamsize(values.size() * sizeof(double)))) {
    throw DataError(path.string() + ": truncated matrix data");
  }
  return Matrix(int(rows), int(cols), std::move(values));
}

std::ofstream OpenOut(const fs::path &path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream OpenIn(const fs::path &path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

void CheckMagic(std::istream &in, const char (&magic)[4], const fs::path &path) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw DataError(path.string() + ": not a memex blob");
  }
  const auto version = Take<std::uint32_t>(in, path);
  if (version != kBlobVersion) {
    throw VersionError(path.string() + ": blob version " + std::to_string(version) + ", expected " +
                       std::to_string(kBlobVersion));
  }
}

json OptionalNumber(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json HistoryJson(const std::vector<EpochRecord> &history) {
  json out = json::array();
  for (const auto &r : history) {
    out.push_back({{"epoch", r.epoch},
                   {"generation_loss", OptionalNumber(r.generation_loss)},
                   {"segmentation_loss", OptionalNumber(r.segmentation_loss)},
                   {"total_loss", r.total_loss}});
  }
  return out;
}

std::vector<EpochRecord> HistoryFromJson(const json &j) {
  std::vector<EpochRecord> history;
  for (const auto &e : j) {
    EpochRecord r;
    r.epoch = e.at("epoch").get<int>();
    if (!e.at("generation_loss").is_null()) r.generation_loss = e["generation_loss"].get<double>();
    if (!e.at("segmentation_loss").is_null()) r.segmentation_loss = e["segmentation_loss"].get<double>();
    r.total_loss = e.at("total_loss").get<double>();
    history.push_back(r);
  }
  return history;
}

void WriteParams(const fs::path &path, const ParameterSet &params, std::uint64_t hash) {
  auto out = OpenOut(path, true);
  out.write(kParamsMagic, 4);
  Put(out, kBlobVersion);
  Put(out, hash);
  Put<std::uint32_t>(out, params.items().size());
  for (const auto &p : params.items()) {
    Put<std::uint32_t>(out, p.name.size());
    out.write(p.name.data(), std::streamsize(p.name.size()));
    PutMatrix(out, p.var.value());
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void ReadParams(const fs::path &path, ParameterSet &params, std::uint64_t hash) {
  auto in = OpenIn(path, true);
  CheckMagic(in, kParamsMagic, path);
  if (Take<std::uint64_t>(in, path) != hash) {
    throw VersionError(path.string() + ": parameters were saved for a different configuration");
  }
  const auto count = Take<std::uint32_t>(in, path);
  if (count != params.items().size()) {
    throw DataError(path.string() + ": " + std::to_string(count) + " parameters, model has " +
                    std::to_string(params.items().size()));
  }
  for (const auto &p : params.items()) {
    const auto len = Take<std::uint32_t>(in, path);
    if (len > 4096) throw DataError(path.string() + ": corrupt parameter name");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError(path.string() + ": truncated file");
    if (name != p.name) throw DataError(path.string() + ": expected parameter " + p.name + ", found " + name);
    Matrix m = TakeMatrix(in, path);
    if (!m.SameShape(p.var.value())) throw DataError(path.string() + ": shape mismatch for " + name);
    ag::Var var = p.var;
    var.mutable_value() = std::move(m);
  }
}

}  // namespace

const char *LossName(LossKind kind) {
  return kind == LossKind::kGeneration ? "generation" : "segmentation";
}

LossKind ParseLossKind(const std::string &name) {
  if (name == "generation" || name == "generation_loss") return LossKind::kGeneration;
  if (name == "segmentation" || name == "segmentation_loss") return LossKind::kSegmentation;
  throw ConfigError("unknown loss '" + name + "' (expected generation or segmentation)");
}

void LossSchedule::Validate() const {
  if (ep <= 0) throw ConfigError("schedule.ep must be positive");
  if (order[0] == order[1]) throw ConfigError("schedule.order must name two distinct losses");
}

std::vector<LossKind> ActiveLosses(int epoch, const LossSchedule &schedule) {
  schedule.Validate();
  if (epoch < 0) throw std::invalid_argument("ActiveLosses: negative epoch");
  if (epoch < schedule.ep) return {schedule.order[0]};
  return {schedule.order[0], schedule.order[1]};
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta1/beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("train.epsilon must be positive");
  if (schedule) schedule->Validate();
}

void CheckModeSchedule(Mode mode, const TrainConfig &config) {
  config.Validate();
  if (mode != Mode::kMultitask && config.schedule) {
    throw ConfigError(std::string(ModeName(mode)) +
                      " trains a single loss; a loss schedule naming both losses is not allowed");
  }
}

std::vector<LossKind> LossesFor(Mode mode, const TrainConfig &config, int epoch) {
  switch (mode) {
    case Mode::kSingleText:
      return {LossKind::kGeneration};
    case Mode::kSingleVision:
      return {LossKind::kSegmentation};
    case Mode::kMultitask:
      return ActiveLosses(epoch, config.schedule.value_or(LossSchedule{}));
  }
  return {};
}

Adam::Adam(ParameterSet &params, double lr, double beta1, double beta2, double epsilon)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto &p : params_.items()) {
    m_.emplace_back(p.var.rows(), p.var.cols());
    v_.emplace_back(p.var.rows(), p.var.cols());
  }
}

void Adam::Step() {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, double(step_));
  const double c2 = 1.0 - std::pow(beta2_, double(step_));
  const auto &items = params_.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    ag::Var var = items[i].var;
    const Matrix &g = var.grad();
    Matrix &w = var.mutable_value();
    Matrix &m = m_[i];
    Matrix &v = v_[i];
    const bool has_grad = g.size() == w.size();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = has_grad ? g[k] : 0.0;
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
      w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon_);
    }
  }
}

void Adam::Save(const fs::path &path) const {
  auto out = OpenOut(path, true);
  out.write(kOptimizerMagic, 4);
  Put(out, kBlobVersion);
  Put<std::int64_t>(out, step_);
  Put<std::uint32_t>(out, m_.size());
  for (std::size_t i = 0; i < m_.size(); ++i) {
    PutMatrix(out, m_[i]);
    PutMatrix(out, v_[i]);
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void Adam::Load(const fs::path &path) {
  auto in = OpenIn(path, true);
  CheckMagic(in, kOptimizerMagic, path);
  const auto step = Take<std::int64_t>(in, path);
  const auto count = Take<std::uint32_t>(in, path);
  if (count != m_.size()) throw DataError(path.string() + ": optimizer state does not match the model");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    Matrix m = TakeMatrix(in, path);
    Matrix v = TakeMatrix(in, path);
    if (!m.SameShape(m_[i]) || !v.SameShape(v_[i])) throw DataError(path.string() + ": shape mismatch");
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  step_ = step;
}

std::vector<int> EpochOrder(std::size_t count, std::uint64_t seed, int epoch) {
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Mix64(seed ^ Mix64(std::uint64_t(epoch) + 0x5eedULL)));
  rng.Shuffle(order);
  return order;
}

Trainer::Trainer(MemexModel &model, TrainConfig config)
    : model_(model),
      config_(std::move(config)),
      optimizer_(model.params(), config_.learning_rate, config_.beta1, config_.beta2, config_.epsilon) {
  CheckModeSchedule(model_.config().mode, config_);
}

void Trainer::Fit(const std::vector<SampleFeatures> &train, int until_epoch, const TrainHooks &hooks) {
  if (train.empty()) throw DataError("training split is empty");
  const Mode mode = model_.config().mode;
  const std::size_t n = train.size();
  const std::size_t batch = std::size_t(config_.batch_size);
  for (int epoch = state_.epoch; epoch < until_epoch; ++epoch) {
    const std::vector<LossKind> active = LossesFor(mode, config_, epoch);
    const std::vector<int> order = EpochOrder(n, config_.seed, epoch);
    double gen_sum = 0.0, seg_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      model_.params().ZeroGrad();
      const double scale = 1.0 / double(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const SampleFeatures &f = train[order[i]];
        ag::Var total;
        for (LossKind kind : active) {
          ag::Var loss = kind == LossKind::kGeneration ? model_.GenerationLossFor(f)
                                                       : model_.SegmentationLossFor(f);
          (kind == LossKind::kGeneration ? gen_sum : seg_sum) += loss.value()[0];
          total = total.defined() ? total + loss : loss;
        }
        ag::Backward(ag::Scale(total, scale));
      }
      ++state_.step;
      if (config_.linear_decay) {
        const double total = double(config_.epochs) * double((n + batch - 1) / batch);
        optimizer_.set_learning_rate(config_.learning_rate *
                                     std::max(0.0, 1.0 - double(state_.step - 1) / total));
      }
      if (hooks.after_backward) hooks.after_backward(StepInfo{epoch, state_.step, active}, model_.params());
      optimizer_.Step();
    }
    EpochRecord record;
    record.epoch = epoch;
    for (LossKind kind : active) {
      const double mean = (kind == LossKind::kGeneration ? gen_sum : seg_sum) / double(n);
      (kind == LossKind::kGeneration ? record.generation_loss : record.segmentation_loss) = mean;
      record.total_loss += mean;
    }
    state_.history.push_back(record);
    state_.epoch = epoch + 1;
    if (hooks.on_epoch) hooks.on_epoch(record);
  }
}

std::uint64_t ConfigHash(const ModelConfig &config, const TextVocab &vocab) {
  std::string text = ToJson(config).dump();
  for (const auto &piece : vocab.pieces()) text += "\n" + piece;
  return HashString(text, 0);
}

void WriteLossLog(const fs::path &path, const std::vector<EpochRecord> &history) {
  auto out = OpenOut(path, false);
  out << "epoch,generation_loss,segmentation_loss,total_loss\n" << std::setprecision(17);
  for (const auto &r : history) {
    out << r.epoch << ',';
    if (r.generation_loss) out << *r.generation_loss;
    out << ',';
    if (r.segmentation_loss) out << *r.segmentation_loss;
    out << ',' << r.total_loss << '\n';
  }
}

void SaveCheckpoint(const fs::path &dir, const MemexModel &model, const TrainConfig &train,
                    const TrainState &state) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  const std::uint64_t hash = ConfigHash(model.config(), model.vocab());
  WriteParams(dir / "params.bin", model.params(), hash);
  {
    auto out = OpenOut(dir / "config.json", false);
    out << json{{"model", ToJson(model.config())}, {"train", ToJson(train)}}.dump(2) << '\n';
  }
  {
    auto out = OpenOut(dir / "state.json", false);
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash;
    out << json{{"format_version", kStateFormatVersion},
                {"config_hash", hex.str()},
                {"epoch", state.epoch},
                {"step", state.step},
                {"history", HistoryJson(state.history)}}
               .dump(2)
        << '\n';
  }
  {
    auto out = OpenOut(dir / "vocab.txt", false);
    for (const auto &piece : model.vocab().pieces()) out << piece << '\n';
  }
  WriteLossLog(dir / "loss_log.csv", state.history);
}

void SaveCheckpoint(const fs::path &dir, const MemexModel &model, const Trainer &trainer) {
  SaveCheckpoint(dir, model, trainer.config(), trainer.state());
  trainer.optimizer().Save(dir / "optimizer.bin");
}

LoadedCheckpoint LoadCheckpoint(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw DataError("checkpoint directory " + dir.string() + " not found");
  LoadedCheckpoint ckpt;
  ckpt.dir = dir;
  json config_json, state_json;
  try {
    config_json = json::parse(OpenIn(dir / "config.json", false));
    state_json = json::parse(OpenIn(dir / "state.json", false));
  } catch (const json::exception &e) {
    throw DataError(dir.string() + ": corrupt checkpoint metadata: " + e.what());
  }
  try {
    if (state_json.at("format_version").get<int>() != kStateFormatVersion) {
      throw VersionError(dir.string() + ": unsupported checkpoint format version " +
                         state_json["format_version"].dump());
    }
  } catch (const json::exception &e) {
    throw DataError(dir.string() + ": corrupt state.json: " + e.what());
  }
  try {
    ckpt.model_config = ModelConfigFromJson(config_json.at("model"));
    ckpt.train_config = TrainConfigFromJson(config_json.at("train"));
  } catch (const json::exception &e) {
    throw DataError(dir.string() + ": corrupt config.json: " + e.what());
  } catch (const ConfigError &e) {
    throw VersionError(dir.string() + ": config.json no longer parses: " + e.what());
  }

  std::vector<std::string> pieces;
  {
    auto in = OpenIn(dir / "vocab.txt", false);
    std::string line;
    while (std::getline(in, line)) pieces.push_back(line);
  }
  TextVocab vocab(pieces);
  if (vocab.pieces() != pieces) throw DataError(dir.string() + ": vocab.txt is not in canonical order");

  const std::uint64_t hash = ConfigHash(ckpt.model_config, vocab);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  try {
    if (state_json.at("config_hash").get<std::string>() != hex.str()) {
      throw VersionError(dir.string() + ": config hash mismatch (checkpoint " +
                         state_json["config_hash"].get<std::string>() + ", files " + hex.str() + ")");
    }
    ckpt.state.epoch = state_json.at("epoch").get<int>();
    ckpt.state.step = state_json.at("step").get<std::int64_t>();
    ckpt.state.history = HistoryFromJson(state_json.at("history"));
  } catch (const json::exception &e) {
    throw DataError(dir.string() + ": corrupt state.json: " + e.what());
  }

  ckpt.model = std::make_unique<MemexModel>(ckpt.model_config, MakeBackbone(ckpt.model_config.backbone),
                                            std::move(vocab));
  ReadParams(dir / "params.bin", ckpt.model->params(), hash);
  return ckpt;
}

std::unique_ptr<Trainer> LoadedCheckpoint::MakeTrainer() const {
  auto trainer = std::make_unique<Trainer>(*model, train_config);
  trainer->state() = state;
  const fs::path opt = dir / "optimizer.bin";
  if (fs::exists(opt)) trainer->optimizer().Load(opt);
  return trainer;
}

std::vector<double> MovingAverage(const std::vector<double> &values, int window) {
  if (window < 1) throw std::invalid_argument("MovingAverage: window must be >= 1");
  std::vector<double> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= std::size_t(window)) sum -= values[i - window];
    out.push_back(sum / double(std::min<std::size_t>(i + 1, window)));
  }
  return out;
}

}  // namespace memex
