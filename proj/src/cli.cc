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

#include "memex/cli.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "memex/agreement.h"
#include "memex/config.h"
#include "memex/errors.h"
#include "memex/render.h"
#include "memex/synth.h"

namespace memex {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct Overrides {
  std::string manifest;
  std::string split_file;
  std::string mode;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<int> repeats;
};

RunConfig Resolve(const Globals &g, const Overrides &o) {
  RunConfig c = g.config.empty() ? RunConfig{} : LoadRunConfig(g.config);
  if (g.seed) c.SetSeed(*g.seed);
  if (!g.out.empty()) c.out = g.out;
  if (!o.manifest.empty()) c.data.manifest = o.manifest;
  if (!o.split_file.empty()) c.data.split = o.split_file;
  if (!o.mode.empty()) c.model.mode = ParseMode(o.mode);
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.learning_rate) c.train.learning_rate = *o.learning_rate;
  if (o.repeats) c.repeats = *o.repeats;
  c.Validate();
  return c;
}

void MakeDir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream OpenOut(const fs::path &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<MemeSample> LoadCorpus(const RunConfig &c) {
  if (c.data.manifest.empty()) throw ConfigError("no manifest given (data.manifest or --manifest)");
  if (!fs::exists(c.data.manifest)) throw ConfigError("manifest " + c.data.manifest.string() + " does not exist");
  return LoadManifest(c.data.manifest);
}

DatasetSplit ObtainSplit(const RunConfig &c, const std::vector<MemeSample> &samples) {
  if (!c.data.split.empty()) {
    if (!fs::exists(c.data.split)) throw ConfigError("split file " + c.data.split.string() + " does not exist");
    return ReadSplit(c.data.split);
  }
  return SplitDataset(samples, c.data.ratios, c.train.seed);
}

const std::vector<std::string> &SplitIds(const DatasetSplit &split, const std::string &name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

struct Predictions {
  std::vector<std::string> hyps, refs;
  std::vector<BinaryMask> masks, gold;
};

Predictions Predict(const MemexModel &model, const std::vector<MemeSample> &samples) {
  Predictions p;
  for (const auto &s : samples) {
    const SampleFeatures f = model.Prepare(s);
    if (model.config().has_text()) {
      p.hyps.push_back(model.Generate(f).text);
      p.refs.push_back(RationaleTarget(s));
    }
    if (model.config().has_seg()) {
      p.masks.push_back(model.PredictMask(f));
      p.gold.push_back(s.mask);
    }
  }
  return p;
}

CorpusScore Score(const Predictions &p, BleuSmoothing smoothing) {
  return ScoreCorpus(p.hyps, p.refs, p.masks, p.gold, smoothing);
}

void WriteReports(const fs::path &stem, const std::vector<ReportRow> &rows, std::ostream &out) {
  {
    auto csv = OpenOut(fs::path(stem.string() + ".csv"));
    WriteReportCsv(csv, rows);
  }
  const std::string table = FormatReportTable(rows);
  OpenOut(fs::path(stem.string() + ".txt")) << table;
  out << table;
}

CorpusScore AverageScores(const std::vector<CorpusScore> &runs) {
  CorpusScore avg;
  const double n = double(runs.size());
  for (const auto &r : runs) {
    avg.count = r.count;
    if (r.text) {
      if (!avg.text) avg.text = TextScore{};
      TextScore &t = *avg.text;
      t.r1 += r.text->r1 / n, t.r2 += r.text->r2 / n, t.rl += r.text->rl / n;
      t.b1 += r.text->b1 / n, t.b2 += r.text->b2 / n, t.b3 += r.text->b3 / n, t.b4 += r.text->b4 / n;
    }
    if (r.mask) {
      if (!avg.mask) avg.mask = MaskScore{};
      avg.mask->dice += r.mask->dice / n;
      avg.mask->jaccard += r.mask->jaccard / n;
      avg.mask->miou += r.mask->miou / n;
    }
  }
  return avg;
}

int CmdSynth(const Globals &g, int count, int width, int height, std::ostream &out) {
  const fs::path dir = g.out.empty() ? fs::path("memex_out") : fs::path(g.out);
  SynthOptions o;
  o.count = count;
  o.width = width;
  o.height = height;
  o.seed = g.seed.value_or(0);
  MakeDir(dir);
  WriteManifest(dir / "manifest.jsonl", MakeSyntheticCorpus(o));
  out << "wrote " << count << " samples to " << (dir / "manifest.jsonl").string() << '\n';
  return kExitOk;
}

int CmdPrepare(const RunConfig &c, std::ostream &out) {
  const auto samples = LoadCorpus(c);
  DatasetSplit split = c.data.split.empty() ? SplitDataset(samples, c.data.ratios, c.train.seed)
                                            : ObtainSplit(c, samples);
  MakeDir(c.out);
  WriteSplit(c.out / "split.json", split);
  std::size_t tokens = 0, rationale = 0;
  for (const auto &s : samples) {
    tokens += s.tokens.size();
    for (auto r : s.rationale) rationale += r;
  }
  out << "manifest: " << c.data.manifest.string() << '\n'
      << "samples: " << samples.size() << " (all valid)\n"
      << "tokens: " << tokens << ", rationale tokens: " << rationale << '\n'
      << "split (seed " << split.seed << "): train " << split.train.size() << ", val " << split.val.size()
      << ", test " << split.test.size() << '\n'
      << "wrote " << (c.out / "split.json").string() << '\n';
  return kExitOk;
}

int CmdTrain(RunConfig c, std::ostream &out) {
  const auto samples = LoadCorpus(c);
  const DatasetSplit split = ObtainSplit(c, samples);
  const auto train = SelectSamples(samples, split.train);
  if (train.empty()) throw DataError("training split is empty");
  const auto held_out = SelectSamples(samples, split.test.empty() ? split.train : split.test);
  const std::string eval_name = split.test.empty() ? "train" : "test";
  MakeDir(c.out);
  WriteSplit(c.out / "split.json", split);

  const std::uint64_t base_seed = c.train.seed;
  std::vector<ReportRow> rows;
  std::vector<CorpusScore> scores;
  for (int k = 0; k < c.repeats; ++k) {
    c.SetSeed(base_seed + std::uint64_t(k));
    const fs::path run_dir = c.repeats == 1 ? c.out : c.out / ("run_" + std::to_string(k));
    MemexModel model(c.model, MakeBackbone(c.model.backbone), BuildVocab(train));
    std::vector<SampleFeatures> features;
    for (const auto &s : train) features.push_back(model.Prepare(s));
    Trainer trainer(model, c.train);
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochRecord &r) {
      out << "run " << k << " epoch " << r.epoch << " loss " << std::setprecision(6) << r.total_loss << '\n';
    };
    trainer.Fit(features, hooks);
    SaveCheckpoint(run_dir / "checkpoint", model, trainer);

    const CorpusScore score = Score(Predict(model, held_out), c.bleu_smoothing);
    const std::string label = std::string(ModeName(c.model.mode)) + " seed " + std::to_string(c.train.seed);
    MakeDir(run_dir);
    WriteReports(run_dir / ("report_" + eval_name), {{label, score}}, out);
    rows.push_back({label, score});
    scores.push_back(score);
  }
  if (c.repeats > 1) {
    rows.push_back({"mean of " + std::to_string(c.repeats), AverageScores(scores)});
    WriteReports(c.out / "summary", rows, out);
  }
  return kExitOk;
}

int CmdEval(const RunConfig &c, const std::string &checkpoint, const std::string &split_name,
            std::ostream &out) {
  if (!fs::is_directory(checkpoint)) throw DataError("checkpoint " + checkpoint + " not found");
  const LoadedCheckpoint ckpt = LoadCheckpoint(checkpoint);
  const auto samples = LoadCorpus(c);
  DatasetSplit split = c.data.split.empty() ? SplitDataset(samples, c.data.ratios, ckpt.train_config.seed)
                                            : ObtainSplit(c, samples);
  const auto selected = SelectSamples(samples, SplitIds(split, split_name));
  if (selected.empty()) throw DataError("split '" + split_name + "' is empty");
  const Predictions p = Predict(*ckpt.model, selected);
  MakeDir(c.out);
  {
    auto pred = OpenOut(c.out / ("predictions_" + split_name + ".jsonl"));
    for (std::size_t i = 0; i < selected.size(); ++i) {
      json j{{"id", selected[i].id}};
      if (!p.hyps.empty()) j["rationale"] = p.hyps[i], j["gold_rationale"] = p.refs[i];
      if (!p.masks.empty()) j["dice"] = Dice(p.masks[i], p.gold[i]);
      pred << j.dump() << '\n';
    }
  }
  const std::string label = std::string(ModeName(ckpt.model_config.mode)) + " " + split_name;
  WriteReports(c.out / ("report_" + split_name), {{label, Score(p, c.bleu_smoothing)}}, out);
  return kExitOk;
}

int CmdExplain(const RunConfig &c, const std::string &checkpoint, const std::string &image_path,
               const std::string &text, const std::string &gold_mask_path,
               const std::vector<int> &gold_rationale, std::ostream &out) {
  if (!fs::is_directory(checkpoint)) throw DataError("checkpoint " + checkpoint + " not found");
  const LoadedCheckpoint ckpt = LoadCheckpoint(checkpoint);
  const ImageTensor image = ReadImagePng(image_path);
  const MemexModel &model = *ckpt.model;
  const SampleFeatures f = model.PrepareInput(image, text);
  const std::vector<std::string> tokens = SplitWhitespace(text);

  MakeDir(c.out);
  OverlayInput overlay;
  overlay.image = &image;
  overlay.tokens = tokens;
  BinaryMask mask(image.width(), image.height());
  if (model.config().has_text()) {
    const GenerationOutput g = model.Generate(f);
    overlay.predicted_rationale = RationaleFlags(tokens, SplitWhitespace(g.text));
    OpenOut(c.out / "rationale.txt") << g.text << '\n';
    out << "rationale: " << g.text << '\n';
  }
  if (model.config().has_seg()) {
    mask = model.PredictMask(f);
    WriteMaskPng(c.out / "mask.png", mask);
    out << "mask: " << (c.out / "mask.png").string() << " (" << mask.Foreground() << " of " << mask.size()
        << " pixels)\n";
  }
  overlay.predicted_mask = &mask;

  BinaryMask gold_mask;
  if (!gold_mask_path.empty()) {
    gold_mask = ReadMaskPng(gold_mask_path);
    if (!gold_mask.SameShape(mask)) throw DataError("gold mask does not match the image size");
    overlay.gold_mask = &gold_mask;
    if (model.config().has_seg()) out << "dice vs gold: " << Dice(mask, gold_mask) << '\n';
  }
  std::vector<std::uint8_t> gold_flags;
  if (!gold_rationale.empty()) {
    if (gold_rationale.size() != tokens.size()) {
      throw DataError("gold rationale has " + std::to_string(gold_rationale.size()) + " labels for " +
                      std::to_string(tokens.size()) + " tokens");
    }
    for (int v : gold_rationale) {
      if (v != 0 && v != 1) throw DataError("gold rationale labels must be 0 or 1");
      gold_flags.push_back(std::uint8_t(v));
    }
    overlay.gold_rationale = &gold_flags;
  }
  const RgbImage rendered = RenderOverlay(overlay);
  WriteRgbPng(c.out / "overlay.png", rendered.width, rendered.height, rendered.rgb);
  out << "overlay: " << (c.out / "overlay.png").string() << '\n';
  return kExitOk;
}

int CmdAgree(const RunConfig &c, const std::string &bundle_path, std::ostream &out) {
  const auto bundle = LoadBundle(bundle_path);
  const BundleAnalysis a = AnalyzeBundle(bundle);
  MakeDir(c.out);
  std::size_t ties = 0;
  {
    auto votes = OpenOut(c.out / "votes.csv");
    votes << "id,token_index,token,label,tie\n";
    for (std::size_t i = 0; i < bundle.size(); ++i) {
      ties += a.votes[i].tie_count();
      for (std::size_t t = 0; t < bundle[i].tokens.size(); ++t) {
        votes << bundle[i].id << ',' << t << ',' << bundle[i].tokens[t] << ',' << int(a.votes[i].labels[t])
              << ',' << int(a.votes[i].ties[t]) << '\n';
      }
    }
  }
  std::size_t routed = 0;
  {
    auto adj = OpenOut(c.out / "adjudication.csv");
    adj << "id,dice,decision\n" << std::setprecision(10);
    for (const auto &[id, r] : a.adjudications) {
      if (r.decision != Decision::kRouteToExpert) continue;
      ++routed;
      adj << id << ',' << r.dice << ',' << DecisionName(r.decision) << '\n';
    }
  }
  WriteStatsCsv(c.out / "stats.csv", a.stats);
  WriteHistogramCsv(c.out / "hist_rationale_tokens.csv", a.stats.rationale_tokens);
  WriteHistogramCsv(c.out / "hist_tokens.csv", a.stats.tokens);
  WriteHistogramCsv(c.out / "hist_mask_area.csv", a.stats.area_percent);
  OpenOut(c.out / "agreement.json") << json{{"fleiss_kappa", a.kappa},
                                           {"samples", bundle.size()},
                                           {"tied_tokens", ties},
                                           {"routed_to_expert", routed}}
                                           .dump(2)
                                    << '\n';
  out << "fleiss kappa: " << std::setprecision(6) << a.kappa << '\n'
      << "tied tokens: " << ties << '\n'
      << "mask pairs routed to expert: " << routed << " of " << a.adjudications.size() << '\n'
      << "mean rationale tokens " << a.stats.mean_rationale_tokens << ", mean tokens " << a.stats.mean_tokens
      << ", mean mask area " << a.stats.mean_area_percent << "%\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Explainable multimodal meme analysis: rationales, evidence masks, metrics, agreement"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  auto *seed_opt = app.add_option("--seed", seed, "Run seed (initialization, batch order, split)");
  app.add_option("--out", g.out, "Output directory");

  Overrides o;
  auto add_data = [&](CLI::App *cmd) {
    cmd->add_option("--manifest", o.manifest, "Manifest (JSON lines)");
    cmd->add_option("--split-file", o.split_file, "Existing split file");
  };

  auto *synth = app.add_subcommand("synth", "Write a small synthetic demo corpus");
  int count = 10, width = 16, height = 16;
  synth->add_option("--count", count)->check(CLI::PositiveNumber);
  synth->add_option("--width", width)->check(CLI::PositiveNumber);
  synth->add_option("--height", height)->check(CLI::PositiveNumber);

  auto *prepare = app.add_subcommand("prepare", "Validate a manifest and write the split file");
  add_data(prepare);

  auto *train = app.add_subcommand("train", "Train and write a checkpoint and loss log");
  add_data(train);
  train->add_option("--mode", o.mode, "single_text | single_vision | multitask");
  train->add_option("--epochs", o.epochs);
  train->add_option("--batch-size", o.batch_size);
  train->add_option("--lr", o.learning_rate);
  train->add_option("--repeats", o.repeats, "Independent runs with consecutive seeds");

  std::string checkpoint, split_name = "test";
  auto *eval = app.add_subcommand("eval", "Score a checkpoint on a split");
  add_data(eval);
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split_name)->check(CLI::IsMember({"train", "val", "test"}));

  std::string image, text, gold_mask;
  std::vector<int> gold_rationale;
  auto *explain = app.add_subcommand("explain", "Explain one meme: rationale, mask and overlay");
  explain->add_option("--checkpoint", checkpoint)->required();
  explain->add_option("--image", image)->required();
  explain->add_option("--text", text)->required();
  explain->add_option("--gold-mask", gold_mask);
  explain->add_option("--gold-rationale", gold_rationale, "Per-token 0/1 labels")->delimiter(',');

  std::string bundle;
  auto *agree = app.add_subcommand("agree", "Inter-annotator agreement and corpus statistics");
  agree->add_option("--bundle", bundle)->required();

  std::vector<std::string> argv_storage{"memex"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto &a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (synth->parsed()) return CmdSynth(g, count, width, height, out);
    const RunConfig c = Resolve(g, o);
    if (prepare->parsed()) return CmdPrepare(c, out);
    if (train->parsed()) return CmdTrain(c, out);
    if (eval->parsed()) return CmdEval(c, checkpoint, split_name, out);
    if (explain->parsed()) return CmdExplain(c, checkpoint, image, text, gold_mask, gold_rationale, out);
    if (agree->parsed()) return CmdAgree(c, bundle, out);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError &e) {
    err << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace memex
