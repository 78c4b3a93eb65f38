// tools/spkadapt.cc

// Copyright 2026  spkadapt authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: corpus generation, training, scoring and the
// regime x objective result grid.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spkadapt/encoder.h"
#include "spkadapt/eval.h"
#include "spkadapt/experiment_config.h"
#include "spkadapt/sampler.h"
#include "spkadapt/text_io.h"
#include "spkadapt/trainer.h"

namespace {

using namespace spkadapt;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig LoadConfig(const CommonArgs &args) {
  ExperimentConfig cfg = ReadExperimentConfig(args.config);
  if (!args.out.empty()) cfg.out_dir = args.out;
  if (args.seed) SetSeed(&cfg, *args.seed);
  return cfg;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out = OpenOutput(path);
  out << text;
  if (!out.flush()) throw std::runtime_error("error writing " + path);
}

std::string InDir(const ExperimentConfig &cfg, const std::string &file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

EncoderParams LoadCheckpoint(const std::string &path) {
  std::ifstream in = OpenInput(path);
  return ReadCheckpoint(in, path);
}

int Gen(const CommonArgs &args) {
  ExperimentConfig cfg = LoadConfig(args);
  std::filesystem::create_directories(cfg.out_dir);
  ExperimentData data = GenerateData(cfg);
  auto write_corpus = [](const std::string &path, const SyntheticCorpus &c) {
    std::ofstream out = OpenOutput(path);
    WriteCorpus(out, c);
    if (!out.flush()) throw std::runtime_error("error writing " + path);
  };
  auto write_trials = [](const std::string &path, const TrialList &t) {
    std::ofstream out = OpenOutput(path);
    WriteTrials(out, t);
    if (!out.flush()) throw std::runtime_error("error writing " + path);
  };
  write_corpus(cfg.SourceCorpusPath(), data.source);
  write_corpus(cfg.TargetCorpusPath(), data.target);
  write_trials(cfg.SourceTrialsPath(), data.source_trials);
  write_trials(cfg.TargetTrialsPath(), data.target_trials);
  WriteText(cfg.ManifestPath(), ManifestText(cfg));
  std::cerr << "wrote " << data.source.NumSegments() << " source and "
            << data.target.NumSegments() << " target segments to "
            << cfg.out_dir << '\n';
  return 0;
}

int TrainCmd(const CommonArgs &args) {
  ExperimentConfig cfg = LoadConfig(args);
  ExperimentData data = LoadData(cfg);
  TrainConfig tc = cfg.train;
  if (!cfg.init_checkpoint.empty()) tc.init = LoadCheckpoint(cfg.init_checkpoint);
  RunReport report = Train(tc, data.View());
  const std::string base = cfg.RunName();
  std::ostringstream ckpt;
  WriteCheckpoint(ckpt, report.final_params);
  WriteText(InDir(cfg, base + ".ckpt"), ckpt.str());
  WriteText(InDir(cfg, base + ".loss.csv"), LossTraceCsv(report));
  WriteText(InDir(cfg, base + ".report"),
            "run=" + base + "\n" + "init_checkpoint=" + cfg.init_checkpoint +
                "\n" + FormatReport(report));
  std::cout << "source_eer=" << FormatFixed(report.source_eer, 6)
            << " target_eer=" << FormatFixed(report.target_eer, 6) << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint, corpus, trials, scores;
};

int EvalCmd(const EvalArgs &args) {
  double eer;
  if (!args.scores.empty()) {
    std::ifstream in = OpenInput(args.scores);
    eer = ComputeEer(ReadScores(in, args.scores)).eer;
  } else {
    if (args.checkpoint.empty() || args.corpus.empty() || args.trials.empty())
      throw std::invalid_argument(
          "eval needs --scores, or all of --checkpoint, --corpus, --trials");
    EncoderParams params = LoadCheckpoint(args.checkpoint);
    std::ifstream cin = OpenInput(args.corpus);
    SyntheticCorpus corpus = ReadCorpus(cin, args.corpus);
    std::ifstream tin = OpenInput(args.trials);
    TrialList trials = ReadTrials(tin, args.trials);
    eer = EvaluateCheckpoint(params, corpus, trials);
  }
  std::cout << "eer=" << FormatFixed(eer, 6) << '\n';
  return 0;
}

struct Cell {
  Regime regime;
  ContrastiveObjective objective;
  std::vector<double> target_eer, source_eer;
  std::string error;
};

int Matrix(const CommonArgs &args) {
  ExperimentConfig cfg = LoadConfig(args);
  ExperimentData data = LoadData(cfg);
  const ContrastiveObjective objectives[] = {
      ContrastiveObjective::kContrastive, ContrastiveObjective::kTriplet,
      ContrastiveObjective::kProto, ContrastiveObjective::kGe2e};
  std::vector<Cell> cells;
  for (Regime r : {Regime::kSsda, Regime::kSsdaJoint})
    for (ContrastiveObjective o : objectives) cells.push_back({r, o, {}, {}, {}});

  for (std::size_t i = 0; i < cfg.matrix_seeds; ++i) {
    const SeedPlan seeds =
        ExpandSeeds(DeriveSeed(cfg.seed, "matrix." + std::to_string(i)));
    TrainConfig base = cfg.train;
    base.seed = seeds.init;
    base.batch.seed = seeds.sampler;
    base.init.reset();
    std::optional<EncoderParams> source_model;
    std::string source_error;
    try {
      TrainConfig sc = base;
      sc.regime = Regime::kSourceSupervised;
      source_model = Train(sc, data.View()).final_params;
    } catch (const std::exception &e) {
      source_error = std::string("source_supervised: ") + e.what();
    }
    for (Cell &cell : cells) {
      if (!source_model) {
        if (cell.error.empty()) cell.error = source_error;
        continue;
      }
      TrainConfig tc = base;
      tc.regime = cell.regime;
      tc.contrastive_objective = cell.objective;
      tc.init = *source_model;
      try {
        RunReport r = Train(tc, data.View());
        cell.target_eer.push_back(r.target_eer);
        cell.source_eer.push_back(r.source_eer);
      } catch (const std::exception &e) {
        if (cell.error.empty()) cell.error = e.what();
      }
      std::cerr << "seed " << i << ' ' << RegimeName(cell.regime) << ' '
                << ObjectiveName(cell.objective) << " done\n";
    }
  }

  std::ostringstream csv;
  csv << "regime,target_loss,target_eer,source_eer,seeds_ok,error\n";
  bool failed = false;
  for (const Cell &cell : cells) {
    const bool have = !cell.target_eer.empty();
    failed = failed || !cell.error.empty();
    std::string err = cell.error;
    for (char &c : err)
      if (c == ',' || c == '\n') c = ';';
    csv << RegimeName(cell.regime) << ',' << ObjectiveName(cell.objective) << ','
        << (have ? FormatFixed(Median(cell.target_eer), 6) : "nan") << ','
        << (have ? FormatFixed(Median(cell.source_eer), 6) : "nan") << ','
        << cell.target_eer.size() << ',' << err << '\n';
  }
  std::filesystem::create_directories(cfg.out_dir);
  WriteText(InDir(cfg, "matrix.csv"), csv.str());
  std::cout << csv.str();
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char *argv[]) {
  CLI::App app{
      "Speaker embedding domain adaptation on synthetic corpora.\n"
      "Usage: spkadapt <gen|train|eval|matrix> [options]\n"
      "e.g.: spkadapt gen --config exp.ini --out exp/data"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, matrix_args;
  auto add_common = [](CLI::App *cmd, CommonArgs &a) {
    cmd->add_option("--config", a.config, "Experiment config (INI)")->required();
    cmd->add_option("--out", a.out, "Output directory, overrides [output] dir");
    cmd->add_option("--seed", a.seed, "Root seed, overrides the config");
  };
  CLI::App *gen = app.add_subcommand("gen", "Write corpora, trials and manifest");
  add_common(gen, gen_args);
  CLI::App *train = app.add_subcommand(
      "train", "Train one regime; writes report, checkpoint and loss trace");
  add_common(train, train_args);
  CLI::App *matrix = app.add_subcommand(
      "matrix", "ssda and ssda_joint over the four contrastive losses");
  add_common(matrix, matrix_args);

  EvalArgs eval_args;
  CLI::App *eval = app.add_subcommand("eval", "Print the EER of a checkpoint or a score file");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Encoder checkpoint");
  eval->add_option("--corpus", eval_args.corpus, "Corpus file");
  eval->add_option("--trials", eval_args.trials, "Trial list");
  eval->add_option("--scores", eval_args.scores, "Score file instead of a checkpoint");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return Gen(gen_args);
    if (train->parsed()) return TrainCmd(train_args);
    if (eval->parsed()) return EvalCmd(eval_args);
    if (matrix->parsed()) return Matrix(matrix_args);
  } catch (const std::exception &e) {
    std::cerr << "spkadapt: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
