// include/spkadapt/experiment_config.h

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

// Experiment description shared by the command-line tools: both domain
// configs, trial sizes, training setup and output location, read from an
// INI-style file.  One root seed is expanded into named sub-seeds.
//
// Example:
//
//   seed = 3
//   [output]
//   dir = exp/run1
//   [target]
//   n_speakers = 35
//   shift_angle = 1.0
//   [train]
//   regime = ssda_joint
//   contrastive_objective = ge2e
//   init_checkpoint = exp/run1/source_supervised_aam.ckpt

#ifndef SPKADAPT_EXPERIMENT_CONFIG_H_
#define SPKADAPT_EXPERIMENT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "spkadapt/synthdata.h"
#include "spkadapt/trainer.h"

namespace spkadapt {

struct SeedPlan {
  std::uint64_t root = 1;
  std::uint64_t data_source = 0;
  std::uint64_t data_target = 0;
  std::uint64_t trials_source = 0;
  std::uint64_t trials_target = 0;
  std::uint64_t sampler = 0;
  std::uint64_t init = 0;
};

SeedPlan ExpandSeeds(std::uint64_t root);

struct TrialSizes {
  std::size_t target = 1000;
  std::size_t nontarget = 5000;
};

/// Shift parameters; angle == 0 and offset == 0 means no shift.
struct ShiftSpec {
  double angle = 0.0;
  double offset = 0.0;

  bool Enabled() const { return angle != 0.0 || offset != 0.0; }
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DomainConfig source;
  DomainConfig target;
  ShiftSpec source_shift;
  ShiftSpec target_shift{kDefaultShiftAngle, kDefaultShiftOffset};
  TrialSizes source_trials;
  TrialSizes target_trials;
  /// Seeds and init are filled in by Resolve().
  TrainConfig train;
  std::string init_checkpoint;
  std::string out_dir = ".";
  std::string run_name;  // empty: "<regime>_<objective>"
  std::size_t matrix_seeds = 5;

  /// Fills domain, trial and training seeds from `seed` and rebuilds the
  /// shifts.  Does not load the init checkpoint.
  void Resolve();
  /// Throws std::invalid_argument naming the offending setting.
  void Validate() const;

  SeedPlan Seeds() const { return ExpandSeeds(seed); }
  std::string RunName() const;
  std::string SourceCorpusPath() const;
  std::string TargetCorpusPath() const;
  std::string SourceTrialsPath() const;
  std::string TargetTrialsPath() const;
  std::string ManifestPath() const;
};

/// Library defaults for `seed`, already resolved.
ExperimentConfig DefaultExperimentConfig(std::uint64_t seed);

/// Parses the INI text over the defaults, rejects unknown sections and keys,
/// resolves and validates.  Errors name `what` and the key.
ExperimentConfig ParseExperimentConfig(std::istream &in, const std::string &what);
ExperimentConfig ReadExperimentConfig(const std::string &path);

/// Changes the root seed and re-resolves.
void SetSeed(ExperimentConfig *cfg, std::uint64_t seed);

/// key=value dump of every setting plus the expanded seeds.
std::string ManifestText(const ExperimentConfig &cfg);

struct ExperimentData {
  SyntheticCorpus source;
  SyntheticCorpus target;
  TrialList source_trials;
  TrialList target_trials;

  TrainingData View() const {
    return {source, target, source_trials, target_trials};
  }
};

/// Draws both corpora and both trial lists in memory.
ExperimentData GenerateData(const ExperimentConfig &cfg);
/// Reads the four files written by the gen command.
ExperimentData LoadData(const ExperimentConfig &cfg);

}  // namespace spkadapt

#endif  // SPKADAPT_EXPERIMENT_CONFIG_H_
