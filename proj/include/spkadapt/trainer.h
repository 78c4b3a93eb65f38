// include/spkadapt/trainer.h

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

// Training regimes: supervised source training, self-supervised target
// training, adaptation from a source checkpoint (contrastive only, or jointly
// with the source classification loss) and fully supervised joint training.

#ifndef SPKADAPT_TRAINER_H_
#define SPKADAPT_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spkadapt/encoder.h"
#include "spkadapt/eval.h"
#include "spkadapt/objectives.h"
#include "spkadapt/sampler.h"
#include "spkadapt/synthdata.h"

namespace spkadapt {

enum class Regime {
  kSourceSupervised,  // classification loss on labeled source data
  kTargetSelfSup,     // contrastive loss on target data, random init
  kSsda,              // contrastive loss on target data, source init
  kSsdaJoint,         // source classification + lambda * target contrastive
  kSupervisedJoint,   // source classification + lambda * target classification
};

enum class ContrastiveObjective { kContrastive, kTriplet, kProto, kGe2e };
enum class ClassificationObjective { kSoftmax, kAam };

std::string RegimeName(Regime r);
std::string ObjectiveName(ContrastiveObjective o);
std::string ObjectiveName(ClassificationObjective o);
Regime ParseRegime(const std::string &s);
ContrastiveObjective ParseContrastiveObjective(const std::string &s);
ClassificationObjective ParseClassificationObjective(const std::string &s);

struct TrainConfig {
  Regime regime = Regime::kSourceSupervised;
  ContrastiveObjective contrastive_objective = ContrastiveObjective::kProto;
  ClassificationObjective classification_objective =
      ClassificationObjective::kAam;
  std::size_t steps = 2000;
  double learning_rate = 0.05;
  BatchSpec batch;
  LossConfig loss;
  /// Seeds parameter initialization; batch.seed drives sampling.
  std::uint64_t seed = 1;
  EncoderDims dims;
  /// Starting point; required by kSsda and kSsdaJoint.
  std::optional<EncoderParams> init;

  void Validate() const;
  /// Everything Validate() checks except the init checkpoint.
  void ValidateHyperparameters() const;
};

/// True for the regimes that start from a source-trained checkpoint.
bool RequiresInit(Regime r);

struct StepLoss {
  std::size_t step = 0;
  double total = 0.0;
  double cla = 0.0;
  double cl = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::vector<StepLoss> trace;
  EncoderParams initial_params;
  EncoderParams final_params;
  double source_eer = 0.0;
  double target_eer = 0.0;
  /// Label reads on each corpus during the run.
  std::size_t source_label_reads = 0;
  std::size_t target_label_reads = 0;
};

struct TrainingData {
  const SyntheticCorpus &source;
  const SyntheticCorpus &target;
  const TrialList &source_trials;
  const TrialList &target_trials;
};

/// Runs cfg.steps SGD steps and evaluates the final parameters on both trial
/// lists.  A non-finite loss aborts with std::runtime_error naming the step.
RunReport Train(const TrainConfig &cfg, const TrainingData &data);

/// p - lr * g, elementwise.
Tensor SgdStep(const Tensor &params, const Tensor &grads, double learning_rate);
EncoderParams SgdStep(const EncoderParams &params, const EncoderParams &grads,
                      double learning_rate);

/// Utterance embedding = mean of its segment embeddings.
EmbeddingTable ExtractEmbeddings(const EncoderParams &params,
                                 const SyntheticCorpus &corpus,
                                 const std::vector<std::string> &ids);

/// Embeds every utterance named in the trials, scores and returns the EER.
double EvaluateCheckpoint(const EncoderParams &params,
                          const SyntheticCorpus &corpus,
                          const TrialList &trials);

/// "step,loss_total,loss_cla,loss_cl" followed by one row per step.
std::string LossTraceCsv(const RunReport &report);

/// key=value lines: config echo, EERs, label read counts, final losses.
std::string FormatReport(const RunReport &report);

}  // namespace spkadapt

#endif  // SPKADAPT_TRAINER_H_
