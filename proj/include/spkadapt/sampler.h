// include/spkadapt/sampler.h

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

// Training batch construction.  Contrastive batches take M segments from
// each of N utterances (same utterance = positive, different = negative) and
// never touch speaker labels; labeled batches feed the classification loss.

#ifndef SPKADAPT_SAMPLER_H_
#define SPKADAPT_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spkadapt/numgrad.h"
#include "spkadapt/synthdata.h"

namespace spkadapt {

enum class BatchDomain { kSource, kTarget, kJoint };

struct BatchSpec {
  std::size_t n_utts = 32;
  std::size_t m_segs = 2;
  /// Labeled segments per step on the classification side; 0 means N * M.
  std::size_t labeled_batch = 0;
  std::uint64_t seed = 1;
  BatchDomain domain = BatchDomain::kTarget;

  std::size_t LabeledBatchSize() const {
    return labeled_batch ? labeled_batch : n_utts * m_segs;
  }
  void Validate() const;
};

struct SegmentRef {
  std::string utterance_id;
  std::size_t utterance_index = 0;
  std::size_t segment_index = 0;
  std::optional<int> speaker_label;

  bool operator==(const SegmentRef &) const = default;
};

/// refs[j * M + i] is segment i of utterance j.  No labels.
struct ContrastiveBatch {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<SegmentRef> refs;
};

struct JointBatch {
  std::vector<SegmentRef> labeled;  // source side, labels present
  ContrastiveBatch unlabeled;       // target side, labels absent
};

/// One seeded stream of batches for a training run.  Labeled and contrastive
/// draws come from separate generators, so a run that skips one kind of draw
/// sees the same sequence of the other.
class BatchSampler {
 public:
  explicit BatchSampler(const BatchSpec &spec);

  /// N distinct training utterances without replacement, then M distinct
  /// segments of each without replacement.
  ContrastiveBatch SampleContrastive(const SyntheticCorpus &corpus);

  /// `count` labeled segments: utterance uniform over the training split,
  /// segment uniform within it.  Reads one label per segment.
  std::vector<SegmentRef> SampleLabeled(const SyntheticCorpus &corpus,
                                        std::size_t count);

  JointBatch SampleJoint(const SyntheticCorpus &source,
                         const SyntheticCorpus &target);

  const BatchSpec &Spec() const { return spec_; }

 private:
  BatchSpec spec_;
  std::mt19937_64 contrastive_rng_;
  std::mt19937_64 labeled_rng_;
};

/// Single batch from a fresh sampler seeded by spec.seed.
ContrastiveBatch SampleContrastiveBatch(const SyntheticCorpus &corpus,
                                        const BatchSpec &spec);
JointBatch SampleJointBatch(const SyntheticCorpus &source,
                            const SyntheticCorpus &target,
                            const BatchSpec &spec);

/// Stacks the referenced segment features into a (#refs) x F matrix.
Tensor GatherFeatures(const SyntheticCorpus &corpus,
                      const std::vector<SegmentRef> &refs);

/// Labels carried by labeled refs; throws if any ref lacks one.
std::vector<int> RefLabels(const std::vector<SegmentRef> &refs);

/// Deterministic sub-seed derived from a root seed and a component name.
std::uint64_t DeriveSeed(std::uint64_t root, const std::string &name);

}  // namespace spkadapt

#endif  // SPKADAPT_SAMPLER_H_
