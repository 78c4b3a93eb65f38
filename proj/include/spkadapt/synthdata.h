// include/spkadapt/synthdata.h

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

// Synthetic two-domain speaker corpora.
//
// Features follow a speaker -> utterance -> segment Gaussian hierarchy.  A
// speaker mean lives in the first `speaker_rank` feature dimensions; every
// utterance adds an isotropic offset (a stand-in for channel and session),
// and every segment adds isotropic noise.  The target domain is additionally
// passed through an affine map x -> A x + b.

#ifndef SPKADAPT_SYNTHDATA_H_
#define SPKADAPT_SYNTHDATA_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spkadapt/eval.h"
#include "spkadapt/numgrad.h"

namespace spkadapt {

struct AffineShift {
  Tensor matrix;  // F x F
  Tensor offset;  // F

  static AffineShift Identity(std::size_t dim);
  /// A = Q R Q^T, Q a random orthonormal basis and R rotating consecutive
  /// basis pairs by `angle` radians; b a random direction of norm
  /// `offset_norm`.
  static AffineShift RandomRotation(std::size_t dim, double angle,
                                    double offset_norm, std::uint64_t seed);

  double ConditionNumber() const;
  std::vector<double> Apply(std::span<const double> x) const;
};

struct DomainConfig {
  std::string domain = "source";
  std::size_t n_speakers = 200;  // training speakers
  std::size_t n_eval_speakers = 40;
  std::size_t utts_per_speaker = 10;
  std::size_t segs_per_utt = 4;
  std::size_t feature_dim = 20;
  std::size_t speaker_rank = 8;
  double speaker_spread = 1.0;
  double utt_spread = 0.6;
  double seg_noise = 0.45;
  std::optional<AffineShift> shift;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on zero counts, non-hierarchical spreads
  /// (need 0 <= seg_noise < utt_spread < speaker_spread) or a shift whose
  /// condition number exceeds 10.
  void Validate() const;
};

/// Desk-scale defaults: a large labeled source domain and a smaller target
/// domain behind a rotation plus offset.
inline constexpr double kDefaultShiftAngle = 1.0;
inline constexpr double kDefaultShiftOffset = 2.0;
/// Seed of the default target shift, derived from the domain seed.
std::uint64_t ShiftSeed(std::uint64_t domain_seed);
DomainConfig DefaultSourceConfig(std::uint64_t seed);
DomainConfig DefaultTargetConfig(std::uint64_t seed);

enum class Split { kTrain, kEval };

struct Utterance {
  std::string id;
  Split split = Split::kTrain;
  std::vector<std::vector<double>> segments;
};

/// Copies carry the current read count.
class AccessCounter {
 public:
  AccessCounter() = default;
  AccessCounter(const AccessCounter &o) : n_(o.n_.load()) {}
  AccessCounter &operator=(const AccessCounter &o) {
    n_ = o.n_.load();
    return *this;
  }
  void Bump() const { n_.fetch_add(1, std::memory_order_relaxed); }
  std::size_t Count() const { return n_.load(); }

 private:
  mutable std::atomic<std::size_t> n_{0};
};

/// Utterance ids have the form "<domain>-<train|eval>-<index>".  Speaker
/// labels are kept apart from the utterances and every read through
/// SpeakerLabel() is counted, so callers can prove labels were never used.
class SyntheticCorpus {
 public:
  SyntheticCorpus() = default;
  explicit SyntheticCorpus(std::string domain) : domain_(std::move(domain)) {}

  void AddUtterance(Utterance utt, int speaker_label);

  const std::string &Domain() const { return domain_; }
  std::size_t NumUtterances() const { return utts_.size(); }
  std::size_t FeatureDim() const;
  const Utterance &Utt(std::size_t index) const { return utts_.at(index); }
  /// Index of the utterance with this id, or nullopt.
  std::optional<std::size_t> Find(const std::string &id) const;

  std::vector<std::size_t> UtterancesIn(Split split) const;
  /// Labels of training utterances are 0 .. NumTrainSpeakers() - 1.
  std::size_t NumTrainSpeakers() const { return num_train_speakers_; }
  std::size_t NumSegments() const;

  int SpeakerLabel(std::size_t utt_index) const;
  std::size_t LabelReads() const { return label_reads_.Count(); }

 private:
  friend void WriteCorpus(std::ostream &out, const SyntheticCorpus &corpus);

  std::string domain_;
  std::vector<Utterance> utts_;
  std::vector<int> labels_;
  std::map<std::string, std::size_t> index_;
  std::size_t num_train_speakers_ = 0;
  AccessCounter label_reads_;
};

SyntheticCorpus Generate(const DomainConfig &cfg);

/// Target and nontarget utterance pairs drawn from the eval split.  Targets
/// share a speaker, nontargets do not, enroll != test.  Deterministic per
/// seed; impossible counts raise std::invalid_argument.
TrialList SplitTrials(const SyntheticCorpus &corpus, std::size_t n_target_pairs,
                      std::size_t n_nontarget_pairs, std::uint64_t seed);

// Corpus file: one line per segment, "utterance_id<TAB>speaker_label<TAB>
// v1 ... vF" with space-separated values, segments of an utterance adjacent.
// Serialization does not count as a label read.
void WriteCorpus(std::ostream &out, const SyntheticCorpus &corpus);
SyntheticCorpus ReadCorpus(std::istream &in, const std::string &what);

}  // namespace spkadapt

#endif  // SPKADAPT_SYNTHDATA_H_
