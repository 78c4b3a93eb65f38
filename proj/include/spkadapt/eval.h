// include/spkadapt/eval.h

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

// Cosine trial scoring and equal error rate.

#ifndef SPKADAPT_EVAL_H_
#define SPKADAPT_EVAL_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spkadapt {

struct Trial {
  bool target = false;
  std::string enroll_id;
  std::string test_id;

  bool operator==(const Trial &) const = default;
};

using TrialList = std::vector<Trial>;

/// Parallel label/score arrays, in trial order.
struct ScoreSet {
  std::vector<bool> target;
  std::vector<double> score;
};

using EmbeddingTable = std::map<std::string, std::vector<double>>;

/// score[i] = cosine(embeddings[enroll_i], embeddings[test_i]).  A missing id
/// raises std::runtime_error naming it.
ScoreSet ScoreTrials(const EmbeddingTable &embeddings, const TrialList &trials);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/**
   Equal error rate of a score set.

   At threshold t, FAR(t) is the fraction of nontarget scores >= t and FRR(t)
   the fraction of target scores < t.  Among the distinct scores of the set we
   pick the threshold minimizing |FAR - FRR|, the lowest such threshold on
   ties, and report (FAR + FRR) / 2 there.  Comparisons of |FAR - FRR| are
   carried out on integer counts so the choice never depends on rounding.
   Requires at least one target and one nontarget score.
*/
EerResult ComputeEer(const ScoreSet &scores);

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
double Median(std::vector<double> values);

// Trial file: "label enroll test" per line, label 1 = target, 0 = nontarget.
TrialList ReadTrials(std::istream &in, const std::string &what);
void WriteTrials(std::ostream &out, const TrialList &trials);

// Score file: trial line followed by the score.
void WriteScores(std::ostream &out, const TrialList &trials,
                 const ScoreSet &scores);
ScoreSet ReadScores(std::istream &in, const std::string &what);

// Embedding file: "id v1 ... vD" per line.
EmbeddingTable ReadEmbeddings(std::istream &in, const std::string &what);
void WriteEmbeddings(std::ostream &out, const EmbeddingTable &table);

}  // namespace spkadapt

#endif  // SPKADAPT_EVAL_H_
