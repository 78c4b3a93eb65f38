// include/spkadapt/objectives.h

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

// Contrastive and classification objectives over segment embeddings.  Every
// loss returns its value together with exact gradients w.r.t. its inputs.

#ifndef SPKADAPT_OBJECTIVES_H_
#define SPKADAPT_OBJECTIVES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spkadapt/numgrad.h"

namespace spkadapt {

struct LossConfig {
  double margin_m = 4.0;
  double temperature_tau = 32.0;
  double lambda_weight = 1.0;
  double aam_margin_source = 0.2;
  double aam_margin_target = 0.15;
  double aam_scale = 32.0;

  /// Throws std::invalid_argument naming the first offending field.
  void Validate() const;
};

/// N utterances x M segments x D dims, x(j, i) being segment i of
/// utterance j.  N >= 2, M >= 2 and no embedding is all-zero.
class EmbeddingBatch {
 public:
  explicit EmbeddingBatch(Tensor x);
  EmbeddingBatch(std::size_t n, std::size_t m, std::size_t d,
                 std::vector<double> values);

  std::size_t N() const { return x_.Dim(0); }
  std::size_t M() const { return x_.Dim(1); }
  std::size_t D() const { return x_.Dim(2); }
  const Tensor &Values() const { return x_; }
  std::span<const double> Segment(std::size_t j, std::size_t i) const {
    return x_.Row(j * M() + i);
  }

 private:
  Tensor x_;
};

/// full: N x D mean over all M segments.  leave_one_out: N x M x D, entry
/// (j, i) the mean over the segments of utterance j other than i.
struct CentroidSet {
  Tensor full;
  Tensor leave_one_out;
};

CentroidSet ComputeCentroids(const EmbeddingBatch &batch);

struct ScoreMatrix {
  Tensor proto_scores;  // N x N, query j against centroid k
  Tensor ge2e_scores;   // N x M x N, segment (j, i) against centroid k
};

ScoreMatrix ComputeScores(const EmbeddingBatch &batch, const LossConfig &cfg);

/// k*(j) = argmin_{k != j} |x(j,1) - x(k,2)|^2, ties to the smallest k.
/// Requires M == 2.
std::vector<std::size_t> HardNegatives(const EmbeddingBatch &batch);

enum class LossKind {
  kContrastive,      // L_C
  kTriplet,          // L_T
  kProto,            // L_P
  kGe2e,             // L_G
  kClassification,   // L_cla
  kContrastiveTerm,  // L_cl (generic contrastive term of a joint loss)
  kTotal,            // L_total
};

std::string LossKindName(LossKind kind);

/// Gradient keys: "embeddings" for batch losses (shape of the input),
/// "logits" for SoftmaxCeLoss, "embeddings" and "class_weights" for
/// AamSoftmaxLoss.  JointLoss prefixes keys with "cla/" and "cl/".
struct LossOutput {
  LossKind kind = LossKind::kTotal;
  double value = 0.0;
  ParamMap grads;
};

LossOutput ContrastiveLoss(const EmbeddingBatch &batch, const LossConfig &cfg);
LossOutput TripletLoss(const EmbeddingBatch &batch, const LossConfig &cfg);
LossOutput ProtoLoss(const EmbeddingBatch &batch, const LossConfig &cfg);
LossOutput Ge2eLoss(const EmbeddingBatch &batch, const LossConfig &cfg);

/// Mean negative log-softmax of the true class over the rows of a B x C
/// logit matrix.
LossOutput SoftmaxCeLoss(const Tensor &logits, std::span<const int> labels);

/// Additive angular margin softmax: logits scale * cos(theta_bc) with the
/// true-class angle replaced by theta + margin, followed by softmax
/// cross-entropy.  embeddings is B x D, class_weights is C x D.
LossOutput AamSoftmaxLoss(const Tensor &embeddings, const Tensor &class_weights,
                          std::span<const int> labels, double margin,
                          double scale);

/// value = cla + lambda * cl.  Gradients of cl are scaled by lambda.
LossOutput JointLoss(const LossOutput &cla, const LossOutput &cl,
                     const LossConfig &cfg);

}  // namespace spkadapt

#endif  // SPKADAPT_OBJECTIVES_H_
