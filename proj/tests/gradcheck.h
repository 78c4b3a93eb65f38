// tests/gradcheck.h

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

// Finite-difference check of a loss composed with the encoder, with respect
// to every encoder and head parameter.

#ifndef SPKADAPT_TESTS_GRADCHECK_H_
#define SPKADAPT_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spkadapt/encoder.h"
#include "spkadapt/numgrad.h"
#include "spkadapt/objectives.h"

namespace spkadapt::gradcheck {

enum class Objective { kContrastive, kTriplet, kProto, kGe2e, kSoftmax, kAam };

inline const char *Name(Objective o) {
  switch (o) {
    case Objective::kContrastive: return "contrastive";
    case Objective::kTriplet: return "triplet";
    case Objective::kProto: return "proto";
    case Objective::kGe2e: return "ge2e";
    case Objective::kSoftmax: return "softmax";
    case Objective::kAam: return "aam";
  }
  return "?";
}

struct Problem {
  Objective objective;
  EncoderParams params;
  Tensor features;
  std::vector<int> labels;
  std::size_t n = 0, m = 0;
  LossConfig loss;
};

inline bool IsPairLoss(Objective o) {
  return o == Objective::kContrastive || o == Objective::kTriplet;
}

inline bool IsClassifier(Objective o) {
  return o == Objective::kSoftmax || o == Objective::kAam;
}

// Loss and d loss / d embeddings (B x D), plus the head gradient if any.
inline LossOutput Evaluate(const Problem &p, const EncoderParams &params,
                           const Tensor &emb) {
  const std::size_t b = emb.Dim(0), d = emb.Dim(1);
  LossOutput out;
  if (IsClassifier(p.objective)) {
    if (p.objective == Objective::kAam) {
      out = AamSoftmaxLoss(emb, params.source_head, p.labels,
                           p.loss.aam_margin_source, p.loss.aam_scale);
      out.grads["head.source"] = out.grads.at("class_weights");
      out.grads.erase("class_weights");
      return out;
    }
    const Tensor &w = params.source_head;
    const std::size_t c = w.Dim(0);
    Tensor logits({b, c});
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t k = 0; k < c; ++k) logits.At(r, k) = Dot(emb.Row(r), w.Row(k));
    LossOutput ce = SoftmaxCeLoss(logits, p.labels);
    const Tensor &gl = ce.grads.at("logits");
    Tensor ge({b, d}), gw({c, d});
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t k = 0; k < c; ++k)
        for (std::size_t t = 0; t < d; ++t) {
          ge.At(r, t) += gl.At(r, k) * w.At(k, t);
          gw.At(k, t) += gl.At(r, k) * emb.At(r, t);
        }
    out.value = ce.value;
    out.grads["embeddings"] = ge;
    out.grads["head.source"] = gw;
    return out;
  }
  EmbeddingBatch batch(Tensor({p.n, p.m, d},
                              std::vector<double>(emb.Values().begin(), emb.Values().end())));
  switch (p.objective) {
    case Objective::kContrastive: out = ContrastiveLoss(batch, p.loss); break;
    case Objective::kTriplet: out = TripletLoss(batch, p.loss); break;
    case Objective::kProto: out = ProtoLoss(batch, p.loss); break;
    default: out = Ge2eLoss(batch, p.loss); break;
  }
  Tensor g = out.grads.at("embeddings");
  out.grads["embeddings"] = Tensor({b, d}, std::vector<double>(g.Values().begin(), g.Values().end()));
  return out;
}

// True if the pair losses sit at least `slack` away from every hinge and
// every hard-negative tie, so finite differences see a smooth function.
inline bool AwayFromKinks(const Problem &p, const Tensor &emb, double slack) {
  if (!IsPairLoss(p.objective)) return true;
  auto seg = [&](std::size_t j, std::size_t i) { return emb.Row(j * 2 + i); };
  for (std::size_t j = 0; j < p.n; ++j) {
    std::vector<double> d;
    for (std::size_t k = 0; k < p.n; ++k)
      if (k != j) d.push_back(SqL2Dist(seg(j, 0), seg(k, 1)));
    std::sort(d.begin(), d.end());
    if (d.size() > 1 && d[1] - d[0] <= slack) return false;
    const double pos = SqL2Dist(seg(j, 0), seg(j, 1));
    const double active = p.objective == Objective::kContrastive
                              ? p.loss.margin_m - d[0]
                              : pos - d[0] + p.loss.margin_m;
    if (std::abs(active) <= slack) return false;
  }
  return true;
}

inline Problem MakeProblem(Objective o, std::uint64_t seed) {
  Problem p;
  p.objective = o;
  EncoderDims dims;
  dims.input_dim = 6;
  dims.hidden = {5};
  dims.embedding_dim = 4;
  dims.source_classes = 3;
  p.params = InitParams(seed, dims);
  p.n = 4;
  p.m = IsPairLoss(o) ? 2 : 3;
  const std::size_t b = IsClassifier(o) ? 8 : p.n * p.m;
  p.features = Tensor({b, dims.input_dim});
  std::mt19937_64 rng(seed * 7919 + 1);
  std::normal_distribution<double> g;
  for (double &v : p.features.Values()) v = g(rng);
  for (std::size_t r = 0; r < b; ++r) p.labels.push_back(static_cast<int>(r % 3));
  return p;
}

struct Outcome {
  double max_rel_error = 0.0;
  std::string worst;
  std::uint64_t seed_used = 0;
};

// Draws problems from `seed` onwards until one is away from the kinks, then
// compares analytic and central-difference gradients.  With
// skip_translation_null the last-layer bias of the pair losses is left out:
// squared distances do not see a common shift, so its gradient is exactly
// zero and the difference quotient there is pure rounding noise.
inline Outcome Check(Objective o, std::uint64_t seed, double h = 1e-4,
                     bool skip_translation_null = false) {
  for (std::uint64_t s = seed;; s += 1000003) {
    Problem p = MakeProblem(o, s);
    ForwardCache cache;
    Tensor emb = Forward(p.params, p.features, &cache);
    if (!AwayFromKinks(p, emb, 1e-2)) continue;

    LossOutput out = Evaluate(p, p.params, emb);
    EncoderParams grads = p.params.ZerosLike();
    Backward(p.params, cache, out.grads.at("embeddings"), &grads);
    ParamMap analytic = grads.ToParamMap();
    if (IsClassifier(o)) analytic["head.source"] = out.grads.at("head.source");

    ParamMap point = p.params.ToParamMap();
    auto f = [&](const ParamMap &q) {
      EncoderParams e = p.params;
      e.AssignFrom(q);
      return Evaluate(p, e, Forward(e, p.features)).value;
    };
    ParamMap numeric = FiniteDiffGrad(f, point, h);
    if (!IsClassifier(o)) {
      numeric.erase("head.source");
      analytic.erase("head.source");
    }
    if (skip_translation_null && IsPairLoss(o)) {
      const std::string last = "layer" + std::to_string(p.params.layers.size() - 1) + ".bias";
      numeric.erase(last);
      analytic.erase(last);
    }
    GradCheckResult r = CompareGradients(analytic, numeric);
    return {r.max_rel_error, r.worst_coordinate, s};
  }
}

}  // namespace spkadapt::gradcheck

#endif  // SPKADAPT_TESTS_GRADCHECK_H_
