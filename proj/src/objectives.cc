// src/objectives.cc

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

#include "spkadapt/objectives.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spkadapt {

namespace {

void Require(bool cond, const std::string &msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void RequireTwoSegments(const EmbeddingBatch &batch, const char *who) {
  Require(batch.M() == 2, std::string(who) + ": requires M == 2, got M = " +
                              std::to_string(batch.M()));
}

// Log-softmax probabilities of one score row, returns -log p[target].
double SoftmaxRow(std::span<const double> scores, std::size_t target,
                  std::span<double> probs) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    probs[k] = std::exp(scores[k] - mx);
    sum += probs[k];
  }
  for (double &p : probs) p /= sum;
  return std::log(sum) + mx - scores[target];
}

}  // namespace

void LossConfig::Validate() const {
  Require(margin_m > 0.0, "LossConfig: margin_m must be > 0");
  Require(temperature_tau > 0.0, "LossConfig: temperature_tau must be > 0");
  Require(lambda_weight >= 0.0, "LossConfig: lambda_weight must be >= 0");
  const double half_pi = std::numbers::pi / 2.0;
  Require(aam_margin_source >= 0.0 && aam_margin_source < half_pi,
          "LossConfig: aam_margin_source must be in [0, pi/2)");
  Require(aam_margin_target >= 0.0 && aam_margin_target < half_pi,
          "LossConfig: aam_margin_target must be in [0, pi/2)");
  Require(aam_scale > 0.0, "LossConfig: aam_scale must be > 0");
}

EmbeddingBatch::EmbeddingBatch(Tensor x) : x_(std::move(x)) {
  Require(x_.Rank() == 3, "EmbeddingBatch: expected an N x M x D tensor, got " +
                              ShapeString(x_.Shape()));
  Require(N() >= 2, "EmbeddingBatch: N >= 2 required (negatives must exist)");
  Require(M() >= 2, "EmbeddingBatch: M >= 2 required (positives must exist)");
  Require(D() >= 1, "EmbeddingBatch: D >= 1 required");
  for (std::size_t r = 0; r < x_.NumRows(); ++r) {
    if (Norm(x_.Row(r)) == 0.0) {
      throw std::invalid_argument("EmbeddingBatch: all-zero embedding at (" +
                                  std::to_string(r / M()) + ", " +
                                  std::to_string(r % M()) + ")");
    }
  }
}

EmbeddingBatch::EmbeddingBatch(std::size_t n, std::size_t m, std::size_t d,
                               std::vector<double> values)
    : EmbeddingBatch(Tensor({n, m, d}, std::move(values))) {}

CentroidSet ComputeCentroids(const EmbeddingBatch &batch) {
  const std::size_t n = batch.N(), m = batch.M(), d = batch.D();
  CentroidSet c{Tensor({n, d}), Tensor({n, m, d})};
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> sum(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      auto x = batch.Segment(j, i);
      for (std::size_t t = 0; t < d; ++t) sum[t] += x[t];
    }
    for (std::size_t t = 0; t < d; ++t) c.full.At(j, t) = sum[t] / m;
    for (std::size_t i = 0; i < m; ++i) {
      auto x = batch.Segment(j, i);
      // With M == 2 the other segment is copied exactly instead of being
      // recovered from (sum - x), which would round.
      if (m == 2) {
        auto other = batch.Segment(j, 1 - i);
        for (std::size_t t = 0; t < d; ++t) c.leave_one_out.At(j, i, t) = other[t];
        continue;
      }
      for (std::size_t t = 0; t < d; ++t)
        c.leave_one_out.At(j, i, t) = (sum[t] - x[t]) / (m - 1);
    }
  }
  return c;
}

ScoreMatrix ComputeScores(const EmbeddingBatch &batch, const LossConfig &cfg) {
  const std::size_t n = batch.N(), m = batch.M();
  const double tau = cfg.temperature_tau;
  const CentroidSet c = ComputeCentroids(batch);
  ScoreMatrix s{Tensor({n, n}), Tensor({n, m, n})};
  for (std::size_t j = 0; j < n; ++j) {
    auto query = batch.Segment(j, m - 1);
    for (std::size_t k = 0; k < n; ++k) {
      auto proto = c.leave_one_out.Row(k * m + (m - 1));
      s.proto_scores.At(j, k) = tau * Cosine(query, proto);
    }
    for (std::size_t i = 0; i < m; ++i) {
      auto x = batch.Segment(j, i);
      for (std::size_t k = 0; k < n; ++k) {
        auto centroid =
            k == j ? c.leave_one_out.Row(j * m + i) : c.full.Row(k);
        s.ge2e_scores.At(j, i, k) = tau * Cosine(x, centroid);
      }
    }
  }
  return s;
}

std::vector<std::size_t> HardNegatives(const EmbeddingBatch &batch) {
  RequireTwoSegments(batch, "HardNegatives");
  const std::size_t n = batch.N();
  std::vector<std::size_t> hard(n);
  for (std::size_t j = 0; j < n; ++j) {
    double best = 0.0;
    bool found = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double dist = SqL2Dist(batch.Segment(j, 0), batch.Segment(k, 1));
      if (!found || dist < best) {
        best = dist;
        hard[j] = k;
        found = true;
      }
    }
  }
  return hard;
}

std::string LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kContrastive: return "L_C";
    case LossKind::kTriplet: return "L_T";
    case LossKind::kProto: return "L_P";
    case LossKind::kGe2e: return "L_G";
    case LossKind::kClassification: return "L_cla";
    case LossKind::kContrastiveTerm: return "L_cl";
    case LossKind::kTotal: return "L_total";
  }
  return "unknown";
}

LossOutput ContrastiveLoss(const EmbeddingBatch &batch, const LossConfig &cfg) {
  RequireTwoSegments(batch, "ContrastiveLoss");
  const std::size_t n = batch.N(), d = batch.D();
  const std::vector<std::size_t> hard = HardNegatives(batch);
  Tensor grad(batch.Values().Shape());
  double pos = 0.0, neg = 0.0;
  const double scale = 2.0 / n;
  for (std::size_t j = 0; j < n; ++j) {
    auto a = batch.Segment(j, 0), p = batch.Segment(j, 1);
    pos += SqL2Dist(a, p);
    auto ga = grad.Row(j * 2), gp = grad.Row(j * 2 + 1);
    for (std::size_t t = 0; t < d; ++t) {
      ga[t] += scale * (a[t] - p[t]);
      gp[t] -= scale * (a[t] - p[t]);
    }
    const std::size_t k = hard[j];
    auto q = batch.Segment(k, 1);
    const double hinge = cfg.margin_m - SqL2Dist(a, q);
    if (hinge > 0.0) {
      neg += hinge;
      auto gq = grad.Row(k * 2 + 1);
      for (std::size_t t = 0; t < d; ++t) {
        ga[t] -= scale * (a[t] - q[t]);
        gq[t] += scale * (a[t] - q[t]);
      }
    }
  }
  LossOutput out{LossKind::kContrastive, (pos + neg) / n, {}};
  out.grads.emplace("embeddings", std::move(grad));
  return out;
}

LossOutput TripletLoss(const EmbeddingBatch &batch, const LossConfig &cfg) {
  RequireTwoSegments(batch, "TripletLoss");
  const std::size_t n = batch.N(), d = batch.D();
  const std::vector<std::size_t> hard = HardNegatives(batch);
  Tensor grad(batch.Values().Shape());
  double total = 0.0;
  const double scale = 2.0 / n;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = hard[j];
    auto a = batch.Segment(j, 0), p = batch.Segment(j, 1),
         q = batch.Segment(k, 1);
    const double hinge = SqL2Dist(a, p) - SqL2Dist(a, q) + cfg.margin_m;
    if (hinge <= 0.0) continue;
    total += hinge;
    auto ga = grad.Row(j * 2), gp = grad.Row(j * 2 + 1),
         gq = grad.Row(k * 2 + 1);
    for (std::size_t t = 0; t < d; ++t) {
      // d/da (|a-p|^2 - |a-q|^2) = 2 (q - p)
      ga[t] += scale * (q[t] - p[t]);
      gp[t] -= scale * (a[t] - p[t]);
      gq[t] += scale * (a[t] - q[t]);
    }
  }
  LossOutput out{LossKind::kTriplet, total / n, {}};
  out.grads.emplace("embeddings", std::move(grad));
  return out;
}

LossOutput ProtoLoss(const EmbeddingBatch &batch, const LossConfig &cfg) {
  const std::size_t n = batch.N(), m = batch.M(), d = batch.D();
  const double tau = cfg.temperature_tau;
  const CentroidSet c = ComputeCentroids(batch);
  Tensor grad(batch.Values().Shape());
  // Gradient w.r.t. each support centroid, distributed afterwards.
  Tensor centroid_grad({n, d});
  std::vector<double> scores(n), probs(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    auto query = batch.Segment(j, m - 1);
    for (std::size_t k = 0; k < n; ++k)
      scores[k] = tau * Cosine(query, c.leave_one_out.Row(k * m + m - 1));
    total += SoftmaxRow(scores, j, probs);
    for (std::size_t k = 0; k < n; ++k) {
      const double g = (probs[k] - (k == j ? 1.0 : 0.0)) * tau / n;
      CosineBackward(query, c.leave_one_out.Row(k * m + m - 1), g,
                     grad.Row(j * m + m - 1), centroid_grad.Row(k));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto gc = centroid_grad.Row(k);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      auto gx = grad.Row(k * m + i);
      for (std::size_t t = 0; t < d; ++t) gx[t] += gc[t] / (m - 1);
    }
  }
  LossOutput out{LossKind::kProto, total / n, {}};
  out.grads.emplace("embeddings", std::move(grad));
  return out;
}

LossOutput Ge2eLoss(const EmbeddingBatch &batch, const LossConfig &cfg) {
  const std::size_t n = batch.N(), m = batch.M(), d = batch.D();
  const double tau = cfg.temperature_tau;
  const CentroidSet c = ComputeCentroids(batch);
  Tensor grad(batch.Values().Shape());
  Tensor full_grad({n, d});
  Tensor loo_grad({n, m, d});
  std::vector<double> scores(n), probs(n);
  double total = 0.0;
  const double norm = 1.0 / static_cast<double>(n * m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      auto x = batch.Segment(j, i);
      for (std::size_t k = 0; k < n; ++k) {
        auto centroid =
            k == j ? c.leave_one_out.Row(j * m + i) : c.full.Row(k);
        scores[k] = tau * Cosine(x, centroid);
      }
      total += SoftmaxRow(scores, j, probs);
      for (std::size_t k = 0; k < n; ++k) {
        const double g = (probs[k] - (k == j ? 1.0 : 0.0)) * tau * norm;
        if (k == j) {
          CosineBackward(x, c.leave_one_out.Row(j * m + i), g,
                         grad.Row(j * m + i), loo_grad.Row(j * m + i));
        } else {
          CosineBackward(x, c.full.Row(k), g, grad.Row(j * m + i),
                         full_grad.Row(k));
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto gf = full_grad.Row(k);
    for (std::size_t i = 0; i < m; ++i) {
      auto gx = grad.Row(k * m + i);
      for (std::size_t t = 0; t < d; ++t) gx[t] += gf[t] / m;
    }
    for (std::size_t i = 0; i < m; ++i) {
      auto gl = loo_grad.Row(k * m + i);
      for (std::size_t other = 0; other < m; ++other) {
        if (other == i) continue;
        auto gx = grad.Row(k * m + other);
        for (std::size_t t = 0; t < d; ++t) gx[t] += gl[t] / (m - 1);
      }
    }
  }
  LossOutput out{LossKind::kGe2e, total * norm, {}};
  out.grads.emplace("embeddings", std::move(grad));
  return out;
}

LossOutput SoftmaxCeLoss(const Tensor &logits, std::span<const int> labels) {
  Require(logits.Rank() == 2, "SoftmaxCeLoss: logits must be B x C");
  const std::size_t b = logits.Dim(0), c = logits.Dim(1);
  Require(labels.size() == b, "SoftmaxCeLoss: expected " + std::to_string(b) +
                                  " labels, got " +
                                  std::to_string(labels.size()));
  Require(b > 0 && c > 0, "SoftmaxCeLoss: empty logits");
  Tensor grad({b, c});
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw std::invalid_argument("SoftmaxCeLoss: label " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(c) +
                                  ")");
    }
    auto g = grad.Row(r);
    total += SoftmaxRow(logits.Row(r), static_cast<std::size_t>(y), g);
    g[y] -= 1.0;
    for (double &v : g) v /= b;
  }
  LossOutput out{LossKind::kClassification, total / b, {}};
  out.grads.emplace("logits", std::move(grad));
  return out;
}

LossOutput AamSoftmaxLoss(const Tensor &embeddings, const Tensor &class_weights,
                          std::span<const int> labels, double margin,
                          double scale) {
  Require(embeddings.Rank() == 2 && class_weights.Rank() == 2,
          "AamSoftmaxLoss: embeddings and class_weights must be matrices");
  const std::size_t b = embeddings.Dim(0), d = embeddings.Dim(1);
  const std::size_t c = class_weights.Dim(0);
  Require(class_weights.Dim(1) == d,
          "AamSoftmaxLoss: embedding dim " + std::to_string(d) +
              " vs class weight dim " + std::to_string(class_weights.Dim(1)));
  Require(labels.size() == b, "AamSoftmaxLoss: label count mismatch");
  for (std::size_t r = 0; r < b; ++r)
    Require(Norm(embeddings.Row(r)) > 0.0,
            "AamSoftmaxLoss: zero-norm embedding row " + std::to_string(r));
  for (std::size_t k = 0; k < c; ++k)
    Require(Norm(class_weights.Row(k)) > 0.0,
            "AamSoftmaxLoss: zero-norm class weight row " + std::to_string(k));

  const double cos_m = std::cos(margin), sin_m = std::sin(margin);
  Tensor logits({b, c});
  Tensor cosines({b, c});
  for (std::size_t r = 0; r < b; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw std::invalid_argument("AamSoftmaxLoss: label " + std::to_string(y) +
                                  " out of range");
    for (std::size_t k = 0; k < c; ++k) {
      const double cs =
          std::clamp(Cosine(embeddings.Row(r), class_weights.Row(k)), -1.0, 1.0);
      cosines.At(r, k) = cs;
      if (k == static_cast<std::size_t>(y)) {
        // cos(theta + m) = cos(theta) cos(m) - sin(theta) sin(m)
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cs * cs));
        logits.At(r, k) = scale * (cs * cos_m - sin_t * sin_m);
      } else {
        logits.At(r, k) = scale * cs;
      }
    }
  }
  LossOutput ce = SoftmaxCeLoss(logits, labels);
  const Tensor &glogits = ce.grads.at("logits");

  Tensor gemb({b, d});
  Tensor gw({c, d});
  for (std::size_t r = 0; r < b; ++r) {
    const std::size_t y = static_cast<std::size_t>(labels[r]);
    for (std::size_t k = 0; k < c; ++k) {
      double dcos = scale * glogits.At(r, k);
      if (k == y) {
        const double cs = cosines.At(r, k);
        // Floor on sin(theta): the derivative is unbounded at theta = 0.
        const double sin_t = std::max(std::sqrt(std::max(0.0, 1.0 - cs * cs)),
                                      1e-6);
        dcos *= cos_m + sin_m * cs / sin_t;
      }
      if (dcos == 0.0) continue;
      CosineBackward(embeddings.Row(r), class_weights.Row(k), dcos,
                     gemb.Row(r), gw.Row(k));
    }
  }
  LossOutput out{LossKind::kClassification, ce.value, {}};
  out.grads.emplace("embeddings", std::move(gemb));
  out.grads.emplace("class_weights", std::move(gw));
  return out;
}

LossOutput JointLoss(const LossOutput &cla, const LossOutput &cl,
                     const LossConfig &cfg) {
  Require(std::isfinite(cla.value) && std::isfinite(cl.value),
          "JointLoss: non-finite input loss");
  Require(cfg.lambda_weight >= 0.0, "JointLoss: lambda_weight must be >= 0");
  LossOutput out{LossKind::kTotal, cla.value + cfg.lambda_weight * cl.value, {}};
  for (const auto &[name, g] : cla.grads) out.grads.emplace("cla/" + name, g);
  for (const auto &[name, g] : cl.grads) {
    Tensor scaled = g;
    scaled.Scale(cfg.lambda_weight);
    out.grads.emplace("cl/" + name, std::move(scaled));
  }
  return out;
}

}  // namespace spkadapt
