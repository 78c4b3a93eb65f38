// tests/objectives_test.cc

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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "spkadapt/numgrad.h"
#include "spkadapt/objectives.h"

using namespace spkadapt;

namespace {

EmbeddingBatch Constant(std::size_t n, std::size_t m, std::size_t d, double v) {
  return EmbeddingBatch(n, m, d, std::vector<double>(n * m * d, v));
}

// Utterance j sits on axis j of R^d; segment i has length 1 + i/2.
EmbeddingBatch AxisClusters(std::size_t n, std::size_t m, std::size_t d) {
  std::vector<double> v(n * m * d, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) v[(j * m + i) * d + j] = 1.0 + 0.5 * i;
  return EmbeddingBatch(n, m, d, std::move(v));
}

EmbeddingBatch Reorder(const EmbeddingBatch &b, const std::vector<std::size_t> &utt,
                       const std::vector<std::vector<std::size_t>> &seg) {
  std::vector<double> v;
  for (std::size_t j = 0; j < b.N(); ++j)
    for (std::size_t i = 0; i < b.M(); ++i) {
      auto s = b.Segment(utt[j], seg[j][i]);
      v.insert(v.end(), s.begin(), s.end());
    }
  return EmbeddingBatch(b.N(), b.M(), b.D(), std::move(v));
}

double GradError(const std::function<LossOutput(const EmbeddingBatch &)> &loss,
                 const EmbeddingBatch &b) {
  ParamMap p{{"embeddings", b.Values()}};
  auto f = [&](const ParamMap &q) {
    return loss(EmbeddingBatch(q.at("embeddings"))).value;
  };
  // Softmax terms at tau = 32 leave some coordinates with gradients near
  // 1e-11, below the rounding noise of the difference quotient, so the
  // denominator floor sits at 1e-6 instead of 1e-8.
  return CompareGradients(loss(b).grads, FiniteDiffGrad(f, p, 1e-4), 1e-6).max_rel_error;
}

}  // namespace

TEST_CASE("batch shape checks") {
  CHECK_THROWS(Constant(1, 2, 3, 1.0));
  CHECK_THROWS(Constant(2, 1, 3, 1.0));
  std::vector<double> v(2 * 2 * 3, 1.0);
  v[3] = v[4] = v[5] = 0.0;
  CHECK_THROWS(EmbeddingBatch(2, 2, 3, v));
  LossConfig bad;
  bad.margin_m = 0;
  CHECK_THROWS(bad.Validate());
  bad = LossConfig{};
  bad.aam_margin_source = std::numbers::pi / 2;
  CHECK_THROWS(bad.Validate());
}

TEST_CASE("centroids and scores") {
  EmbeddingBatch b = oracle::RandomBatch(3, 2, 4, 5);
  CentroidSet c = ComputeCentroids(b);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(c.leave_one_out.At(j, 0, t) == b.Values().At(j, 1, t));
      CHECK(c.leave_one_out.At(j, 1, t) == b.Values().At(j, 0, t));
    }
  EmbeddingBatch b3 = oracle::RandomBatch(4, 3, 5, 6);
  LossConfig cfg;
  ScoreMatrix s = ComputeScores(b3, cfg);
  for (double v : s.proto_scores.Values()) CHECK(std::abs(v) <= cfg.temperature_tau);
  for (double v : s.ge2e_scores.Values()) CHECK(std::abs(v) <= cfg.temperature_tau);
}

TEST_CASE("hard negatives match exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EmbeddingBatch b = oracle::RandomBatch(6, 2, 3, seed);
    auto x = oracle::ToNested(b);
    std::vector<std::size_t> h = HardNegatives(b);
    for (std::size_t j = 0; j < 6; ++j) CHECK(h[j] == oracle::HardNegative(x, j));
  }
  // Ties go to the smallest index.
  CHECK(HardNegatives(Constant(4, 2, 3, 1.0)) == std::vector<std::size_t>{1, 0, 0, 0});
}

TEST_CASE("contrastive and triplet closed forms") {
  LossConfig cfg;
  CHECK(std::abs(ContrastiveLoss(Constant(4, 2, 3, 0.7), cfg).value - 4.0) < 1e-9);
  CHECK(std::abs(TripletLoss(Constant(4, 2, 3, 0.7), cfg).value - 4.0) < 1e-9);

  // Identical positives, utterances 3 apart on a line: squared gaps >= 9.
  std::vector<double> v;
  for (int j = 0; j < 4; ++j) v.insert(v.end(), {3.0 * j, 1.0, 3.0 * j, 1.0});
  EmbeddingBatch sep(4, 2, 2, v);
  CHECK(ContrastiveLoss(sep, cfg).value == 0.0);
  CHECK(TripletLoss(sep, cfg).value == 0.0);
}

TEST_CASE("contrastive and triplet match the enumeration oracle") {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EmbeddingBatch b = oracle::RandomBatch(4, 2, 8, seed, 0.5);
    auto x = oracle::ToNested(b);
    CHECK(std::abs(ContrastiveLoss(b, cfg).value - oracle::Contrastive(x, 4.0)) < 1e-12);
    CHECK(std::abs(TripletLoss(b, cfg).value - oracle::Triplet(x, 4.0)) < 1e-12);
  }
  CHECK_THROWS(ContrastiveLoss(oracle::RandomBatch(4, 3, 8, 1), cfg));
  CHECK_THROWS(TripletLoss(oracle::RandomBatch(4, 3, 8, 1), cfg));
}

TEST_CASE("proto and GE2E closed forms") {
  LossConfig cfg;
  for (std::size_t m : {2, 3, 5}) {
    CHECK(std::abs(ProtoLoss(Constant(4, m, 6, 0.3), cfg).value - std::log(4.0)) < 1e-9);
    CHECK(std::abs(Ge2eLoss(Constant(4, m, 6, 0.3), cfg).value - std::log(4.0)) < 1e-9);
  }
  // Queries on the same axis as their centroid, classes orthogonal.
  for (std::size_t m : {2, 3}) {
    CHECK(ProtoLoss(AxisClusters(4, m, 6), cfg).value <= 1e-12);
    CHECK(Ge2eLoss(AxisClusters(4, m, 6), cfg).value <= 1e-12);
  }
}

TEST_CASE("proto and GE2E match direct evaluation") {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EmbeddingBatch b = oracle::RandomBatch(4, 2, 8, seed);
    auto x = oracle::ToNested(b);
    CHECK(std::abs(ProtoLoss(b, cfg).value - oracle::Proto(x, 32.0)) < 1e-10);
    EmbeddingBatch g = oracle::RandomBatch(3, 3, 8, seed + 1000);
    CHECK(std::abs(Ge2eLoss(g, cfg).value - oracle::Ge2e(oracle::ToNested(g), 32.0)) < 1e-10);
    EmbeddingBatch p = oracle::RandomBatch(5, 4, 6, seed + 2000);
    CHECK(std::abs(ProtoLoss(p, cfg).value - oracle::Proto(oracle::ToNested(p), 32.0)) < 1e-10);
  }
}

TEST_CASE("softmax cross-entropy") {
  Tensor uniform({3, 10});
  std::vector<int> y{0, 4, 9};
  CHECK(std::abs(SoftmaxCeLoss(uniform, y).value - std::log(10.0)) < 1e-12);

  Tensor peaked({2, 4});
  peaked.At(0, 1) = 1000.0;
  peaked.At(1, 3) = 1000.0;
  std::vector<int> py{1, 3};
  CHECK(SoftmaxCeLoss(peaked, py).value < 1e-12);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor logits({4, 5});
    std::vector<oracle::Vec> nested(4, oracle::Vec(5));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 5; ++c) nested[r][c] = logits.At(r, c) = g(rng);
    std::vector<int> labels{rep % 5, (rep + 1) % 5, 2, 0};
    CHECK(std::abs(SoftmaxCeLoss(logits, labels).value -
                   oracle::SoftmaxCe(nested, labels)) < 1e-12);
  }
  std::vector<int> out_of_range{0, 0, 10};
  CHECK_THROWS(SoftmaxCeLoss(uniform, out_of_range));
  std::vector<int> short_labels{0};
  CHECK_THROWS(SoftmaxCeLoss(uniform, short_labels));
}

TEST_CASE("AAM softmax") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  Tensor emb({4, 8}), w({5, 8});
  for (double &v : emb.Values()) v = g(rng);
  for (double &v : w.Values()) v = g(rng);
  std::vector<int> labels{0, 3, 4, 3};

  SUBCASE("margin zero is scaled softmax over cosines") {
    Tensor logits({4, 5});
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 5; ++c)
        logits.At(r, c) = 32.0 * Cosine(emb.Row(r), w.Row(c));
    CHECK(std::abs(AamSoftmaxLoss(emb, w, labels, 0.0, 32.0).value -
                   SoftmaxCeLoss(logits, labels).value) < 1e-12);
  }

  SUBCASE("collinear embedding gets scale * cos(margin)") {
    // Row 0 of w along e0, the other classes orthogonal to it.
    Tensor cw({3, 3}, {2, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor e({1, 3}, {5, 0, 0});
    std::vector<int> y{0};
    const double s = 32.0, m = 0.2;
    const double true_logit = s * std::cos(m);
    CHECK(std::abs(true_logit - 31.362130490919733) < 1e-12);
    // Other logits are zero: loss = log(e^t + 2) - t.
    const double want = std::log(std::exp(true_logit) + 2.0) - true_logit;
    CHECK(std::abs(AamSoftmaxLoss(e, cw, y, m, s).value - want) < 1e-12);
  }

  SUBCASE("gradients") {
    ParamMap p{{"embeddings", emb}, {"class_weights", w}};
    for (double margin : {0.0, 0.15, 0.2}) {
      auto f = [&](const ParamMap &q) {
        return AamSoftmaxLoss(q.at("embeddings"), q.at("class_weights"), labels,
                              margin, 32.0).value;
      };
      LossOutput out = AamSoftmaxLoss(emb, w, labels, margin, 32.0);
      CHECK(CompareGradients(out.grads, FiniteDiffGrad(f, p, 1e-4)).max_rel_error <= 1e-4);
    }
  }
}

TEST_CASE("joint loss") {
  LossConfig cfg;
  LossOutput cla{LossKind::kClassification, 2.0, {{"logits", Tensor({1}, {1.0})}}};
  LossOutput cl{LossKind::kContrastiveTerm, 3.0, {{"embeddings", Tensor({1}, {2.0})}}};
  LossOutput total = JointLoss(cla, cl, cfg);
  CHECK(total.value == 5.0);
  CHECK(total.kind == LossKind::kTotal);
  CHECK(total.grads.at("cla/logits")[0] == 1.0);
  CHECK(total.grads.at("cl/embeddings")[0] == 2.0);

  cfg.lambda_weight = 0.0;
  CHECK(JointLoss(cla, cl, cfg).value == cla.value);
  CHECK(JointLoss(cla, cl, cfg).grads.at("cl/embeddings")[0] == 0.0);

  cfg.lambda_weight = 0.5;
  cla.value = 1.0;
  cl.value = 4.0;
  CHECK(JointLoss(cla, cl, cfg).value == 3.0);
  CHECK(JointLoss(cla, cl, cfg).grads.at("cl/embeddings")[0] == 1.0);
  CHECK(LossKindName(LossKind::kTotal) == "L_total");
}

TEST_CASE("invariances") {
  LossConfig cfg;
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 25; ++rep) {
    EmbeddingBatch b2 = oracle::RandomBatch(5, 2, 6, 300 + rep);
    EmbeddingBatch b3 = oracle::RandomBatch(5, 3, 6, 400 + rep);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> same2(5, {0, 1}), same3(5, {0, 1, 2});

    // Utterance order.
    for (auto loss : {ContrastiveLoss, TripletLoss, ProtoLoss, Ge2eLoss})
      CHECK(std::abs(loss(b2, cfg).value - loss(Reorder(b2, perm, same2), cfg).value) < 1e-10);
    CHECK(std::abs(ProtoLoss(b3, cfg).value -
                   ProtoLoss(Reorder(b3, perm, same3), cfg).value) < 1e-10);

    // Segment order within utterances, GE2E.
    std::vector<std::vector<std::size_t>> segs(5);
    std::vector<std::size_t> ident{0, 1, 2, 3, 4};
    for (auto &s : segs) {
      s = {0, 1, 2};
      std::shuffle(s.begin(), s.end(), rng);
    }
    CHECK(std::abs(Ge2eLoss(b3, cfg).value - Ge2eLoss(Reorder(b3, ident, segs), cfg).value) < 1e-10);

    // Global positive scaling, cosine losses.
    std::uniform_real_distribution<double> a(0.1, 10.0);
    Tensor scaled = b3.Values();
    scaled.Scale(a(rng));
    CHECK(std::abs(ProtoLoss(b3, cfg).value - ProtoLoss(EmbeddingBatch(scaled), cfg).value) < 1e-10);
    CHECK(std::abs(Ge2eLoss(b3, cfg).value - Ge2eLoss(EmbeddingBatch(scaled), cfg).value) < 1e-10);

    // Global rotation in a random plane, distance losses.
    const double th = a(rng);
    Tensor rot = b2.Values();
    for (std::size_t r = 0; r < rot.NumRows(); ++r) {
      auto row = rot.Row(r);
      const double x = row[1], y = row[4];
      row[1] = std::cos(th) * x - std::sin(th) * y;
      row[4] = std::sin(th) * x + std::cos(th) * y;
    }
    CHECK(std::abs(ContrastiveLoss(b2, cfg).value - ContrastiveLoss(EmbeddingBatch(rot), cfg).value) < 1e-10);
    CHECK(std::abs(TripletLoss(b2, cfg).value - TripletLoss(EmbeddingBatch(rot), cfg).value) < 1e-10);

    // Softmax-form bounds.
    for (auto loss : {ProtoLoss, Ge2eLoss}) {
      CHECK(loss(b3, cfg).value >= 0.0);
      CHECK(std::isfinite(loss(b3, cfg).value));
    }
  }
}

TEST_CASE("loss gradients against finite differences") {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // Small spread keeps the contrastive hinges away from their kinks.
    EmbeddingBatch b2 = oracle::RandomBatch(4, 2, 5, seed, 0.4);
    CHECK(GradError([&](const EmbeddingBatch &b) { return ContrastiveLoss(b, cfg); }, b2) <= 1e-4);
    CHECK(GradError([&](const EmbeddingBatch &b) { return TripletLoss(b, cfg); }, b2) <= 1e-4);
    EmbeddingBatch b3 = oracle::RandomBatch(4, 3, 5, seed + 99);
    CHECK(GradError([&](const EmbeddingBatch &b) { return ProtoLoss(b, cfg); }, b3) <= 1e-4);
    CHECK(GradError([&](const EmbeddingBatch &b) { return Ge2eLoss(b, cfg); }, b3) <= 1e-4);
  }
}
