// tests/numgrad_test.cc

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "spkadapt/numgrad.h"
#include "spkadapt/objectives.h"

using namespace spkadapt;

TEST_CASE("cosine of fixed pairs") {
  std::vector<double> a{1, 0}, b{0, 1};
  CHECK(Cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(Cosine(a, b)) < 1e-15);
  std::vector<double> u{1, 2, 3}, v{4, 5, 6};
  // 32 / (sqrt(14) * sqrt(77))
  const double want = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
  CHECK(std::abs(Cosine(u, v) - want) < 1e-15);
  CHECK(std::abs(Cosine(u, v) - 0.9746318461970762) < 1e-15);
}

TEST_CASE("cosine is symmetric and positive-scale invariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(9), b(9);
    for (double &x : a) x = g(rng);
    for (double &x : b) x = g(rng);
    const double c = Cosine(a, b);
    CHECK(std::abs(c - Cosine(b, a)) < 1e-12);
    const double alpha = scale(rng), beta = scale(rng);
    std::vector<double> sa = a, sb = b;
    for (double &x : sa) x *= alpha;
    for (double &x : sb) x *= beta;
    CHECK(std::abs(c - Cosine(sa, sb)) < 1e-12);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("cosine rejects degenerate input") {
  std::vector<double> z{0, 0}, a{1, 2}, b{1, 2, 3};
  CHECK_THROWS(Cosine(z, a));
  CHECK_THROWS(Cosine(a, b));
}

TEST_CASE("squared distance") {
  std::vector<double> o{0, 0}, p{3, 4};
  CHECK(SqL2Dist(o, p) == 25.0);
  CHECK(SqL2Dist(p, p) == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(16), b(16);
    for (double &x : a) x = g(rng);
    for (double &x : b) x = g(rng);
    double naive = 0;
    for (int t = 0; t < 16; ++t) naive += (a[t] - b[t]) * (a[t] - b[t]);
    CHECK(std::abs(SqL2Dist(a, b) - naive) < 1e-12);
    CHECK(std::abs(SqL2Dist(a, b) - SqL2Dist(b, a)) < 1e-12);
    CHECK(SqL2Dist(a, a) == 0.0);
    CHECK(SqL2Dist(a, b) > 0.0);
  }
}

TEST_CASE("cosine backward matches finite differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    ParamMap p{{"a", Tensor({5})}, {"b", Tensor({5})}};
    for (double &x : p["a"].Values()) x = g(rng);
    for (double &x : p["b"].Values()) x = g(rng);
    const double up = 1.7;
    auto f = [&](const ParamMap &q) {
      return up * Cosine(q.at("a").Values(), q.at("b").Values());
    };
    ParamMap an{{"a", Tensor({5})}, {"b", Tensor({5})}};
    CosineBackward(p["a"].Values(), p["b"].Values(), up, an["a"].Values(),
                   an["b"].Values());
    CHECK(CompareGradients(an, FiniteDiffGrad(f, p, 1e-4)).max_rel_error <= 1e-4);
  }
}

TEST_CASE("finite differences on closed forms") {
  ParamMap p{{"x", Tensor({1}, {3.0})}};
  auto sq = [](const ParamMap &q) { return q.at("x")[0] * q.at("x")[0]; };
  CHECK(std::abs(FiniteDiffGrad(sq, p, 1e-4).at("x")[0] - 6.0) < 1e-7);

  ParamMap many{{"w", Tensor({2, 3}, {1, 2, 3, 4, 5, 6})}};
  auto constant = [](const ParamMap &) { return 4.2; };
  const ParamMap flat = FiniteDiffGrad(constant, many, 1e-4);
  for (double v : flat.at("w").Values()) CHECK(v == 0.0);

  CHECK_THROWS(FiniteDiffGrad(sq, p, 0.0));
  auto bad = [](const ParamMap &q) { return q.at("x")[0] > 3.0 ? NAN : 0.0; };
  CHECK_THROWS_WITH(FiniteDiffGrad(bad, p, 1e-4), doctest::Contains("x[0]"));
}

TEST_CASE("finite differences agree with the GE2E gradient") {
  const LossConfig cfg;
  EmbeddingBatch b = oracle::RandomBatch(4, 2, 8, 2024);
  ParamMap p{{"embeddings", b.Values()}};
  auto f = [&](const ParamMap &q) {
    return Ge2eLoss(EmbeddingBatch(q.at("embeddings")), cfg).value;
  };
  const LossOutput out = Ge2eLoss(b, cfg);
  const GradCheckResult r = CompareGradients(out.grads, FiniteDiffGrad(f, p, 1e-4));
  CHECK(r.max_rel_error <= 1e-4);
}

TEST_CASE("gradient comparison reports the worst coordinate") {
  ParamMap a{{"w", Tensor({3}, {1.0, 2.0, 3.0})}};
  ParamMap n{{"w", Tensor({3}, {1.0, 2.5, 3.0})}};
  GradCheckResult r = CompareGradients(a, n);
  CHECK(r.worst_coordinate == "w[1]");
  CHECK(r.max_rel_error == doctest::Approx(0.5 / 2.5));
  ParamMap missing{{"v", Tensor({3})}};
  CHECK_THROWS(CompareGradients(a, missing));
}
