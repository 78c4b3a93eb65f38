// tests/experiment_config_test.cc

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

#include <sstream>

#include "doctest.h"
#include "spkadapt/experiment_config.h"

using namespace spkadapt;

namespace {

ExperimentConfig Parse(const std::string &text) {
  std::istringstream in(text);
  return ParseExperimentConfig(in, "test.ini");
}

}  // namespace

TEST_CASE("defaults resolve from the root seed") {
  ExperimentConfig c = DefaultExperimentConfig(7);
  SeedPlan s = c.Seeds();
  CHECK(s.root == 7);
  CHECK(s.data_source == DeriveSeed(7, "data.source"));
  CHECK(s.data_target == DeriveSeed(7, "data.target"));
  CHECK(s.trials_target == DeriveSeed(7, "trials.target"));
  CHECK(c.source.seed == s.data_source);
  CHECK(c.target.seed == s.data_target);
  CHECK(c.train.seed == s.init);
  CHECK(c.train.batch.seed == s.sampler);
  CHECK(!c.source.shift.has_value());
  REQUIRE(c.target.shift.has_value());
  CHECK(c.target.shift->matrix ==
        AffineShift::RandomRotation(20, kDefaultShiftAngle, kDefaultShiftOffset,
                                    ShiftSeed(s.data_target)).matrix);
  CHECK(c.RunName() == "source_supervised_aam");
  CHECK(c.SourceCorpusPath() == "source.corpus");

  SetSeed(&c, 8);
  CHECK(c.target.seed == DeriveSeed(8, "data.target"));
}

TEST_CASE("parsing overrides defaults") {
  ExperimentConfig c = Parse(
      "seed = 3\n"
      "[output]\ndir = out/x\n"
      "[target]\nn_speakers = 12\nshift_angle = 0\nshift_offset = 0\n"
      "[train]\nregime = target_selfsup\ncontrastive_objective = ge2e\n"
      "steps = 17\nhidden_dims = 8, 4\nembedding_dim = 3\n"
      "[batch]\nm_segs = 3\n"
      "[loss]\nlambda_weight = 0.5\n"
      "[matrix]\nseeds = 2\n");
  CHECK(c.seed == 3);
  CHECK(c.target.n_speakers == 12);
  CHECK(!c.target.shift.has_value());
  CHECK(c.train.regime == Regime::kTargetSelfSup);
  CHECK(c.train.steps == 17);
  CHECK(c.train.dims.hidden == std::vector<std::size_t>{8, 4});
  CHECK(c.train.dims.embedding_dim == 3);
  CHECK(c.train.batch.m_segs == 3);
  CHECK(c.train.loss.lambda_weight == 0.5);
  CHECK(c.matrix_seeds == 2);
  CHECK(c.RunName() == "target_selfsup_ge2e");
  CHECK(c.TargetTrialsPath() == "out/x/target.trials");
}

TEST_CASE("parse errors name the key") {
  CHECK_THROWS_WITH(Parse("[train]\nbogus = 1\n"), doctest::Contains("bogus"));
  CHECK_THROWS_WITH(Parse("[nowhere]\nx = 1\n"), doctest::Contains("nowhere"));
  CHECK_THROWS_WITH(Parse("[train]\nsteps = many\n"), doctest::Contains("steps"));
  CHECK_THROWS_WITH(Parse("[train]\nregime = ssda\n"), doctest::Contains("init_checkpoint"));
  CHECK_THROWS(Parse("[batch]\nm_segs = 3\n[train]\nregime = target_selfsup\n"
                     "contrastive_objective = triplet\n"));
  CHECK_THROWS_WITH(ReadExperimentConfig("/nonexistent/x.ini"),
                    doctest::Contains("/nonexistent/x.ini"));
}

TEST_CASE("generated data follows the config") {
  ExperimentConfig c = Parse(
      "[source]\nn_speakers = 4\nn_eval_speakers = 3\nutts_per_speaker = 3\n"
      "[target]\nn_speakers = 2\nn_eval_speakers = 3\nutts_per_speaker = 3\n"
      "[trials]\nsource_target = 5\nsource_nontarget = 7\n"
      "target_target = 4\ntarget_nontarget = 6\n");
  ExperimentData a = GenerateData(c), b = GenerateData(c);
  CHECK(a.source.NumUtterances() == 21);
  CHECK(a.target.NumUtterances() == 15);
  CHECK(a.source_trials.size() == 12);
  CHECK(a.target_trials.size() == 10);
  CHECK(a.target_trials == b.target_trials);
  CHECK(a.target.Utt(3).segments == b.target.Utt(3).segments);
  const std::string m = ManifestText(c);
  CHECK(m.find("seed=1\n") != std::string::npos);
  CHECK(m.find("target.n_speakers=2\n") != std::string::npos);
}
