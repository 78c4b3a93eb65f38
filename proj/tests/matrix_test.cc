// tests/matrix_test.cc

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

// Adaptation matrix on the default experiment: SSDA-Joint against SSDA for
// each contrastive loss, median target EER over the configured seeds.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

TEST_CASE("ssda_joint lowers target EER relative to ssda for most losses") {
  const fs::path dir = fs::temp_directory_path() / "spkadapt_matrix";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "default.ini") << "seed = 1\n[output]\ndir = " << dir.string() << "\n";
  const std::string base = std::string(SPKADAPT_CLI) + " %s --config " +
                           (dir / "default.ini").string() + " >" + (dir / "log").string() +
                           " 2>&1";
  for (const char *cmd : {"gen", "matrix"}) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, base.c_str(), cmd);
    const int rc = std::system(buf);
    REQUIRE(WIFEXITED(rc));
    REQUIRE(WEXITSTATUS(rc) == 0);
  }

  std::ifstream in(dir / "matrix.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::map<std::string, double>> eer;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string regime, loss, target;
    std::getline(fields, regime, ',');
    std::getline(fields, loss, ',');
    std::getline(fields, target, ',');
    eer[regime][loss] = std::stod(target);
    ++rows;
  }
  CHECK(rows == 8);
  int wins = 0;
  for (const char *loss : {"contrastive", "triplet", "proto", "ge2e"}) {
    const double joint = eer.at("ssda_joint").at(loss), plain = eer.at("ssda").at(loss);
    MESSAGE(std::string(loss), ": ssda_joint ", joint, " ssda ", plain);
    wins += joint < plain;
  }
  CHECK(wins >= 3);
}
