// src/eval.cc

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

#include "spkadapt/eval.h"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "spkadapt/numgrad.h"
#include "spkadapt/text_io.h"

namespace spkadapt {

namespace {

const std::vector<double> &Lookup(const EmbeddingTable &table,
                                  const std::string &id) {
  auto it = table.find(id);
  if (it == table.end())
    throw std::runtime_error("no embedding for trial id '" + id + "'");
  return it->second;
}

Trial ParseTrialFields(const std::vector<std::string_view> &f,
                       const std::string &what, std::size_t line_no) {
  const std::string where = what + ":" + std::to_string(line_no);
  if (f[0] != "1" && f[0] != "0")
    throw std::runtime_error(where + ": trial label must be 1 or 0");
  return Trial{f[0] == "1", std::string(f[1]), std::string(f[2])};
}

}  // namespace

ScoreSet ScoreTrials(const EmbeddingTable &embeddings, const TrialList &trials) {
  ScoreSet out;
  out.target.reserve(trials.size());
  out.score.reserve(trials.size());
  for (const Trial &t : trials) {
    const auto &e = Lookup(embeddings, t.enroll_id);
    const auto &s = Lookup(embeddings, t.test_id);
    out.target.push_back(t.target);
    out.score.push_back(std::clamp(Cosine(e, s), -1.0, 1.0));
  }
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("Median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

EerResult ComputeEer(const ScoreSet &scores) {
  if (scores.target.size() != scores.score.size())
    throw std::invalid_argument("ComputeEer: label/score length mismatch");
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(scores.score.size());
  std::int64_t n_tar = 0, n_non = 0;
  for (std::size_t i = 0; i < scores.score.size(); ++i) {
    sorted.emplace_back(scores.score[i], scores.target[i]);
    (scores.target[i] ? n_tar : n_non)++;
  }
  if (n_tar == 0 || n_non == 0)
    throw std::invalid_argument(
        "ComputeEer: need at least one target and one nontarget score");
  std::sort(sorted.begin(), sorted.end());

  // Counts of each class strictly below the current threshold.
  std::int64_t tar_below = 0, non_below = 0;
  std::int64_t best_gap = -1, best_far = 0, best_frr = 0;
  double best_threshold = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].first;
    const std::int64_t far = n_non - non_below, frr = tar_below;
    // |far/n_non - frr/n_tar| scaled by n_non * n_tar.
    const std::int64_t gap = far * n_tar - frr * n_non;
    const std::int64_t abs_gap = gap < 0 ? -gap : gap;
    if (best_gap < 0 || abs_gap < best_gap) {
      best_gap = abs_gap;
      best_far = far;
      best_frr = frr;
      best_threshold = t;
    }
    while (i < sorted.size() && sorted[i].first == t) {
      (sorted[i].second ? tar_below : non_below)++;
      ++i;
    }
  }
  const double far_rate = static_cast<double>(best_far) / n_non;
  const double frr_rate = static_cast<double>(best_frr) / n_tar;
  return EerResult{(far_rate + frr_rate) / 2.0, best_threshold};
}

TrialList ReadTrials(std::istream &in, const std::string &what) {
  TrialList trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 3) {
      throw std::runtime_error(what + ":" + std::to_string(line_no) +
                               ": expected 'label enroll test'");
    }
    trials.push_back(ParseTrialFields(f, what, line_no));
  }
  return trials;
}

void WriteTrials(std::ostream &out, const TrialList &trials) {
  for (const Trial &t : trials)
    out << (t.target ? '1' : '0') << ' ' << t.enroll_id << ' ' << t.test_id
        << '\n';
}

void WriteScores(std::ostream &out, const TrialList &trials,
                 const ScoreSet &scores) {
  if (trials.size() != scores.score.size())
    throw std::invalid_argument("WriteScores: trial/score count mismatch");
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial &t = trials[i];
    out << (t.target ? '1' : '0') << ' ' << t.enroll_id << ' ' << t.test_id
        << ' ' << FormatDouble(scores.score[i]) << '\n';
  }
}

ScoreSet ReadScores(std::istream &in, const std::string &what) {
  ScoreSet scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 4) {
      throw std::runtime_error(what + ":" + std::to_string(line_no) +
                               ": expected 'label enroll test score'");
    }
    Trial t = ParseTrialFields(f, what, line_no);
    scores.target.push_back(t.target);
    scores.score.push_back(ParseDouble(f[3], what));
  }
  return scores;
}

EmbeddingTable ReadEmbeddings(std::istream &in, const std::string &what) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0, dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    const std::string where = what + ":" + std::to_string(line_no);
    if (f.size() < 2) throw std::runtime_error(where + ": missing values");
    if (dim == 0) dim = f.size() - 1;
    if (f.size() - 1 != dim)
      throw std::runtime_error(where + ": inconsistent embedding dimension");
    std::vector<double> v;
    v.reserve(dim);
    for (std::size_t k = 1; k < f.size(); ++k) v.push_back(ParseDouble(f[k], where));
    if (!table.emplace(std::string(f[0]), std::move(v)).second)
      throw std::runtime_error(where + ": duplicate id " + std::string(f[0]));
  }
  return table;
}

void WriteEmbeddings(std::ostream &out, const EmbeddingTable &table) {
  for (const auto &[id, v] : table) {
    out << id;
    for (double x : v) out << ' ' << FormatDouble(x);
    out << '\n';
  }
}

}  // namespace spkadapt
