// src/synthdata.cc

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

#include "spkadapt/synthdata.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "spkadapt/text_io.h"

namespace spkadapt {

namespace {

constexpr const char *kTrainTag = "train";
constexpr const char *kEvalTag = "eval";

std::string UtteranceId(const std::string &domain, Split split,
                        std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05zu", index);
  return domain + "-" + (split == Split::kTrain ? kTrainTag : kEvalTag) + "-" +
         buf;
}

Split SplitFromId(const std::string &id, const std::string &where) {
  auto parts = SplitOn(id, '-');
  if (parts.size() < 3)
    throw std::runtime_error(where + ": malformed utterance id '" + id + "'");
  const auto tag = parts[parts.size() - 2];
  if (tag == kTrainTag) return Split::kTrain;
  if (tag == kEvalTag) return Split::kEval;
  throw std::runtime_error(where + ": utterance id '" + id +
                           "' has no train/eval tag");
}

std::string DomainFromId(const std::string &id) {
  auto parts = SplitOn(id, '-');
  std::string domain;
  for (std::size_t i = 0; i + 2 < parts.size(); ++i) {
    if (i) domain += '-';
    domain += parts[i];
  }
  return domain;
}

Eigen::MatrixXd ToEigen(const Tensor &m) {
  Eigen::MatrixXd out(m.Dim(0), m.Dim(1));
  for (std::size_t i = 0; i < m.Dim(0); ++i)
    for (std::size_t j = 0; j < m.Dim(1); ++j) out(i, j) = m.At(i, j);
  return out;
}

}  // namespace

AffineShift AffineShift::Identity(std::size_t dim) {
  AffineShift s{Tensor({dim, dim}), Tensor({dim})};
  for (std::size_t i = 0; i < dim; ++i) s.matrix.At(i, i) = 1.0;
  return s;
}

AffineShift AffineShift::RandomRotation(std::size_t dim, double angle,
                                        double offset_norm,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();

  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(dim, dim);
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t k = 0; k + 1 < dim; k += 2) {
    r(k, k) = c;
    r(k, k + 1) = -s;
    r(k + 1, k) = s;
    r(k + 1, k + 1) = c;
  }
  const Eigen::MatrixXd a = q * r * q.transpose();

  Eigen::VectorXd b(dim);
  for (std::size_t i = 0; i < dim; ++i) b(i) = normal(rng);
  b *= offset_norm / b.norm();

  AffineShift out{Tensor({dim, dim}), Tensor({dim})};
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) out.matrix.At(i, j) = a(i, j);
    out.offset[i] = b(i);
  }
  return out;
}

double AffineShift::ConditionNumber() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ToEigen(matrix));
  const auto &sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

std::vector<double> AffineShift::Apply(std::span<const double> x) const {
  const std::size_t f = offset.Size();
  std::vector<double> y(f);
  for (std::size_t i = 0; i < f; ++i) y[i] = Dot(matrix.Row(i), x) + offset[i];
  return y;
}

void DomainConfig::Validate() const {
  auto fail = [&](const std::string &msg) {
    throw std::invalid_argument("DomainConfig[" + domain + "]: " + msg);
  };
  if (domain.empty()) fail("empty domain tag");
  // n_eval_speakers may be zero: a corpus used only for training.
  if (n_speakers == 0 || utts_per_speaker == 0 || segs_per_utt == 0 ||
      feature_dim == 0)
    fail("speaker, utterance, segment and feature counts must be positive");
  if (speaker_rank == 0 || speaker_rank > feature_dim)
    fail("speaker_rank must be in [1, feature_dim]");
  if (!(speaker_spread > 0.0) || !(utt_spread > 0.0) || !(seg_noise >= 0.0))
    fail("spreads must be positive");
  if (!(seg_noise < utt_spread && utt_spread < speaker_spread))
    fail("need seg_noise < utt_spread < speaker_spread");
  if (shift) {
    if (shift->matrix.Shape() != std::vector<std::size_t>{feature_dim, feature_dim} ||
        shift->offset.Shape() != std::vector<std::size_t>{feature_dim})
      fail("shift dimensions do not match feature_dim");
    if (!(shift->ConditionNumber() <= 10.0))
      fail("shift matrix condition number exceeds 10");
  }
}

std::uint64_t ShiftSeed(std::uint64_t domain_seed) {
  return domain_seed ^ 0x5851f42d4c957f2dULL;
}

DomainConfig DefaultSourceConfig(std::uint64_t seed) {
  DomainConfig cfg;
  cfg.domain = "source";
  cfg.seed = seed;
  return cfg;
}

DomainConfig DefaultTargetConfig(std::uint64_t seed) {
  DomainConfig cfg;
  cfg.domain = "target";
  cfg.n_speakers = 35;
  cfg.n_eval_speakers = 40;
  cfg.utts_per_speaker = 8;
  cfg.seed = seed;
  cfg.shift = AffineShift::RandomRotation(cfg.feature_dim, kDefaultShiftAngle,
                                          kDefaultShiftOffset, ShiftSeed(seed));
  return cfg;
}

void SyntheticCorpus::AddUtterance(Utterance utt, int speaker_label) {
  if (utt.segments.empty())
    throw std::invalid_argument("utterance " + utt.id + " has no segments");
  if (!utts_.empty() && utt.segments[0].size() != FeatureDim())
    throw std::invalid_argument("utterance " + utt.id +
                                " has a different feature dimension");
  if (speaker_label < 0)
    throw std::invalid_argument("negative speaker label for " + utt.id);
  if (!index_.emplace(utt.id, utts_.size()).second)
    throw std::invalid_argument("duplicate utterance id " + utt.id);
  if (utt.split == Split::kTrain)
    num_train_speakers_ = std::max<std::size_t>(num_train_speakers_,
                                                speaker_label + 1);
  utts_.push_back(std::move(utt));
  labels_.push_back(speaker_label);
}

std::size_t SyntheticCorpus::FeatureDim() const {
  return utts_.empty() ? 0 : utts_.front().segments.front().size();
}

std::optional<std::size_t> SyntheticCorpus::Find(const std::string &id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> SyntheticCorpus::UtterancesIn(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < utts_.size(); ++i)
    if (utts_[i].split == split) out.push_back(i);
  return out;
}

std::size_t SyntheticCorpus::NumSegments() const {
  std::size_t n = 0;
  for (const auto &u : utts_) n += u.segments.size();
  return n;
}

int SyntheticCorpus::SpeakerLabel(std::size_t utt_index) const {
  label_reads_.Bump();
  return labels_.at(utt_index);
}

SyntheticCorpus Generate(const DomainConfig &cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t f = cfg.feature_dim;
  SyntheticCorpus corpus(cfg.domain);
  std::size_t train_index = 0, eval_index = 0;
  const std::size_t total_speakers = cfg.n_speakers + cfg.n_eval_speakers;
  for (std::size_t spk = 0; spk < total_speakers; ++spk) {
    const Split split = spk < cfg.n_speakers ? Split::kTrain : Split::kEval;
    std::vector<double> mean(f, 0.0);
    for (std::size_t t = 0; t < cfg.speaker_rank; ++t)
      mean[t] = cfg.speaker_spread * normal(rng);
    for (std::size_t u = 0; u < cfg.utts_per_speaker; ++u) {
      std::vector<double> centre(f);
      for (std::size_t t = 0; t < f; ++t)
        centre[t] = mean[t] + cfg.utt_spread * normal(rng);
      Utterance utt;
      utt.split = split;
      utt.id = UtteranceId(cfg.domain, split,
                           split == Split::kTrain ? train_index++ : eval_index++);
      for (std::size_t s = 0; s < cfg.segs_per_utt; ++s) {
        std::vector<double> x(f);
        for (std::size_t t = 0; t < f; ++t)
          x[t] = centre[t] + cfg.seg_noise * normal(rng);
        utt.segments.push_back(cfg.shift ? cfg.shift->Apply(x) : std::move(x));
      }
      corpus.AddUtterance(std::move(utt), static_cast<int>(spk));
    }
  }
  return corpus;
}

TrialList SplitTrials(const SyntheticCorpus &corpus, std::size_t n_target_pairs,
                      std::size_t n_nontarget_pairs, std::uint64_t seed) {
  const std::vector<std::size_t> eval = corpus.UtterancesIn(Split::kEval);
  std::vector<int> label(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i)
    label[i] = corpus.SpeakerLabel(eval[i]);

  std::vector<std::pair<std::size_t, std::size_t>> same, diff;
  for (std::size_t a = 0; a < eval.size(); ++a)
    for (std::size_t b = a + 1; b < eval.size(); ++b)
      (label[a] == label[b] ? same : diff).emplace_back(a, b);
  if (n_target_pairs > same.size() || n_nontarget_pairs > diff.size()) {
    throw std::invalid_argument(
        "SplitTrials: requested " + std::to_string(n_target_pairs) + "/" +
        std::to_string(n_nontarget_pairs) + " target/nontarget pairs but only " +
        std::to_string(same.size()) + "/" + std::to_string(diff.size()) +
        " exist in the eval split of " + corpus.Domain());
  }

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::vector<std::pair<std::size_t, std::size_t>> &pool,
                     std::size_t count) {
    // Partial Fisher-Yates: the first `count` entries become the sample.
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
      std::swap(pool[i], pool[dist(rng)]);
    }
    pool.resize(count);
  };
  pick(same, n_target_pairs);
  pick(diff, n_nontarget_pairs);

  TrialList trials;
  trials.reserve(n_target_pairs + n_nontarget_pairs);
  for (auto [a, b] : same)
    trials.push_back({true, corpus.Utt(eval[a]).id, corpus.Utt(eval[b]).id});
  for (auto [a, b] : diff)
    trials.push_back({false, corpus.Utt(eval[a]).id, corpus.Utt(eval[b]).id});
  std::shuffle(trials.begin(), trials.end(), rng);
  return trials;
}

void WriteCorpus(std::ostream &out, const SyntheticCorpus &corpus) {
  for (std::size_t u = 0; u < corpus.utts_.size(); ++u) {
    const Utterance &utt = corpus.utts_[u];
    for (const auto &seg : utt.segments) {
      out << utt.id << '\t' << corpus.labels_[u] << '\t';
      for (std::size_t t = 0; t < seg.size(); ++t) {
        if (t) out << ' ';
        out << FormatDouble(seg[t]);
      }
      out << '\n';
    }
  }
}

SyntheticCorpus ReadCorpus(std::istream &in, const std::string &what) {
  SyntheticCorpus corpus;
  Utterance current;
  int current_label = -1;
  std::string line;
  std::size_t line_no = 0, dim = 0;
  bool have_domain = false;
  auto flush = [&]() {
    if (!current.id.empty())
      corpus.AddUtterance(std::move(current), current_label);
    current = Utterance{};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = what + ":" + std::to_string(line_no);
    auto cols = SplitOn(line, '\t');
    if (cols.size() != 3)
      throw std::runtime_error(where + ": expected 3 tab-separated columns");
    const std::string id(cols[0]);
    const int label = static_cast<int>(ParseInt(cols[1], where));
    std::vector<double> x;
    for (auto tok : SplitFields(cols[2])) x.push_back(ParseDouble(tok, where));
    if (x.empty()) throw std::runtime_error(where + ": no feature values");
    if (dim == 0) dim = x.size();
    if (x.size() != dim)
      throw std::runtime_error(where + ": inconsistent feature dimension");
    if (!have_domain) {
      corpus = SyntheticCorpus(DomainFromId(id));
      have_domain = true;
    }
    if (id != current.id) {
      flush();
      if (corpus.Find(id))
        throw std::runtime_error(where + ": segments of " + id +
                                 " are not adjacent");
      current.id = id;
      current.split = SplitFromId(id, where);
      current_label = label;
    } else if (label != current_label) {
      throw std::runtime_error(where + ": speaker label changes within " + id);
    }
    current.segments.push_back(std::move(x));
  }
  flush();
  if (corpus.NumUtterances() == 0)
    throw std::runtime_error(what + ": empty corpus");
  return corpus;
}

}  // namespace spkadapt
