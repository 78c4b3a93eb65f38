// src/sampler.cc

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

#include "spkadapt/sampler.h"

#include <numeric>
#include <stdexcept>

namespace spkadapt {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// First `count` entries of a partial Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> DrawWithoutReplacement(std::mt19937_64 &rng,
                                                std::size_t n,
                                                std::size_t count) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, n - 1);
    std::swap(idx[i], idx[dist(rng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

void BatchSpec::Validate() const {
  if (n_utts < 2)
    throw std::invalid_argument("BatchSpec: n_utts must be >= 2");
  if (m_segs < 2)
    throw std::invalid_argument("BatchSpec: m_segs must be >= 2");
}

std::uint64_t DeriveSeed(std::uint64_t root, const std::string &name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(SplitMix64(root) ^ h);
}

BatchSampler::BatchSampler(const BatchSpec &spec)
    : spec_(spec),
      contrastive_rng_(DeriveSeed(spec.seed, "sampler.contrastive")),
      labeled_rng_(DeriveSeed(spec.seed, "sampler.labeled")) {
  spec_.Validate();
}

ContrastiveBatch BatchSampler::SampleContrastive(const SyntheticCorpus &corpus) {
  const std::vector<std::size_t> pool = corpus.UtterancesIn(Split::kTrain);
  const std::size_t n = spec_.n_utts, m = spec_.m_segs;
  if (pool.size() < n) {
    throw std::invalid_argument(
        "SampleContrastive: need " + std::to_string(n) +
        " training utterances in " + corpus.Domain() + ", have " +
        std::to_string(pool.size()) + " (short by " +
        std::to_string(n - pool.size()) + ")");
  }
  ContrastiveBatch batch{n, m, {}};
  batch.refs.reserve(n * m);
  for (std::size_t pick : DrawWithoutReplacement(contrastive_rng_, pool.size(), n)) {
    const std::size_t u = pool[pick];
    const Utterance &utt = corpus.Utt(u);
    if (utt.segments.size() < m) {
      throw std::invalid_argument(
          "SampleContrastive: utterance " + utt.id + " has " +
          std::to_string(utt.segments.size()) + " segments, need " +
          std::to_string(m));
    }
    for (std::size_t s :
         DrawWithoutReplacement(contrastive_rng_, utt.segments.size(), m))
      batch.refs.push_back({utt.id, u, s, std::nullopt});
  }
  return batch;
}

std::vector<SegmentRef> BatchSampler::SampleLabeled(const SyntheticCorpus &corpus,
                                                    std::size_t count) {
  const std::vector<std::size_t> pool = corpus.UtterancesIn(Split::kTrain);
  if (pool.empty())
    throw std::invalid_argument("SampleLabeled: no training utterances in " +
                                corpus.Domain());
  std::uniform_int_distribution<std::size_t> pick_utt(0, pool.size() - 1);
  std::vector<SegmentRef> refs;
  refs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t u = pool[pick_utt(labeled_rng_)];
    const Utterance &utt = corpus.Utt(u);
    std::uniform_int_distribution<std::size_t> pick_seg(0, utt.segments.size() - 1);
    refs.push_back({utt.id, u, pick_seg(labeled_rng_), corpus.SpeakerLabel(u)});
  }
  return refs;
}

JointBatch BatchSampler::SampleJoint(const SyntheticCorpus &source,
                                     const SyntheticCorpus &target) {
  JointBatch jb;
  jb.labeled = SampleLabeled(source, spec_.LabeledBatchSize());
  jb.unlabeled = SampleContrastive(target);
  return jb;
}

ContrastiveBatch SampleContrastiveBatch(const SyntheticCorpus &corpus,
                                        const BatchSpec &spec) {
  BatchSampler sampler(spec);
  return sampler.SampleContrastive(corpus);
}

JointBatch SampleJointBatch(const SyntheticCorpus &source,
                            const SyntheticCorpus &target,
                            const BatchSpec &spec) {
  BatchSampler sampler(spec);
  return sampler.SampleJoint(source, target);
}

Tensor GatherFeatures(const SyntheticCorpus &corpus,
                      const std::vector<SegmentRef> &refs) {
  const std::size_t f = corpus.FeatureDim();
  Tensor out({refs.size(), f});
  for (std::size_t r = 0; r < refs.size(); ++r) {
    const auto &seg = corpus.Utt(refs[r].utterance_index).segments.at(refs[r].segment_index);
    std::copy(seg.begin(), seg.end(), out.Row(r).begin());
  }
  return out;
}

std::vector<int> RefLabels(const std::vector<SegmentRef> &refs) {
  std::vector<int> labels;
  labels.reserve(refs.size());
  for (const SegmentRef &r : refs) {
    if (!r.speaker_label)
      throw std::logic_error("RefLabels: segment of " + r.utterance_id +
                             " carries no label");
    labels.push_back(*r.speaker_label);
  }
  return labels;
}

}  // namespace spkadapt
