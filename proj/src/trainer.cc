// src/trainer.cc

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

#include "spkadapt/trainer.h"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spkadapt/text_io.h"

namespace spkadapt {

namespace {

bool UsesSourceClassifier(Regime r) {
  return r == Regime::kSourceSupervised || r == Regime::kSsdaJoint ||
         r == Regime::kSupervisedJoint;
}

bool UsesTargetContrastive(Regime r) {
  return r == Regime::kTargetSelfSup || r == Regime::kSsda ||
         r == Regime::kSsdaJoint;
}

Tensor Reshaped(const Tensor &t, std::vector<std::size_t> shape) {
  return Tensor(std::move(shape),
                std::vector<double>(t.Values().begin(), t.Values().end()));
}

// Linear classifier without bias followed by softmax cross-entropy, with
// gradients keyed like AamSoftmaxLoss.
LossOutput LinearSoftmaxLoss(const Tensor &emb, const Tensor &head,
                             std::span<const int> labels) {
  const std::size_t b = emb.Dim(0), d = emb.Dim(1), c = head.Dim(0);
  Tensor logits({b, c});
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t k = 0; k < c; ++k) logits.At(r, k) = Dot(emb.Row(r), head.Row(k));
  LossOutput ce = SoftmaxCeLoss(logits, labels);
  const Tensor &gl = ce.grads.at("logits");
  Tensor gemb({b, d}), ghead({c, d});
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t k = 0; k < c; ++k) {
      const double g = gl.At(r, k);
      auto e = emb.Row(r);
      auto w = head.Row(k);
      auto ge = gemb.Row(r);
      auto gw = ghead.Row(k);
      for (std::size_t t = 0; t < d; ++t) {
        ge[t] += g * w[t];
        gw[t] += g * e[t];
      }
    }
  }
  LossOutput out{LossKind::kClassification, ce.value, {}};
  out.grads.emplace("embeddings", std::move(gemb));
  out.grads.emplace("class_weights", std::move(ghead));
  return out;
}

LossOutput ClassificationLoss(ClassificationObjective obj, const Tensor &emb,
                              const Tensor &head, std::span<const int> labels,
                              double margin, double scale) {
  if (obj == ClassificationObjective::kAam)
    return AamSoftmaxLoss(emb, head, labels, margin, scale);
  return LinearSoftmaxLoss(emb, head, labels);
}

LossOutput ContrastiveTerm(ContrastiveObjective obj, const Tensor &emb,
                           std::size_t n, std::size_t m,
                           const LossConfig &cfg) {
  const EmbeddingBatch batch(Reshaped(emb, {n, m, emb.Dim(1)}));
  LossOutput out;
  switch (obj) {
    case ContrastiveObjective::kContrastive: out = ContrastiveLoss(batch, cfg); break;
    case ContrastiveObjective::kTriplet: out = TripletLoss(batch, cfg); break;
    case ContrastiveObjective::kProto: out = ProtoLoss(batch, cfg); break;
    case ContrastiveObjective::kGe2e: out = Ge2eLoss(batch, cfg); break;
  }
  Tensor &g = out.grads.at("embeddings");
  g = Reshaped(g, {n * m, emb.Dim(1)});
  return out;
}

// Forward pass over a set of segments, remembering what Backward needs.
struct SideForward {
  ForwardCache cache;
  Tensor embeddings;
};

SideForward RunForward(const EncoderParams &params,
                       const SyntheticCorpus &corpus,
                       const std::vector<SegmentRef> &refs) {
  SideForward s;
  s.embeddings = Forward(params, GatherFeatures(corpus, refs), &s.cache);
  return s;
}

std::string Describe(const TrainConfig &cfg) {
  return RegimeName(cfg.regime) + "/" + ObjectiveName(cfg.contrastive_objective);
}

}  // namespace

std::string RegimeName(Regime r) {
  switch (r) {
    case Regime::kSourceSupervised: return "source_supervised";
    case Regime::kTargetSelfSup: return "target_selfsup";
    case Regime::kSsda: return "ssda";
    case Regime::kSsdaJoint: return "ssda_joint";
    case Regime::kSupervisedJoint: return "supervised_joint";
  }
  return "unknown";
}

std::string ObjectiveName(ContrastiveObjective o) {
  switch (o) {
    case ContrastiveObjective::kContrastive: return "contrastive";
    case ContrastiveObjective::kTriplet: return "triplet";
    case ContrastiveObjective::kProto: return "proto";
    case ContrastiveObjective::kGe2e: return "ge2e";
  }
  return "unknown";
}

std::string ObjectiveName(ClassificationObjective o) {
  return o == ClassificationObjective::kAam ? "aam" : "softmax";
}

Regime ParseRegime(const std::string &s) {
  for (Regime r : {Regime::kSourceSupervised, Regime::kTargetSelfSup,
                   Regime::kSsda, Regime::kSsdaJoint, Regime::kSupervisedJoint})
    if (RegimeName(r) == s) return r;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

ContrastiveObjective ParseContrastiveObjective(const std::string &s) {
  for (ContrastiveObjective o :
       {ContrastiveObjective::kContrastive, ContrastiveObjective::kTriplet,
        ContrastiveObjective::kProto, ContrastiveObjective::kGe2e})
    if (ObjectiveName(o) == s) return o;
  throw std::invalid_argument("unknown contrastive objective '" + s + "'");
}

ClassificationObjective ParseClassificationObjective(const std::string &s) {
  if (s == "aam") return ClassificationObjective::kAam;
  if (s == "softmax") return ClassificationObjective::kSoftmax;
  throw std::invalid_argument("unknown classification objective '" + s + "'");
}

bool RequiresInit(Regime r) {
  return r == Regime::kSsda || r == Regime::kSsdaJoint;
}

void TrainConfig::Validate() const {
  if (RequiresInit(regime) && !init)
    throw std::invalid_argument(RegimeName(regime) +
                                " requires an init checkpoint from a source "
                                "trained model");
  ValidateHyperparameters();
  if (init) init->Validate();
}

void TrainConfig::ValidateHyperparameters() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  batch.Validate();
  loss.Validate();
  if (UsesTargetContrastive(regime) && batch.m_segs != 2 &&
      (contrastive_objective == ContrastiveObjective::kContrastive ||
       contrastive_objective == ContrastiveObjective::kTriplet))
    throw std::invalid_argument(ObjectiveName(contrastive_objective) +
                                " loss requires m_segs == 2");
}

Tensor SgdStep(const Tensor &params, const Tensor &grads, double learning_rate) {
  if (!params.SameShape(grads))
    throw std::invalid_argument("SgdStep: parameter shape " +
                                ShapeString(params.Shape()) + " vs gradient " +
                                ShapeString(grads.Shape()));
  Tensor out = params;
  out.AddScaled(grads, -learning_rate);
  return out;
}

EncoderParams SgdStep(const EncoderParams &params, const EncoderParams &grads,
                      double learning_rate) {
  if (params.layers.size() != grads.layers.size())
    throw std::invalid_argument("SgdStep: layer count mismatch");
  EncoderParams out = params;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    out.layers[i].weight =
        SgdStep(params.layers[i].weight, grads.layers[i].weight, learning_rate);
    out.layers[i].bias =
        SgdStep(params.layers[i].bias, grads.layers[i].bias, learning_rate);
  }
  if (!params.source_head.Empty())
    out.source_head = SgdStep(params.source_head, grads.source_head, learning_rate);
  if (!params.target_head.Empty())
    out.target_head = SgdStep(params.target_head, grads.target_head, learning_rate);
  return out;
}

EmbeddingTable ExtractEmbeddings(const EncoderParams &params,
                                 const SyntheticCorpus &corpus,
                                 const std::vector<std::string> &ids) {
  EmbeddingTable table;
  for (const std::string &id : ids) {
    if (table.count(id)) continue;
    auto idx = corpus.Find(id);
    if (!idx)
      throw std::runtime_error("utterance '" + id + "' not found in " +
                               corpus.Domain() + " corpus");
    const Utterance &utt = corpus.Utt(*idx);
    Tensor feats({utt.segments.size(), corpus.FeatureDim()});
    for (std::size_t s = 0; s < utt.segments.size(); ++s)
      std::copy(utt.segments[s].begin(), utt.segments[s].end(),
                feats.Row(s).begin());
    const Tensor emb = Forward(params, feats);
    std::vector<double> mean(emb.RowDim(), 0.0);
    for (std::size_t s = 0; s < emb.NumRows(); ++s)
      for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += emb.Row(s)[t];
    for (double &v : mean) v /= static_cast<double>(emb.NumRows());
    table.emplace(id, std::move(mean));
  }
  return table;
}

double EvaluateCheckpoint(const EncoderParams &params,
                          const SyntheticCorpus &corpus,
                          const TrialList &trials) {
  std::vector<std::string> ids;
  ids.reserve(2 * trials.size());
  for (const Trial &t : trials) {
    ids.push_back(t.enroll_id);
    ids.push_back(t.test_id);
  }
  const EmbeddingTable table = ExtractEmbeddings(params, corpus, ids);
  return ComputeEer(ScoreTrials(table, trials)).eer;
}

RunReport Train(const TrainConfig &cfg, const TrainingData &data) {
  cfg.Validate();
  const Regime regime = cfg.regime;
  if (data.source.FeatureDim() != data.target.FeatureDim())
    throw std::invalid_argument("source and target feature dims differ");

  EncoderParams params;
  if (cfg.init) {
    params = CloneForAdaptation(*cfg.init);
  } else {
    EncoderDims dims = cfg.dims;
    dims.input_dim = data.source.FeatureDim();
    dims.source_classes = data.source.NumTrainSpeakers();
    dims.target_classes = 0;
    params = InitParams(cfg.seed, dims);
  }
  if (params.InputDim() != data.source.FeatureDim())
    throw std::invalid_argument("encoder input dim " +
                                std::to_string(params.InputDim()) +
                                " does not match feature dim " +
                                std::to_string(data.source.FeatureDim()));
  if (UsesSourceClassifier(regime) &&
      (params.source_head.Empty() ||
       params.source_head.Dim(0) != data.source.NumTrainSpeakers()))
    throw std::invalid_argument(
        "source classification head does not match the source speaker count");
  if (regime == Regime::kSupervisedJoint) {
    const std::size_t classes = data.target.NumTrainSpeakers();
    if (params.target_head.Empty())
      params.target_head = InitHead(DeriveSeed(cfg.seed, "init.target_head"),
                                    classes, params.EmbeddingDim());
    if (params.target_head.Dim(0) != classes)
      throw std::invalid_argument(
          "target classification head does not match the target speaker count");
  }

  RunReport report;
  report.config = cfg;
  report.config.init.reset();
  report.initial_params = params;
  const std::size_t source_reads0 = data.source.LabelReads();
  const std::size_t target_reads0 = data.target.LabelReads();

  BatchSampler sampler(cfg.batch);
  const std::size_t labeled = cfg.batch.LabeledBatchSize();
  const LossConfig &lc = cfg.loss;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    EncoderParams grads = params.ZerosLike();
    StepLoss sl{step, 0.0, 0.0, 0.0};

    std::optional<LossOutput> cla, cl;
    std::optional<SideForward> src, tgt;
    if (UsesSourceClassifier(regime)) {
      const auto refs = sampler.SampleLabeled(data.source, labeled);
      src = RunForward(params, data.source, refs);
      cla = ClassificationLoss(cfg.classification_objective, src->embeddings,
                               params.source_head, RefLabels(refs),
                               lc.aam_margin_source, lc.aam_scale);
    }
    if (UsesTargetContrastive(regime)) {
      const ContrastiveBatch cb = sampler.SampleContrastive(data.target);
      tgt = RunForward(params, data.target, cb.refs);
      cl = ContrastiveTerm(cfg.contrastive_objective, tgt->embeddings, cb.n,
                           cb.m, lc);
    } else if (regime == Regime::kSupervisedJoint) {
      const auto refs = sampler.SampleLabeled(data.target, labeled);
      tgt = RunForward(params, data.target, refs);
      cl = ClassificationLoss(cfg.classification_objective, tgt->embeddings,
                              params.target_head, RefLabels(refs),
                              lc.aam_margin_target, lc.aam_scale);
    }

    // Single-sided regimes still go through JointLoss so every path scales
    // and names gradients the same way.
    LossOutput total;
    if (cla && cl) {
      total = JointLoss(*cla, *cl, lc);
      sl.cla = cla->value;
      sl.cl = cl->value;
    } else if (cla) {
      total = *cla;
      for (auto &[k, g] : cla->grads) total.grads.emplace("cla/" + k, g);
      sl.cla = cla->value;
    } else {
      total = *cl;
      for (auto &[k, g] : cl->grads) total.grads.emplace("cl/" + k, g);
      sl.cl = cl->value;
    }
    sl.total = total.value;
    if (!std::isfinite(sl.total))
      throw std::runtime_error(Describe(cfg) + ": non-finite loss at step " +
                               std::to_string(step));

    if (src) {
      Backward(params, src->cache, total.grads.at("cla/embeddings"), &grads);
      grads.source_head.AddScaled(total.grads.at("cla/class_weights"), 1.0);
    }
    if (tgt) {
      Backward(params, tgt->cache, total.grads.at("cl/embeddings"), &grads);
      if (regime == Regime::kSupervisedJoint)
        grads.target_head.AddScaled(total.grads.at("cl/class_weights"), 1.0);
    }
    report.trace.push_back(sl);
    params = SgdStep(params, grads, cfg.learning_rate);
  }

  report.final_params = params;
  report.source_eer = EvaluateCheckpoint(params, data.source, data.source_trials);
  report.target_eer = EvaluateCheckpoint(params, data.target, data.target_trials);
  report.source_label_reads = data.source.LabelReads() - source_reads0;
  report.target_label_reads = data.target.LabelReads() - target_reads0;
  return report;
}

std::string LossTraceCsv(const RunReport &report) {
  std::ostringstream os;
  os << "step,loss_total,loss_cla,loss_cl\n";
  for (const StepLoss &s : report.trace)
    os << s.step << ',' << FormatDouble(s.total) << ',' << FormatDouble(s.cla)
       << ',' << FormatDouble(s.cl) << '\n';
  return os.str();
}

std::string FormatReport(const RunReport &report) {
  const TrainConfig &c = report.config;
  std::ostringstream os;
  os << "regime=" << RegimeName(c.regime) << '\n'
     << "contrastive_objective=" << ObjectiveName(c.contrastive_objective) << '\n'
     << "classification_objective=" << ObjectiveName(c.classification_objective)
     << '\n'
     << "steps=" << c.steps << '\n'
     << "learning_rate=" << FormatDouble(c.learning_rate) << '\n'
     << "n_utts=" << c.batch.n_utts << '\n'
     << "m_segs=" << c.batch.m_segs << '\n'
     << "labeled_batch=" << c.batch.LabeledBatchSize() << '\n'
     << "sampler_seed=" << c.batch.seed << '\n'
     << "init_seed=" << c.seed << '\n'
     << "margin_m=" << FormatDouble(c.loss.margin_m) << '\n'
     << "temperature_tau=" << FormatDouble(c.loss.temperature_tau) << '\n'
     << "lambda_weight=" << FormatDouble(c.loss.lambda_weight) << '\n'
     << "aam_margin_source=" << FormatDouble(c.loss.aam_margin_source) << '\n'
     << "aam_margin_target=" << FormatDouble(c.loss.aam_margin_target) << '\n'
     << "aam_scale=" << FormatDouble(c.loss.aam_scale) << '\n'
     << "source_eer=" << FormatFixed(report.source_eer, 6) << '\n'
     << "target_eer=" << FormatFixed(report.target_eer, 6) << '\n'
     << "source_label_reads=" << report.source_label_reads << '\n'
     << "target_label_reads=" << report.target_label_reads << '\n';
  if (!report.trace.empty()) {
    const StepLoss &last = report.trace.back();
    os << "final_loss_total=" << FormatDouble(last.total) << '\n'
       << "final_loss_cla=" << FormatDouble(last.cla) << '\n'
       << "final_loss_cl=" << FormatDouble(last.cl) << '\n';
  }
  return os.str();
}

}  // namespace spkadapt
