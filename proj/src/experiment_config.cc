// src/experiment_config.cc

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

#include "spkadapt/experiment_config.h"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "spkadapt/sampler.h"
#include "spkadapt/text_io.h"

namespace spkadapt {

namespace {

using Setter = std::function<void(ExperimentConfig &, const std::string &)>;
using KeyTable = std::map<std::string, Setter>;

std::size_t ToSize(const std::string &v, const std::string &key) {
  long long n = ParseInt(v, key);
  if (n < 0) throw std::invalid_argument(key + " must be non-negative");
  return static_cast<std::size_t>(n);
}

std::uint64_t ToSeed(const std::string &v, const std::string &key) {
  return static_cast<std::uint64_t>(ToSize(v, key));
}

std::vector<std::size_t> ToSizeList(const std::string &v, const std::string &key) {
  std::vector<std::size_t> out;
  for (std::string_view tok : SplitOn(v, ',')) {
    std::vector<std::string_view> f = SplitFields(tok);
    if (f.size() != 1)
      throw std::invalid_argument(key + ": expected comma-separated integers");
    out.push_back(ToSize(std::string(f[0]), key));
  }
  return out;
}

KeyTable DomainKeys(DomainConfig ExperimentConfig::*dom,
                    ShiftSpec ExperimentConfig::*shift,
                    const std::string &sec) {
  auto sz = [=](std::size_t DomainConfig::*field, const char *name) -> Setter {
    return [=](ExperimentConfig &c, const std::string &v) {
      (c.*dom).*field = ToSize(v, sec + "." + name);
    };
  };
  auto real = [=](double DomainConfig::*field, const char *name) -> Setter {
    return [=](ExperimentConfig &c, const std::string &v) {
      (c.*dom).*field = ParseDouble(v, sec + "." + name);
    };
  };
  return {
      {"n_speakers", sz(&DomainConfig::n_speakers, "n_speakers")},
      {"n_eval_speakers", sz(&DomainConfig::n_eval_speakers, "n_eval_speakers")},
      {"utts_per_speaker", sz(&DomainConfig::utts_per_speaker, "utts_per_speaker")},
      {"segs_per_utt", sz(&DomainConfig::segs_per_utt, "segs_per_utt")},
      {"feature_dim", sz(&DomainConfig::feature_dim, "feature_dim")},
      {"speaker_rank", sz(&DomainConfig::speaker_rank, "speaker_rank")},
      {"speaker_spread", real(&DomainConfig::speaker_spread, "speaker_spread")},
      {"utt_spread", real(&DomainConfig::utt_spread, "utt_spread")},
      {"seg_noise", real(&DomainConfig::seg_noise, "seg_noise")},
      {"shift_angle",
       [=](ExperimentConfig &c, const std::string &v) {
         (c.*shift).angle = ParseDouble(v, sec + ".shift_angle");
       }},
      {"shift_offset",
       [=](ExperimentConfig &c, const std::string &v) {
         (c.*shift).offset = ParseDouble(v, sec + ".shift_offset");
       }},
  };
}

const std::map<std::string, KeyTable> &Schema() {
  static const std::map<std::string, KeyTable> schema = [] {
    std::map<std::string, KeyTable> s;
    s[""] = {{"seed", [](ExperimentConfig &c, const std::string &v) {
               c.seed = ToSeed(v, "seed");
             }}};
    s["output"] = {
        {"dir", [](ExperimentConfig &c, const std::string &v) { c.out_dir = v; }},
        {"run_name",
         [](ExperimentConfig &c, const std::string &v) { c.run_name = v; }},
    };
    s["source"] = DomainKeys(&ExperimentConfig::source,
                             &ExperimentConfig::source_shift, "source");
    s["target"] = DomainKeys(&ExperimentConfig::target,
                             &ExperimentConfig::target_shift, "target");
    s["trials"] = {
        {"source_target", [](ExperimentConfig &c, const std::string &v) {
           c.source_trials.target = ToSize(v, "trials.source_target");
         }},
        {"source_nontarget", [](ExperimentConfig &c, const std::string &v) {
           c.source_trials.nontarget = ToSize(v, "trials.source_nontarget");
         }},
        {"target_target", [](ExperimentConfig &c, const std::string &v) {
           c.target_trials.target = ToSize(v, "trials.target_target");
         }},
        {"target_nontarget", [](ExperimentConfig &c, const std::string &v) {
           c.target_trials.nontarget = ToSize(v, "trials.target_nontarget");
         }},
    };
    s["train"] = {
        {"regime", [](ExperimentConfig &c, const std::string &v) {
           c.train.regime = ParseRegime(v);
         }},
        {"contrastive_objective", [](ExperimentConfig &c, const std::string &v) {
           c.train.contrastive_objective = ParseContrastiveObjective(v);
         }},
        {"classification_objective",
         [](ExperimentConfig &c, const std::string &v) {
           c.train.classification_objective = ParseClassificationObjective(v);
         }},
        {"steps", [](ExperimentConfig &c, const std::string &v) {
           c.train.steps = ToSize(v, "train.steps");
         }},
        {"learning_rate", [](ExperimentConfig &c, const std::string &v) {
           c.train.learning_rate = ParseDouble(v, "train.learning_rate");
         }},
        {"init_checkpoint", [](ExperimentConfig &c, const std::string &v) {
           c.init_checkpoint = v;
         }},
        {"hidden_dims", [](ExperimentConfig &c, const std::string &v) {
           c.train.dims.hidden = ToSizeList(v, "train.hidden_dims");
         }},
        {"embedding_dim", [](ExperimentConfig &c, const std::string &v) {
           c.train.dims.embedding_dim = ToSize(v, "train.embedding_dim");
         }},
    };
    s["batch"] = {
        {"n_utts", [](ExperimentConfig &c, const std::string &v) {
           c.train.batch.n_utts = ToSize(v, "batch.n_utts");
         }},
        {"m_segs", [](ExperimentConfig &c, const std::string &v) {
           c.train.batch.m_segs = ToSize(v, "batch.m_segs");
         }},
        {"labeled_batch", [](ExperimentConfig &c, const std::string &v) {
           c.train.batch.labeled_batch = ToSize(v, "batch.labeled_batch");
         }},
    };
    auto loss = [](double LossConfig::*field, const char *name) -> Setter {
      return [=](ExperimentConfig &c, const std::string &v) {
        c.train.loss.*field = ParseDouble(v, std::string("loss.") + name);
      };
    };
    s["loss"] = {
        {"margin_m", loss(&LossConfig::margin_m, "margin_m")},
        {"temperature_tau", loss(&LossConfig::temperature_tau, "temperature_tau")},
        {"lambda_weight", loss(&LossConfig::lambda_weight, "lambda_weight")},
        {"aam_margin_source",
         loss(&LossConfig::aam_margin_source, "aam_margin_source")},
        {"aam_margin_target",
         loss(&LossConfig::aam_margin_target, "aam_margin_target")},
        {"aam_scale", loss(&LossConfig::aam_scale, "aam_scale")},
    };
    s["matrix"] = {{"seeds", [](ExperimentConfig &c, const std::string &v) {
                      c.matrix_seeds = ToSize(v, "matrix.seeds");
                    }}};
    return s;
  }();
  return schema;
}

std::optional<AffineShift> BuildShift(const ShiftSpec &spec,
                                      const DomainConfig &dom) {
  if (!spec.Enabled()) return std::nullopt;
  return AffineShift::RandomRotation(dom.feature_dim, spec.angle, spec.offset,
                                     ShiftSeed(dom.seed));
}

std::string JoinPath(const std::string &dir, const std::string &file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

void Apply(ExperimentConfig &cfg, const std::string &section,
           const std::string &key, const std::string &value,
           const std::string &what) {
  const auto &schema = Schema();
  auto sec = schema.find(section);
  if (sec == schema.end())
    throw std::invalid_argument(what + ": unknown section [" + section + "]");
  auto setter = sec->second.find(key);
  if (setter == sec->second.end())
    throw std::invalid_argument(
        what + ": unknown key '" + key + "'" +
        (section.empty() ? std::string(" at top level")
                         : " in section [" + section + "]"));
  try {
    setter->second(cfg, value);
  } catch (const std::exception &e) {
    throw std::invalid_argument(what + ": " +
                                (section.empty() ? key : section + "." + key) +
                                ": " + e.what());
  }
}

}  // namespace

SeedPlan ExpandSeeds(std::uint64_t root) {
  SeedPlan p;
  p.root = root;
  p.data_source = DeriveSeed(root, "data.source");
  p.data_target = DeriveSeed(root, "data.target");
  p.trials_source = DeriveSeed(root, "trials.source");
  p.trials_target = DeriveSeed(root, "trials.target");
  p.sampler = DeriveSeed(root, "sampler");
  p.init = DeriveSeed(root, "init");
  return p;
}

void ExperimentConfig::Resolve() {
  const SeedPlan seeds = Seeds();
  source.domain = "source";
  target.domain = "target";
  source.seed = seeds.data_source;
  target.seed = seeds.data_target;
  source.shift = BuildShift(source_shift, source);
  target.shift = BuildShift(target_shift, target);
  train.seed = seeds.init;
  train.batch.seed = seeds.sampler;
  train.dims.input_dim = source.feature_dim;
}

void ExperimentConfig::Validate() const {
  source.Validate();
  target.Validate();
  if (source.feature_dim != target.feature_dim)
    throw std::invalid_argument("source.feature_dim and target.feature_dim "
                                "differ");
  for (const TrialSizes *t : {&source_trials, &target_trials})
    if (t->target == 0 || t->nontarget == 0)
      throw std::invalid_argument("trial counts must be positive");
  if (train.dims.embedding_dim == 0)
    throw std::invalid_argument("train.embedding_dim must be positive");
  for (std::size_t h : train.dims.hidden)
    if (h == 0) throw std::invalid_argument("train.hidden_dims must be positive");
  train.ValidateHyperparameters();
  if (RequiresInit(train.regime) && init_checkpoint.empty())
    throw std::invalid_argument("train.regime = " + RegimeName(train.regime) +
                                " needs train.init_checkpoint");
  if (matrix_seeds == 0)
    throw std::invalid_argument("matrix.seeds must be positive");
}

std::string ExperimentConfig::RunName() const {
  if (!run_name.empty()) return run_name;
  const bool classifier_only = train.regime == Regime::kSourceSupervised ||
                               train.regime == Regime::kSupervisedJoint;
  return RegimeName(train.regime) + "_" +
         (classifier_only ? ObjectiveName(train.classification_objective)
                          : ObjectiveName(train.contrastive_objective));
}

std::string ExperimentConfig::SourceCorpusPath() const {
  return JoinPath(out_dir, "source.corpus");
}
std::string ExperimentConfig::TargetCorpusPath() const {
  return JoinPath(out_dir, "target.corpus");
}
std::string ExperimentConfig::SourceTrialsPath() const {
  return JoinPath(out_dir, "source.trials");
}
std::string ExperimentConfig::TargetTrialsPath() const {
  return JoinPath(out_dir, "target.trials");
}
std::string ExperimentConfig::ManifestPath() const {
  return JoinPath(out_dir, "manifest.txt");
}

ExperimentConfig DefaultExperimentConfig(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.source = DefaultSourceConfig(0);
  cfg.target = DefaultTargetConfig(0);
  cfg.Resolve();
  return cfg;
}

ExperimentConfig ParseExperimentConfig(std::istream &in, const std::string &what) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw std::invalid_argument(what + ": line " + std::to_string(e.line()) +
                                ": " + e.message());
  }
  ExperimentConfig cfg = DefaultExperimentConfig(1);
  const auto &schema = Schema();
  for (const auto &[name, node] : tree) {
    // ini_parser gives top-level keys a value and no children.
    if (node.empty() && (!node.data().empty() || !schema.contains(name))) {
      Apply(cfg, "", name, node.data(), what);
      continue;
    }
    for (const auto &[key, leaf] : node)
      Apply(cfg, name, key, leaf.data(), what);
    if (!schema.contains(name))
      throw std::invalid_argument(what + ": unknown section [" + name + "]");
  }
  cfg.Resolve();
  try {
    cfg.Validate();
  } catch (const std::exception &e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig ReadExperimentConfig(const std::string &path) {
  std::ifstream in = OpenInput(path);
  return ParseExperimentConfig(in, path);
}

void SetSeed(ExperimentConfig *cfg, std::uint64_t seed) {
  cfg->seed = seed;
  cfg->Resolve();
}

std::string ManifestText(const ExperimentConfig &cfg) {
  const SeedPlan s = cfg.Seeds();
  std::ostringstream os;
  os << "seed=" << s.root << '\n'
     << "seed.data_source=" << s.data_source << '\n'
     << "seed.data_target=" << s.data_target << '\n'
     << "seed.trials_source=" << s.trials_source << '\n'
     << "seed.trials_target=" << s.trials_target << '\n'
     << "seed.sampler=" << s.sampler << '\n'
     << "seed.init=" << s.init << '\n';
  auto domain = [&](const DomainConfig &d, const ShiftSpec &sh,
                    const TrialSizes &t, const std::string &path,
                    const std::string &trials) {
    const std::string p = d.domain + ".";
    os << p << "corpus=" << path << '\n'
       << p << "trials=" << trials << '\n'
       << p << "n_speakers=" << d.n_speakers << '\n'
       << p << "n_eval_speakers=" << d.n_eval_speakers << '\n'
       << p << "utts_per_speaker=" << d.utts_per_speaker << '\n'
       << p << "segs_per_utt=" << d.segs_per_utt << '\n'
       << p << "feature_dim=" << d.feature_dim << '\n'
       << p << "speaker_rank=" << d.speaker_rank << '\n'
       << p << "speaker_spread=" << FormatDouble(d.speaker_spread) << '\n'
       << p << "utt_spread=" << FormatDouble(d.utt_spread) << '\n'
       << p << "seg_noise=" << FormatDouble(d.seg_noise) << '\n'
       << p << "shift_angle=" << FormatDouble(sh.angle) << '\n'
       << p << "shift_offset=" << FormatDouble(sh.offset) << '\n'
       << p << "trials_target=" << t.target << '\n'
       << p << "trials_nontarget=" << t.nontarget << '\n';
  };
  domain(cfg.source, cfg.source_shift, cfg.source_trials,
         cfg.SourceCorpusPath(), cfg.SourceTrialsPath());
  domain(cfg.target, cfg.target_shift, cfg.target_trials,
         cfg.TargetCorpusPath(), cfg.TargetTrialsPath());
  return os.str();
}

ExperimentData GenerateData(const ExperimentConfig &cfg) {
  const SeedPlan s = cfg.Seeds();
  ExperimentData d{Generate(cfg.source), Generate(cfg.target), {}, {}};
  d.source_trials = SplitTrials(d.source, cfg.source_trials.target,
                                cfg.source_trials.nontarget, s.trials_source);
  d.target_trials = SplitTrials(d.target, cfg.target_trials.target,
                                cfg.target_trials.nontarget, s.trials_target);
  return d;
}

ExperimentData LoadData(const ExperimentConfig &cfg) {
  auto corpus = [](const std::string &path) {
    std::ifstream in = OpenInput(path);
    return ReadCorpus(in, path);
  };
  auto trials = [](const std::string &path) {
    std::ifstream in = OpenInput(path);
    return ReadTrials(in, path);
  };
  return {corpus(cfg.SourceCorpusPath()), corpus(cfg.TargetCorpusPath()),
          trials(cfg.SourceTrialsPath()), trials(cfg.TargetTrialsPath())};
}

}  // namespace spkadapt
