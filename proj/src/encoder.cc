// src/encoder.cc

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

#include "spkadapt/encoder.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spkadapt/text_io.h"

namespace spkadapt {

namespace {

constexpr const char *kCheckpointMagic = "spkadapt-encoder";
constexpr int kCheckpointVersion = 1;

std::string LayerName(std::size_t i, const char *what) {
  return "layer" + std::to_string(i) + "." + what;
}

const char *ActivationName(Activation a) {
  return a == Activation::kTanh ? "tanh" : "none";
}

Activation ParseActivation(std::string_view s, const std::string &where) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "none") return Activation::kNone;
  throw std::runtime_error(where + ": unknown activation '" + std::string(s) +
                           "'");
}

Tensor GaussianMatrix(std::mt19937_64 &rng, std::size_t rows, std::size_t cols,
                      double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Tensor t({rows, cols});
  for (double &v : t.Values()) v = normal(rng);
  return t;
}

void WriteMatrix(std::ostream &out, const Tensor &t) {
  const std::size_t cols = t.RowDim();
  for (std::size_t r = 0; r < t.NumRows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ' ';
      out << FormatDouble(t.Row(r)[c]);
    }
    out << '\n';
  }
}

class CheckpointReader {
 public:
  CheckpointReader(std::istream &in, std::string what)
      : in_(in), what_(std::move(what)) {}

  std::vector<std::string_view> Line() {
    while (std::getline(in_, buf_)) {
      ++line_no_;
      auto f = SplitFields(buf_);
      if (!f.empty()) return f;
    }
    throw std::runtime_error(what_ + ": unexpected end of checkpoint");
  }

  std::vector<std::string_view> Expect(std::string_view key, std::size_t n) {
    auto f = Line();
    if (f[0] != key || f.size() != n)
      throw std::runtime_error(Where() + ": expected '" + std::string(key) +
                               "' record");
    return f;
  }

  std::size_t Count(std::string_view tok) {
    const long long v = ParseInt(tok, Where());
    if (v < 0) throw std::runtime_error(Where() + ": negative size");
    return static_cast<std::size_t>(v);
  }

  Tensor Matrix(std::size_t rows, std::size_t cols) {
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto f = Line();
      if (f.size() != cols)
        throw std::runtime_error(Where() + ": expected " +
                                 std::to_string(cols) + " values");
      for (auto tok : f) data.push_back(ParseDouble(tok, Where()));
    }
    return Tensor({rows, cols}, std::move(data));
  }

  std::string Where() const { return what_ + ":" + std::to_string(line_no_); }

 private:
  std::istream &in_;
  std::string what_;
  std::string buf_;
  std::size_t line_no_ = 0;
};

}  // namespace

std::size_t EncoderParams::InputDim() const {
  return layers.empty() ? 0 : layers.front().weight.Dim(1);
}

std::size_t EncoderParams::EmbeddingDim() const {
  return layers.empty() ? 0 : layers.back().weight.Dim(0);
}

void EncoderParams::Validate() const {
  if (layers.empty()) throw std::invalid_argument("EncoderParams: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerParams &l = layers[i];
    if (l.weight.Rank() != 2 || l.bias.Rank() != 1 ||
        l.bias.Dim(0) != l.weight.Dim(0))
      throw std::invalid_argument("EncoderParams: malformed layer " +
                                  std::to_string(i));
    if (i > 0 && l.weight.Dim(1) != layers[i - 1].weight.Dim(0))
      throw std::invalid_argument("EncoderParams: layer " + std::to_string(i) +
                                  " input does not chain");
    if (!l.weight.AllFinite() || !l.bias.AllFinite())
      throw std::invalid_argument("EncoderParams: non-finite layer " +
                                  std::to_string(i));
  }
  for (const Tensor *h : {&source_head, &target_head}) {
    if (h->Empty()) continue;
    if (h->Rank() != 2 || h->Dim(1) != EmbeddingDim())
      throw std::invalid_argument(
          "EncoderParams: head width does not match embedding dim");
    if (!h->AllFinite())
      throw std::invalid_argument("EncoderParams: non-finite head");
  }
}

EncoderParams EncoderParams::ZerosLike() const {
  EncoderParams z;
  for (const LayerParams &l : layers)
    z.layers.push_back({Tensor(l.weight.Shape()), Tensor(l.bias.Shape()),
                        l.activation});
  if (!source_head.Empty()) z.source_head = Tensor(source_head.Shape());
  if (!target_head.Empty()) z.target_head = Tensor(target_head.Shape());
  return z;
}

ParamMap EncoderParams::ToParamMap() const {
  ParamMap map;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    map.emplace(LayerName(i, "weight"), layers[i].weight);
    map.emplace(LayerName(i, "bias"), layers[i].bias);
  }
  if (!source_head.Empty()) map.emplace("head.source", source_head);
  if (!target_head.Empty()) map.emplace("head.target", target_head);
  return map;
}

void EncoderParams::AssignFrom(const ParamMap &map) {
  auto assign = [&map](const std::string &name, Tensor &dst) {
    auto it = map.find(name);
    if (it == map.end()) return;
    if (!it->second.SameShape(dst))
      throw std::invalid_argument("AssignFrom: shape mismatch for " + name);
    dst = it->second;
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    assign(LayerName(i, "weight"), layers[i].weight);
    assign(LayerName(i, "bias"), layers[i].bias);
  }
  if (!source_head.Empty()) assign("head.source", source_head);
  if (!target_head.Empty()) assign("head.target", target_head);
}

Tensor InitHead(std::uint64_t seed, std::size_t classes, std::size_t dim) {
  if (classes == 0) return Tensor();
  std::mt19937_64 rng(seed);
  return GaussianMatrix(rng, classes, dim, 1.0 / std::sqrt(double(dim)));
}

EncoderParams InitParams(std::uint64_t seed, const EncoderDims &dims) {
  if (dims.input_dim == 0 || dims.embedding_dim == 0)
    throw std::invalid_argument("InitParams: zero input or embedding dim");
  std::mt19937_64 rng(seed);
  EncoderParams p;
  std::size_t in = dims.input_dim;
  std::vector<std::size_t> outs = dims.hidden;
  outs.push_back(dims.embedding_dim);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (outs[i] == 0) throw std::invalid_argument("InitParams: zero layer width");
    const bool last = i + 1 == outs.size();
    p.layers.push_back({GaussianMatrix(rng, outs[i], in, 1.0 / std::sqrt(double(in))),
                        Tensor({outs[i]}),
                        last ? Activation::kNone : Activation::kTanh});
    in = outs[i];
  }
  // Heads use their own streams so adding a target head leaves the rest of
  // the initialization unchanged.
  p.source_head = InitHead(seed ^ 0x9e3779b97f4a7c15ULL, dims.source_classes,
                           dims.embedding_dim);
  p.target_head = InitHead(seed ^ 0xc2b2ae3d27d4eb4fULL, dims.target_classes,
                           dims.embedding_dim);
  return p;
}

EncoderParams CloneForAdaptation(const EncoderParams &params) {
  params.Validate();
  return params;
}

Tensor Forward(const EncoderParams &params, const Tensor &features,
               ForwardCache *cache) {
  if (features.Rank() != 2 || features.Dim(1) != params.InputDim()) {
    throw std::invalid_argument("Forward: features " +
                                ShapeString(features.Shape()) +
                                " do not match input dim " +
                                std::to_string(params.InputDim()));
  }
  const std::size_t b = features.Dim(0);
  if (cache) {
    cache->input = features;
    cache->outputs.clear();
  }
  Tensor x = features;
  for (const LayerParams &l : params.layers) {
    const std::size_t out_dim = l.weight.Dim(0), in_dim = l.weight.Dim(1);
    Tensor y({b, out_dim});
    for (std::size_t r = 0; r < b; ++r) {
      auto xr = x.Row(r);
      auto yr = y.Row(r);
      for (std::size_t o = 0; o < out_dim; ++o) {
        auto w = l.weight.Row(o);
        double s = l.bias[o];
        for (std::size_t i = 0; i < in_dim; ++i) s += w[i] * xr[i];
        yr[o] = l.activation == Activation::kTanh ? std::tanh(s) : s;
      }
    }
    if (cache) cache->outputs.push_back(y);
    x = std::move(y);
  }
  return x;
}

void Backward(const EncoderParams &params, const ForwardCache &cache,
              const Tensor &grad_embeddings, EncoderParams *grads) {
  if (cache.outputs.size() != params.layers.size())
    throw std::invalid_argument("Backward: cache does not match params");
  if (!grad_embeddings.SameShape(cache.outputs.back()))
    throw std::invalid_argument("Backward: gradient shape " +
                                ShapeString(grad_embeddings.Shape()) +
                                " does not match embeddings");
  const std::size_t b = grad_embeddings.Dim(0);
  Tensor delta = grad_embeddings;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const LayerParams &l = params.layers[li];
    LayerParams &g = grads->layers[li];
    const Tensor &out = cache.outputs[li];
    const Tensor &in = li == 0 ? cache.input : cache.outputs[li - 1];
    const std::size_t out_dim = l.weight.Dim(0), in_dim = l.weight.Dim(1);
    if (l.activation == Activation::kTanh) {
      for (std::size_t k = 0; k < delta.Size(); ++k)
        delta[k] *= 1.0 - out[k] * out[k];
    }
    Tensor prev({b, in_dim});
    for (std::size_t r = 0; r < b; ++r) {
      auto dr = delta.Row(r);
      auto xr = in.Row(r);
      auto pr = prev.Row(r);
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        g.bias[o] += d;
        auto gw = g.weight.Row(o);
        auto w = l.weight.Row(o);
        for (std::size_t i = 0; i < in_dim; ++i) {
          gw[i] += d * xr[i];
          pr[i] += d * w[i];
        }
      }
    }
    delta = std::move(prev);
  }
}

void WriteCheckpoint(std::ostream &out, const EncoderParams &params) {
  params.Validate();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "layers " << params.layers.size() << '\n';
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const LayerParams &l = params.layers[i];
    out << "layer " << i << ' ' << l.weight.Dim(0) << ' ' << l.weight.Dim(1)
        << ' ' << ActivationName(l.activation) << '\n';
    WriteMatrix(out, l.weight);
    WriteMatrix(out, Tensor({1, l.bias.Size()},
                            std::vector<double>(l.bias.Values().begin(),
                                                l.bias.Values().end())));
  }
  const std::size_t d = params.EmbeddingDim();
  for (const auto &[name, head] :
       {std::pair<const char *, const Tensor *>{"source", &params.source_head},
        {"target", &params.target_head}}) {
    out << "head " << name << ' ' << (head->Empty() ? 0 : head->Dim(0)) << ' '
        << d << '\n';
    if (!head->Empty()) WriteMatrix(out, *head);
  }
  out << "end\n";
}

EncoderParams ReadCheckpoint(std::istream &in, const std::string &what) {
  CheckpointReader rd(in, what);
  auto magic = rd.Line();
  if (magic.size() != 2 || magic[0] != kCheckpointMagic)
    throw std::runtime_error(what + ": not an encoder checkpoint");
  if (ParseInt(magic[1], what) != kCheckpointVersion)
    throw std::runtime_error(what + ": unsupported checkpoint version " +
                             std::string(magic[1]));
  EncoderParams p;
  const std::size_t n_layers = rd.Count(rd.Expect("layers", 2)[1]);
  for (std::size_t i = 0; i < n_layers; ++i) {
    auto f = rd.Expect("layer", 5);
    if (rd.Count(f[1]) != i)
      throw std::runtime_error(rd.Where() + ": layers out of order");
    const std::size_t rows = rd.Count(f[2]), cols = rd.Count(f[3]);
    const Activation act = ParseActivation(f[4], rd.Where());
    Tensor w = rd.Matrix(rows, cols);
    Tensor b = rd.Matrix(1, rows);
    p.layers.push_back(
        {std::move(w),
         Tensor({rows}, std::vector<double>(b.Values().begin(), b.Values().end())),
         act});
  }
  for (const char *name : {"source", "target"}) {
    auto f = rd.Expect("head", 4);
    if (f[1] != name)
      throw std::runtime_error(rd.Where() + ": expected head " + name);
    const std::size_t rows = rd.Count(f[2]), cols = rd.Count(f[3]);
    Tensor h = rows == 0 ? Tensor() : rd.Matrix(rows, cols);
    (std::string(name) == "source" ? p.source_head : p.target_head) = std::move(h);
  }
  rd.Expect("end", 1);
  try {
    p.Validate();
  } catch (const std::invalid_argument &e) {
    throw std::runtime_error(what + ": " + e.what());
  }
  return p;
}

}  // namespace spkadapt
