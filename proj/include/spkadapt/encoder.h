// include/spkadapt/encoder.h

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

// Feed-forward embedding extractor with classification heads.

#ifndef SPKADAPT_ENCODER_H_
#define SPKADAPT_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spkadapt/numgrad.h"

namespace spkadapt {

enum class Activation { kNone, kTanh };

struct LayerParams {
  Tensor weight;  // out x in
  Tensor bias;    // out
  Activation activation = Activation::kNone;

  bool operator==(const LayerParams &) const = default;
};

/// Layers chain F -> H -> ... -> D.  source_head is C_s x D, target_head is
/// C_t x D and may be empty when no target classifier is trained.
struct EncoderParams {
  std::vector<LayerParams> layers;
  Tensor source_head;
  Tensor target_head;

  std::size_t InputDim() const;
  std::size_t EmbeddingDim() const;

  /// Throws std::invalid_argument if shapes do not chain or values are not
  /// finite.
  void Validate() const;

  /// Same structure, every value zero.  Used as a gradient accumulator.
  EncoderParams ZerosLike() const;

  /// Names: "layer<i>.weight", "layer<i>.bias", "head.source", "head.target"
  /// (heads only when non-empty).
  ParamMap ToParamMap() const;
  /// Overwrites values from a map produced by ToParamMap().
  void AssignFrom(const ParamMap &map);

  bool operator==(const EncoderParams &) const = default;
};

struct EncoderDims {
  std::size_t input_dim = 20;
  std::vector<std::size_t> hidden = {32};
  std::size_t embedding_dim = 16;
  std::size_t source_classes = 0;
  std::size_t target_classes = 0;
};

/// Hidden layers use tanh, the embedding layer is linear.  Weights are drawn
/// from N(0, 1/fan_in), biases start at zero, head rows from N(0, 1/D).
EncoderParams InitParams(std::uint64_t seed, const EncoderDims &dims);

/// Fresh target head of `classes` rows, drawn like InitParams' heads.
Tensor InitHead(std::uint64_t seed, std::size_t classes, std::size_t dim);

/// Deep copy taken before adapting a source model to a new domain.
EncoderParams CloneForAdaptation(const EncoderParams &params);

/// Per-layer outputs kept for the backward pass.
struct ForwardCache {
  Tensor input;
  std::vector<Tensor> outputs;
};

/// features is B x F; returns B x D embeddings.
Tensor Forward(const EncoderParams &params, const Tensor &features,
               ForwardCache *cache = nullptr);

/// Accumulates d loss / d params into `grads` (same structure as params),
/// given d loss / d embeddings for the batch the cache was built from.
void Backward(const EncoderParams &params, const ForwardCache &cache,
              const Tensor &grad_embeddings, EncoderParams *grads);

/// Text checkpoint; values are written in shortest round-trip form so a
/// save/load cycle is bit-exact.
void WriteCheckpoint(std::ostream &out, const EncoderParams &params);
EncoderParams ReadCheckpoint(std::istream &in, const std::string &what);

}  // namespace spkadapt

#endif  // SPKADAPT_ENCODER_H_
