// src/numgrad.cc

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

#include "spkadapt/numgrad.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spkadapt {

namespace {

std::size_t ShapeProduct(const std::vector<std::size_t> &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void CheckSameDim(std::span<const double> a, std::span<const double> b,
                  const char *what) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch " << a.size() << " vs " << b.size();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::string ShapeString(const std::vector<std::size_t> &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeProduct(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape " + ShapeString(shape_) +
                                " does not match " +
                                std::to_string(data_.size()) + " values");
  }
  if (!AllFinite())
    throw std::invalid_argument("Tensor: non-finite value on construction");
}

std::size_t Tensor::NumRows() const {
  if (shape_.empty() || shape_.back() == 0) return 0;
  return data_.size() / shape_.back();
}

std::span<double> Tensor::Row(std::size_t r) {
  const std::size_t d = RowDim();
  return std::span<double>(data_).subspan(r * d, d);
}

std::span<const double> Tensor::Row(std::size_t r) const {
  const std::size_t d = RowDim();
  return std::span<const double>(data_).subspan(r * d, d);
}

bool Tensor::AllFinite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

void Tensor::Scale(double alpha) {
  for (double &v : data_) v *= alpha;
}

void Tensor::AddScaled(const Tensor &other, double alpha) {
  if (!SameShape(other)) {
    throw std::invalid_argument("Tensor::AddScaled: shape " +
                                ShapeString(shape_) + " vs " +
                                ShapeString(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += alpha * other.data_[i];
}

double Dot(std::span<const double> a, std::span<const double> b) {
  CheckSameDim(a, b, "Dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

double Cosine(std::span<const double> a, std::span<const double> b) {
  CheckSameDim(a, b, "Cosine");
  const double na = Norm(a), nb = Norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("Cosine: zero-norm input vector");
  return Dot(a, b) / (na * nb);
}

void CosineBackward(std::span<const double> a, std::span<const double> b,
                    double upstream, std::span<double> grad_a,
                    std::span<double> grad_b) {
  const double na = Norm(a), nb = Norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("CosineBackward: zero-norm input vector");
  const double inv = 1.0 / (na * nb);
  const double cos = Dot(a, b) * inv;
  // d cos / da = b / (|a||b|) - cos * a / |a|^2
  if (!grad_a.empty()) {
    const double ca = cos / (na * na);
    for (std::size_t i = 0; i < a.size(); ++i)
      grad_a[i] += upstream * (b[i] * inv - ca * a[i]);
  }
  if (!grad_b.empty()) {
    const double cb = cos / (nb * nb);
    for (std::size_t i = 0; i < b.size(); ++i)
      grad_b[i] += upstream * (a[i] * inv - cb * b[i]);
  }
}

double SqL2Dist(std::span<const double> a, std::span<const double> b) {
  CheckSameDim(a, b, "SqL2Dist");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

ParamMap FiniteDiffGrad(const std::function<double(const ParamMap &)> &f,
                        const ParamMap &params, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("FiniteDiffGrad: step must be positive");
  ParamMap probe = params;
  ParamMap grads;
  for (const auto &[name, tensor] : params) {
    Tensor g(tensor.Shape());
    Tensor &p = probe.at(name);
    for (std::size_t i = 0; i < tensor.Size(); ++i) {
      const double orig = p[i];
      p[i] = orig + h;
      const double up = f(probe);
      p[i] = orig - h;
      const double down = f(probe);
      p[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("FiniteDiffGrad: non-finite value at " +
                                 name + "[" + std::to_string(i) + "]");
      }
      g[i] = (up - down) / (2.0 * h);
    }
    grads.emplace(name, std::move(g));
  }
  return grads;
}

GradCheckResult CompareGradients(const ParamMap &analytic,
                                 const ParamMap &numeric, double floor) {
  if (!(floor > 0.0))
    throw std::invalid_argument("CompareGradients: floor must be positive");
  GradCheckResult result;
  for (const auto &[name, num] : numeric) {
    auto it = analytic.find(name);
    if (it == analytic.end())
      throw std::invalid_argument("CompareGradients: missing gradient " + name);
    const Tensor &ana = it->second;
    if (!ana.SameShape(num)) {
      throw std::invalid_argument("CompareGradients: shape mismatch for " +
                                  name);
    }
    for (std::size_t i = 0; i < num.Size(); ++i) {
      const double err = std::abs(ana[i] - num[i]) / (std::abs(num[i]) + floor);
      if (err > result.max_rel_error || result.worst_coordinate.empty()) {
        result.max_rel_error = err;
        result.worst_coordinate = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace spkadapt
