// include/spkadapt/numgrad.h

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

// Dense double-precision tensors, the vector primitives the losses are built
// from, and a central finite-difference gradient oracle.

#ifndef SPKADAPT_NUMGRAD_H_
#define SPKADAPT_NUMGRAD_H_

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace spkadapt {

/// Row-major dense array of doubles.  Every entry is finite on construction.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);
  /// Throws std::invalid_argument if the element count does not match the
  /// shape or any value is NaN/Inf.
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t> &Shape() const { return shape_; }
  std::size_t Rank() const { return shape_.size(); }
  std::size_t Dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t Size() const { return data_.size(); }
  bool Empty() const { return data_.empty(); }

  std::span<double> Values() { return data_; }
  std::span<const double> Values() const { return data_; }

  double &operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double &At(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double At(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double &At(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double At(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Number of rows when the tensor is viewed as (Size / last_dim) x last_dim.
  std::size_t NumRows() const;
  std::size_t RowDim() const { return shape_.empty() ? 0 : shape_.back(); }
  std::span<double> Row(std::size_t r);
  std::span<const double> Row(std::size_t r) const;

  bool AllFinite() const;
  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }

  void SetZero();
  void Scale(double alpha);
  /// this += alpha * other.  Shapes must match.
  void AddScaled(const Tensor &other, double alpha);

  bool operator==(const Tensor &other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string ShapeString(const std::vector<std::size_t> &shape);

/// Named parameter (or gradient) tensors.
using ParamMap = std::map<std::string, Tensor>;

struct GradResult {
  double value = 0.0;
  ParamMap grads;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);

/// dot(a,b) / (|a| |b|).  Throws on dimension mismatch or a zero-norm input.
double Cosine(std::span<const double> a, std::span<const double> b);

/// Accumulates upstream * d cos(a,b) / da into grad_a and likewise for b.
/// Either output span may be empty to skip it.
void CosineBackward(std::span<const double> a, std::span<const double> b,
                    double upstream, std::span<double> grad_a,
                    std::span<double> grad_b);

/// Sum of squared component differences.  Throws on dimension mismatch.
double SqL2Dist(std::span<const double> a, std::span<const double> b);

/// Central differences (f(p+h) - f(p-h)) / 2h for every coordinate of every
/// parameter.  A non-finite probe raises std::runtime_error naming the
/// coordinate as "name[flat_index]".
ParamMap FiniteDiffGrad(const std::function<double(const ParamMap &)> &f,
                        const ParamMap &params, double h);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_coordinate;
};

/// max over coordinates of |analytic - numeric| / (|numeric| + floor).
/// Every key of `numeric` must be present in `analytic` with equal shape.
GradCheckResult CompareGradients(const ParamMap &analytic,
                                 const ParamMap &numeric, double floor = 1e-8);

}  // namespace spkadapt

#endif  // SPKADAPT_NUMGRAD_H_
