// Copyright 2026 The DSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Strided 2-D cross-correlation and its exact adjoint.
//
// A KernelStack holds `features` kernels of shape [in_channels, kh, kw]. For
// an input of shape [C, H, W] the code map has shape [features, H/sy, W/sx].
// Output site (oy, ox) looks at input rows oy*sy + i - pad_y, i in [0, kh),
// where pad_y = (kh - sy) / 2 (and likewise for columns); reads outside the
// input are zero. With stride 1 and odd kernels this is "same" padding.
//
// conv_forward computes the analysis map (the transpose of the dictionary
// applied to a signal); conv_transpose stamps kernels weighted by the code to
// synthesize a signal. The two are exact adjoints for every geometry.

#pragma once

#include <cstddef>
#include <random>

#include "dsc/tensor.hpp"

namespace dsc {

struct Stride {
  std::size_t y = 1;
  std::size_t x = 1;
  friend bool operator==(const Stride&, const Stride&) = default;
};

class KernelStack {
 public:
  KernelStack() = default;
  // `kernels` must be rank 4: [features, in_channels, kh, kw].
  KernelStack(Tensor kernels, Stride stride);

  // Unit-norm Gaussian kernels drawn from `rng`.
  static KernelStack random(std::size_t features, std::size_t in_channels, std::size_t kh, std::size_t kw,
                            Stride stride, std::mt19937_64& rng);

  std::size_t features() const { return kernels_.dim(0); }
  std::size_t in_channels() const { return kernels_.dim(1); }
  std::size_t kernel_h() const { return kernels_.dim(2); }
  std::size_t kernel_w() const { return kernels_.dim(3); }
  std::size_t kernel_size() const { return in_channels() * kernel_h() * kernel_w(); }
  const Stride& stride() const { return stride_; }
  long pad_y() const { return (static_cast<long>(kernel_h()) - static_cast<long>(stride_.y)) / 2; }
  long pad_x() const { return (static_cast<long>(kernel_w()) - static_cast<long>(stride_.x)) / 2; }

  const Tensor& kernels() const { return kernels_; }
  Tensor& kernels() { return kernels_; }

  double kernel_norm(std::size_t feature) const;
  // Rescales every kernel to unit Euclidean norm. Zero kernels are left as is.
  void normalize();

  // Shape of the code map for an input of `input_shape`. Throws GeometryError
  // when channels disagree or the stride does not divide the extent.
  Shape code_shape(const Shape& input_shape) const;
  // Inverse of code_shape.
  Shape signal_shape(const Shape& code_shape) const;

  friend bool operator==(const KernelStack&, const KernelStack&) = default;

 private:
  Tensor kernels_;
  Stride stride_;
};

// Cross-correlation of `input` [C, H, W] with every kernel: [F, H/sy, W/sx].
Tensor conv_forward(const Tensor& input, const KernelStack& k);

// Adjoint of conv_forward: synthesizes a [C, Ho*sy, Wo*sx] signal from a
// code map [F, Ho, Wo].
Tensor conv_transpose(const Tensor& code, const KernelStack& k);

// Correlation of a signal with a code map, giving a tensor shaped like
// k.kernels(): out[f, c, i, j] = sum_{oy, ox} code[f, oy, ox] * signal[c, oy*sy+i-pad_y, ox*sx+j-pad_x].
// This is the derivative of <signal, conv_transpose(code, k)> with respect to
// the kernel weights.
Tensor kernel_correlation(const Tensor& signal, const Tensor& code, const KernelStack& k);

}  // namespace dsc
