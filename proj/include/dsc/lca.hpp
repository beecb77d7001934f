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

// Locally competitive algorithm for one sparse-coding layer.
//
// The membrane u integrates
//
//   du/dt = -u + D^T (x - D a) + a - r
//
// with a = T(u), where D is the layer's dictionary (applied via
// conv_transpose), D^T its adjoint (conv_forward) and r an optional top-down
// residual. The lateral-inhibition term D^T D a - a is evaluated through the
// reconstruction residual so the Gram matrix is never formed.

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dsc/conv.hpp"
#include "dsc/tensor.hpp"

namespace dsc {

enum class ThresholdKind { kSoft, kHard };

struct LcaParams {
  double lambda = 0.1;
  double dt_over_tau = 0.05;
  int n_iterations = 400;
  bool nonnegative = false;
  ThresholdKind kind = ThresholdKind::kSoft;

  // Throws PreconditionError unless 0 < dt_over_tau <= 1, lambda >= 0 and
  // n_iterations >= 1.
  void validate() const;

  friend bool operator==(const LcaParams&, const LcaParams&) = default;
};

// u and a = T(u) for one layer. Only the functions in this header write it,
// and they always write both.
struct LayerState {
  Tensor u;
  Tensor a;

  static LayerState zeros(const Shape& shape) { return {Tensor(shape), Tensor(shape)}; }
  friend bool operator==(const LayerState&, const LayerState&) = default;
};

double threshold_value(double u, double lambda, bool nonnegative, ThresholdKind kind = ThresholdKind::kSoft);
Tensor threshold(const Tensor& u, double lambda, bool nonnegative, ThresholdKind kind = ThresholdKind::kSoft);
inline Tensor threshold(const Tensor& u, const LcaParams& p) {
  return threshold(u, p.lambda, p.nonnegative, p.kind);
}

struct EnergyTerms {
  double reconstruction = 0.0;  // 1/2 ||x - D a||^2
  double sparsity = 0.0;        // lambda ||a||_1
  double total() const { return reconstruction + sparsity; }
};

EnergyTerms energy_terms(const Tensor& x, const KernelStack& k, const Tensor& a, double lambda);
double energy(const Tensor& x, const KernelStack& k, const Tensor& a, double lambda);

// One input slot feeding a layer. A multimodal layer has several; each
// contributes weight * D_i^T (x_i - D_i a) to the drive.
struct DriveTerm {
  const Tensor* target;
  const KernelStack* kernels;
  double weight = 1.0;
};

// The drive and energy of `state` against its inputs, plus the residuals
// x_i - D_i a that produced them (consumers reuse these as top-down error).
struct DriveResult {
  Tensor drive;  // sum_i w_i D_i^T (x_i - D_i a) + a
  std::vector<Tensor> residuals;
  EnergyTerms energy;
};

DriveResult compute_drive(const LayerState& state, std::span<const DriveTerm> terms, double lambda);

// Energy of code `a` against the same terms: sum_i w_i/2 ||x_i - D_i a||^2 +
// lambda ||a||_1. Bitwise equal to compute_drive(...).energy.
EnergyTerms evaluate_energy(const Tensor& a, std::span<const DriveTerm> terms, double lambda);

// Explicit Euler step u += dt (-u + drive - feedback_scale * feedback), then
// a = T(u). Throws NumericDivergence naming `layer` and `iteration` if any
// membrane value stops being finite.
LayerState integrate(const LayerState& state, const Tensor& drive, const Tensor* feedback, double feedback_scale,
                     const LcaParams& p, std::string_view layer = "layer", long iteration = 0);

// One update of a single-input layer. `feedback`, when given, must have u's
// shape.
LayerState lca_step(const LayerState& state, const Tensor& x, const KernelStack& k, const Tensor* feedback,
                    const LcaParams& p);

// max |u - (D^T (x - D a) + a)|: zero exactly at an equilibrium without
// feedback.
double fixed_point_residual(const LayerState& state, const Tensor& x, const KernelStack& k);

struct SolveResult {
  LayerState state;
  // trace[t] is the energy after t + 1 updates.
  std::vector<EnergyTerms> trace;
};

// n_iterations updates from u = 0.
SolveResult solve_single_layer(const Tensor& x, const KernelStack& k, const LcaParams& p);

}  // namespace dsc
