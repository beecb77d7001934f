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

#include "dsc/lca.hpp"

#include <cmath>
#include <string>

#include "dsc/errors.hpp"

namespace dsc {

void LcaParams::validate() const {
  if (!(dt_over_tau > 0.0 && dt_over_tau <= 1.0)) {
    throw PreconditionError("dt_over_tau must lie in (0, 1], got " + std::to_string(dt_over_tau));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw PreconditionError("lambda must be finite and >= 0, got " + std::to_string(lambda));
  }
  if (n_iterations < 1) throw PreconditionError("n_iterations must be >= 1");
}

double threshold_value(double u, double lambda, bool nonnegative, ThresholdKind kind) {
  if (kind == ThresholdKind::kHard) {
    if (nonnegative) return u > lambda ? u : 0.0;
    return std::abs(u) > lambda ? u : 0.0;
  }
  if (nonnegative) return u > lambda ? u - lambda : 0.0;
  if (u > lambda) return u - lambda;
  if (u < -lambda) return u + lambda;
  return 0.0;
}

Tensor threshold(const Tensor& u, double lambda, bool nonnegative, ThresholdKind kind) {
  if (lambda < 0.0) throw PreconditionError("threshold requires lambda >= 0");
  Tensor a(u.shape());
  const double* src = u.data();
  double* dst = a.data();
  for (std::size_t i = 0; i < u.size(); ++i) dst[i] = threshold_value(src[i], lambda, nonnegative, kind);
  return a;
}

EnergyTerms energy_terms(const Tensor& x, const KernelStack& k, const Tensor& a, double lambda) {
  const Tensor residual = subtract(x, conv_transpose(a, k));
  return {0.5 * squared_l2_norm(residual), lambda * l1_norm(a)};
}

double energy(const Tensor& x, const KernelStack& k, const Tensor& a, double lambda) {
  return energy_terms(x, k, a, lambda).total();
}

DriveResult compute_drive(const LayerState& state, std::span<const DriveTerm> terms, double lambda) {
  DriveResult out;
  out.drive = Tensor(state.u.shape());
  out.residuals.reserve(terms.size());
  for (const DriveTerm& term : terms) {
    Tensor residual = subtract(*term.target, conv_transpose(state.a, *term.kernels));
    out.energy.reconstruction += term.weight * 0.5 * squared_l2_norm(residual);
    axpy(term.weight, conv_forward(residual, *term.kernels), out.drive);
    out.residuals.push_back(std::move(residual));
  }
  axpy(1.0, state.a, out.drive);
  out.energy.sparsity = lambda * l1_norm(state.a);
  return out;
}

EnergyTerms evaluate_energy(const Tensor& a, std::span<const DriveTerm> terms, double lambda) {
  EnergyTerms e;
  for (const DriveTerm& term : terms) {
    const Tensor residual = subtract(*term.target, conv_transpose(a, *term.kernels));
    e.reconstruction += term.weight * 0.5 * squared_l2_norm(residual);
  }
  e.sparsity = lambda * l1_norm(a);
  return e;
}

LayerState integrate(const LayerState& state, const Tensor& drive, const Tensor* feedback, double feedback_scale,
                     const LcaParams& p, std::string_view layer, long iteration) {
  require_same_shape(state.u, drive, "lca drive");
  if (feedback) require_same_shape(state.u, *feedback, "lca feedback");
  LayerState next{state.u, Tensor(state.u.shape())};
  double* u = next.u.data();
  const double* d = drive.data();
  const double dt = p.dt_over_tau;
  bool finite = true;
  if (feedback) {
    const double* r = feedback->data();
    for (std::size_t i = 0; i < next.u.size(); ++i) {
      u[i] += dt * (-u[i] + d[i] - feedback_scale * r[i]);
      finite &= std::isfinite(u[i]);
    }
  } else {
    for (std::size_t i = 0; i < next.u.size(); ++i) {
      u[i] += dt * (-u[i] + d[i]);
      finite &= std::isfinite(u[i]);
    }
  }
  if (!finite) throw NumericDivergence(std::string(layer), iteration, "membrane potential is not finite");
  double* a = next.a.data();
  for (std::size_t i = 0; i < next.u.size(); ++i) a[i] = threshold_value(u[i], p.lambda, p.nonnegative, p.kind);
  return next;
}

LayerState lca_step(const LayerState& state, const Tensor& x, const KernelStack& k, const Tensor* feedback,
                    const LcaParams& p) {
  const DriveTerm term{&x, &k, 1.0};
  const DriveResult dr = compute_drive(state, {&term, 1}, p.lambda);
  return integrate(state, dr.drive, feedback, 1.0, p);
}

double fixed_point_residual(const LayerState& state, const Tensor& x, const KernelStack& k) {
  const DriveTerm term{&x, &k, 1.0};
  const DriveResult dr = compute_drive(state, {&term, 1}, 0.0);
  return max_abs(subtract(state.u, dr.drive));
}

SolveResult solve_single_layer(const Tensor& x, const KernelStack& k, const LcaParams& p) {
  p.validate();
  SolveResult out;
  out.state = LayerState::zeros(k.code_shape(x.shape()));
  out.trace.reserve(static_cast<std::size_t>(p.n_iterations));
  const DriveTerm term{&x, &k, 1.0};
  for (int t = 0; t < p.n_iterations; ++t) {
    DriveResult dr = compute_drive(out.state, {&term, 1}, p.lambda);
    if (t > 0) out.trace.push_back(dr.energy);
    out.state = integrate(out.state, dr.drive, nullptr, 1.0, p, "single-layer", t);
  }
  out.trace.push_back(energy_terms(x, k, out.state.a, p.lambda));
  return out;
}

}  // namespace dsc
