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

#include "dsc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "dsc/analysis.hpp"
#include "dsc/network.hpp"

namespace dsc {

void TrainSchedule::validate() const {
  if (epochs < 0) throw PreconditionError("epochs must be >= 0");
  if (!(learning_rate >= 0.0)) throw PreconditionError("learning_rate must be >= 0");
  if (update_every < 1) throw PreconditionError("update_every must be >= 1");
}

Tensor dictionary_gradient(const Tensor& input, const Tensor& a, const KernelStack& k) {
  const Tensor residual = subtract(input, conv_transpose(a, k));
  return scale(kernel_correlation(residual, a, k), -1.0);
}

void apply_update(KernelStack& k, const Tensor& gradient, double learning_rate, const std::string& layer) {
  axpy(-learning_rate, gradient, k.kernels());
  for (std::size_t f = 0; f < k.features(); ++f) {
    const double norm = k.kernel_norm(f);
    // An overflowing norm would silently renormalize the kernel to zero.
    if (!std::isfinite(norm) || norm == 0.0) {
      throw NumericDivergence(layer, 0, "kernel " + std::to_string(f) + " has norm " + std::to_string(norm) +
                                            " after the update");
    }
  }
  k.normalize();
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "epoch,input_index,layer,recon_energy,sparsity_fraction\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.input_index << ',' << r.layer << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.recon_energy, r.sparsity_fraction);
    out << buf;
  }
}

TrainResult train(const std::vector<Sample>& data, LayerGraph graph, const TrainSchedule& schedule,
                  const TrainHooks& hooks) {
  schedule.validate();
  if (data.empty()) throw PreconditionError("train: dataset is empty");

  TrainResult result;
  std::mt19937_64 rng(schedule.seed);
  std::vector<std::size_t> visit(data.size());

  // Accumulated gradients, one per (layer, slot).
  std::vector<std::vector<Tensor>> acc(graph.size());
  auto reset_acc = [&] {
    for (std::size_t i = 0; i < graph.size(); ++i) {
      acc[i].clear();
      for (const auto& k : graph.layer(i).kernels) acc[i].emplace_back(k.kernels().shape());
    }
  };
  int pending = 0;
  auto flush = [&](int epoch, std::size_t idx) {
    if (pending == 0) return;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto& L = graph.layer(i);
      const double step = schedule.learning_rate * L.learning_rate_scale / pending;
      for (std::size_t s = 0; s < L.kernels.size(); ++s) {
        try {
          apply_update(graph.kernels(i, s), acc[i][s], step, L.name);
        } catch (const NumericDivergence& e) {
          throw TrainingDivergence(epoch, idx, e);
        }
      }
    }
    pending = 0;
    reset_acc();
    if (hooks.on_update) hooks.on_update(graph);
  };
  reset_acc();

  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    std::iota(visit.begin(), visit.end(), 0);
    std::shuffle(visit.begin(), visit.end(), rng);
    for (std::size_t idx : visit) {
      const Sample& sample = data[idx];
      NetworkState st;
      try {
        st = solve_network(graph, sample);
      } catch (const NumericDivergence& e) {
        throw TrainingDivergence(epoch, idx, e);
      }
      for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto& L = graph.layer(i);
        const auto inputs = feedforward_input(graph, i, st, sample);
        for (std::size_t s = 0; s < L.kernels.size(); ++s) {
          axpy(L.parent_weights[s], dictionary_gradient(inputs[s], st.layers[i].a, L.kernels[s]), acc[i][s]);
        }
        result.metrics.push_back({epoch, idx, L.name, st.energy[i].back().reconstruction,
                                  sparsity_fraction(st.layers[i].a)});
        if (!std::isfinite(result.metrics.back().recon_energy)) {
          throw TrainingDivergence(epoch, idx, NumericDivergence(L.name, st.iteration, "energy is not finite"));
        }
      }
      ++result.inputs_seen;
      if (++pending == schedule.update_every) flush(epoch, idx);
    }
    flush(epoch, visit.back());
    result.epochs_completed = epoch + 1;
  }
  result.graph = std::move(graph);
  return result;
}

}  // namespace dsc
