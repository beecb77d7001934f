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

// Dictionary learning by alternation: infer codes with the current kernels,
// then take a gradient step on every kernel stack against the layer's own
// reconstruction target and renormalize.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsc/errors.hpp"
#include "dsc/graph.hpp"
#include "dsc/sample.hpp"

namespace dsc {

struct TrainSchedule {
  int epochs = 3;
  double learning_rate = 0.05;
  int update_every = 1;  // inputs per dictionary update
  std::uint64_t seed = 1;

  void validate() const;

  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

// Gradient of 1/2 ||x - D a||^2 with respect to the kernels of `k`, with `a`
// held fixed: -(correlation of the residual x - D a with a).
Tensor dictionary_gradient(const Tensor& input, const Tensor& a, const KernelStack& k);

// k <- k - learning_rate * gradient, then every kernel back to unit norm.
// Throws NumericDivergence naming `layer` if a kernel norm overflows or
// vanishes before renormalization.
void apply_update(KernelStack& k, const Tensor& gradient, double learning_rate, const std::string& layer = "");

struct MetricRow {
  int epoch;
  std::size_t input_index;  // position in the training set, not in the epoch order
  std::string layer;
  double recon_energy;
  double sparsity_fraction;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

class TrainingDivergence : public Error {
 public:
  TrainingDivergence(int epoch, std::size_t input_index, const NumericDivergence& cause)
      : Error("training diverged at epoch " + std::to_string(epoch) + ", input " + std::to_string(input_index) +
              ": " + cause.what()),
        epoch_(epoch),
        input_index_(input_index),
        layer_(cause.layer()) {}

  int epoch() const { return epoch_; }
  std::size_t input_index() const { return input_index_; }
  const std::string& layer() const { return layer_; }

 private:
  int epoch_;
  std::size_t input_index_;
  std::string layer_;
};

struct TrainHooks {
  // Called after every dictionary update with the updated graph.
  std::function<void(const LayerGraph&)> on_update;
};

struct TrainResult {
  LayerGraph graph;
  std::vector<MetricRow> metrics;
  std::uint64_t inputs_seen = 0;
  int epochs_completed = 0;
};

// Each epoch visits the samples in a seeded random order. Per input: full
// solve_network with both branches, then accumulate each layer's gradient
// against its final inputs (weighted by the parent weight); every
// `update_every` inputs the mean gradient is applied with step
// learning_rate * layer.learning_rate_scale. A trailing partial batch is
// applied at the end of each epoch. Throws TrainingDivergence.
TrainResult train(const std::vector<Sample>& data, LayerGraph graph, const TrainSchedule& schedule,
                  const TrainHooks& hooks = {});

}  // namespace dsc
