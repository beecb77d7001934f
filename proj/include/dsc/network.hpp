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

// Whole-network inference over a LayerGraph.
//
// Every iteration all active layers step together from the previous
// iteration's states:
//   - a layer's target is its parent's dense membrane u (the raw input for
//     layers reading "external"), never the thresholded code;
//   - the joint layer reconstructs every present parent from one code map;
//   - with feedback on, each layer is additionally inhibited by the residual
//     u - D_child a_child of every child that reconstructs it.
// Layers of an absent branch are frozen at zero and the joint layer drops
// their reconstruction terms.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dsc/graph.hpp"
#include "dsc/lca.hpp"
#include "dsc/sample.hpp"

namespace dsc {

struct NetworkState {
  std::vector<LayerState> layers;  // indexed like LayerGraph::layers()
  std::vector<bool> active;
  // energy[l][t]: layer l's energy against its own inputs after t + 1 sweeps.
  std::vector<std::vector<EnergyTerms>> energy;
  int iteration = 0;

  const LayerState& operator[](std::size_t i) const { return layers.at(i); }
};

using IterationObserver = std::function<void(const NetworkState&)>;

// The targets layer `index` reconstructs, one per parent slot: the raw input
// for external layers, otherwise the parent's membrane u.
std::vector<Tensor> feedforward_input(const LayerGraph& graph, std::size_t index, const NetworkState& state,
                                      const Sample& sample);

// u_parent - D_child a_child, where D_child is the child's kernel stack for
// `slot`.
Tensor topdown_residual(const Tensor& u_parent, const DictionaryLayer& child, std::size_t slot,
                        const Tensor& a_child);

// Runs the configured number of synchronous sweeps from u = 0. Only tensors of
// present branches are read. Throws PreconditionError when nothing is
// present and NumericDivergence naming the layer and iteration.
NetworkState solve_network(const LayerGraph& graph, const Sample& sample, BranchPresence presence = {},
                           const IterationObserver& observer = {});

// The sparse code a = T(u) of the named layer.
Tensor extract_code(const LayerGraph& graph, const NetworkState& state, const std::string& layer);

// Per-layer energy against its inputs in `state` (same values solve_network
// records for the final sweep). Inactive layers report zero.
std::vector<EnergyTerms> layer_energies(const LayerGraph& graph, const NetworkState& state, const Sample& sample);

// Per-layer energy at a = 0 with the inputs in `state`: sum_i w_i/2 ||x_i||^2.
std::vector<double> zero_code_energies(const LayerGraph& graph, const NetworkState& state, const Sample& sample);

// Per-layer max |u - (sum_i w_i D_i^T (x_i - D_i a) + a)|, ignoring feedback.
std::vector<double> fixed_point_residuals(const LayerGraph& graph, const NetworkState& state, const Sample& sample);

}  // namespace dsc
