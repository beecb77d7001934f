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

#include "dsc/network.hpp"

#include <algorithm>

#include "dsc/errors.hpp"

namespace dsc {
namespace {

const Tensor& external_tensor(Branch b, const Sample& sample) {
  if (b == Branch::kText) return sample.text;
  return sample.image;
}

// Drive terms for one layer against `layers`, skipping slots whose parent is
// inactive. `slots` receives the parent slot of each emitted term.
std::vector<DriveTerm> make_terms(const LayerGraph& graph, std::size_t i, const std::vector<LayerState>& layers,
                                  const std::vector<bool>& active, const Sample& sample,
                                  std::vector<std::size_t>* slots = nullptr) {
  const DictionaryLayer& L = graph.layer(i);
  std::vector<DriveTerm> terms;
  for (std::size_t s = 0; s < L.parents.size(); ++s) {
    const auto parent = graph.parent_index(i, s);
    const Tensor* target = nullptr;
    if (!parent) {
      target = &external_tensor(L.branch, sample);
    } else if (active[*parent]) {
      target = &layers[*parent].u;
    } else {
      continue;
    }
    terms.push_back({target, &L.kernels[s], L.parent_weights[s]});
    if (slots) slots->push_back(s);
  }
  return terms;
}

std::vector<bool> active_layers(const LayerGraph& graph, BranchPresence presence) {
  std::vector<bool> active(graph.size(), false);
  for (std::size_t i : graph.order()) {
    const auto& L = graph.layer(i);
    if (L.branch != Branch::kJoint) {
      active[i] = presence.present(L.branch);
      continue;
    }
    for (std::size_t s = 0; s < L.parents.size(); ++s) {
      const auto p = graph.parent_index(i, s);
      if (p && active[*p]) active[i] = true;
    }
  }
  return active;
}

}  // namespace

std::vector<Tensor> feedforward_input(const LayerGraph& graph, std::size_t index, const NetworkState& state,
                                      const Sample& sample) {
  const DictionaryLayer& L = graph.layer(index);
  std::vector<Tensor> out;
  for (std::size_t s = 0; s < L.parents.size(); ++s) {
    const auto parent = graph.parent_index(index, s);
    if (!parent) {
      out.push_back(external_tensor(L.branch, sample));
      continue;
    }
    if (*parent >= state.layers.size() || state.layers[*parent].u.empty()) {
      throw GraphError("layer '" + L.name + "': no state for parent '" + L.parents[s] + "'");
    }
    out.push_back(state.layers[*parent].u);
  }
  return out;
}

Tensor topdown_residual(const Tensor& u_parent, const DictionaryLayer& child, std::size_t slot,
                        const Tensor& a_child) {
  if (slot >= child.kernels.size()) {
    throw GraphError("layer '" + child.name + "' has no parent slot " + std::to_string(slot));
  }
  return subtract(u_parent, conv_transpose(a_child, child.kernels[slot]));
}

NetworkState solve_network(const LayerGraph& graph, const Sample& sample, BranchPresence presence,
                           const IterationObserver& observer) {
  const std::size_t n = graph.size();
  NetworkState st;
  st.active = active_layers(graph, presence);
  if (std::none_of(st.active.begin(), st.active.end(), [](bool b) { return b; })) {
    throw PreconditionError("solve_network: no branch is present");
  }
  int sweeps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& L = graph.layer(i);
    if (st.active[i] && L.reads_external()) {
      const Tensor& x = external_tensor(L.branch, sample);
      if (x.shape() != graph.input_shape(i, 0)) {
        throw GeometryError("layer '" + L.name + "' expects input " + shape_to_string(graph.input_shape(i, 0)) +
                            ", got " + shape_to_string(x.shape()));
      }
    }
    if (st.active[i]) sweeps = std::max(sweeps, L.params.n_iterations);
  }
  st.layers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) st.layers.push_back(LayerState::zeros(graph.code_shape(i)));
  st.energy.assign(n, {});

  const bool feedback = graph.feedback_enabled();
  std::vector<DriveResult> drives(n);
  std::vector<std::vector<std::size_t>> term_slots(n);
  for (int t = 0; t < sweeps; ++t) {
    for (std::size_t i : graph.order()) {
      if (!st.active[i]) continue;
      term_slots[i].clear();
      const auto terms = make_terms(graph, i, st.layers, st.active, sample, &term_slots[i]);
      drives[i] = compute_drive(st.layers[i], terms, graph.layer(i).params.lambda);
      if (t > 0) st.energy[i].push_back(drives[i].energy);
    }

    std::vector<LayerState> next(n);
    for (std::size_t i : graph.order()) {
      const auto& L = graph.layer(i);
      if (!st.active[i]) {
        next[i] = std::move(st.layers[i]);
        continue;
      }
      // A layer with a shorter budget holds its state for the remaining sweeps.
      if (t >= L.params.n_iterations) {
        next[i] = st.layers[i];
        continue;
      }
      const Tensor* fb = nullptr;
      Tensor fb_sum;
      if (feedback) {
        for (const FeedbackEdge& e : graph.children(i)) {
          if (!st.active[e.child]) continue;
          const auto& slots = term_slots[e.child];
          const auto pos = static_cast<std::size_t>(std::find(slots.begin(), slots.end(), e.slot) - slots.begin());
          const Tensor& r = drives[e.child].residuals[pos];
          const double w = graph.layer(e.child).parent_weights[e.slot];
          if (!fb && w == 1.0) {
            fb = &r;
          } else {
            if (fb_sum.empty()) fb_sum = fb ? *fb : Tensor(r.shape());
            axpy(w, r, fb_sum);
            fb = &fb_sum;
          }
        }
      }
      next[i] = integrate(st.layers[i], drives[i].drive, fb, graph.feedback_scale(), L.params, L.name, t);
    }
    st.layers = std::move(next);
    st.iteration = t + 1;
    if (observer) observer(st);
  }

  const auto final_energy = layer_energies(graph, st, sample);
  for (std::size_t i = 0; i < n; ++i) {
    if (st.active[i]) st.energy[i].push_back(final_energy[i]);
  }
  return st;
}

Tensor extract_code(const LayerGraph& graph, const NetworkState& state, const std::string& layer) {
  const std::size_t i = graph.index_of(layer);
  if (i >= state.layers.size()) throw GraphError("no state for layer '" + layer + "'");
  return state.layers[i].a;
}

std::vector<EnergyTerms> layer_energies(const LayerGraph& graph, const NetworkState& state, const Sample& sample) {
  std::vector<EnergyTerms> out(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!state.active[i]) continue;
    const auto terms = make_terms(graph, i, state.layers, state.active, sample);
    out[i] = evaluate_energy(state.layers[i].a, terms, graph.layer(i).params.lambda);
  }
  return out;
}

std::vector<double> zero_code_energies(const LayerGraph& graph, const NetworkState& state, const Sample& sample) {
  std::vector<double> out(graph.size(), 0.0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!state.active[i]) continue;
    for (const DriveTerm& term : make_terms(graph, i, state.layers, state.active, sample)) {
      out[i] += term.weight * 0.5 * squared_l2_norm(*term.target);
    }
  }
  return out;
}

std::vector<double> fixed_point_residuals(const LayerGraph& graph, const NetworkState& state, const Sample& sample) {
  std::vector<double> out(graph.size(), 0.0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!state.active[i]) continue;
    const auto terms = make_terms(graph, i, state.layers, state.active, sample);
    const DriveResult dr = compute_drive(state.layers[i], terms, 0.0);
    out[i] = max_abs(subtract(state.layers[i].u, dr.drive));
  }
  return out;
}

}  // namespace dsc
