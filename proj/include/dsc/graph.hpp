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

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsc/conv.hpp"
#include "dsc/lca.hpp"
#include "dsc/sample.hpp"

namespace dsc {

inline constexpr const char* kExternal = "external";

// One sparse-coding layer. A layer reconstructs each of its parents'
// membranes (or the raw input, for parent "external") through its own kernel
// stack; all stacks share the layer's single code map. Only the joint layer
// has more than one parent.
struct DictionaryLayer {
  std::string name;
  Branch branch = Branch::kVision;
  std::vector<std::string> parents;
  std::vector<KernelStack> kernels;     // one per parent
  std::vector<double> parent_weights;   // one per parent, default 1
  LcaParams params;
  double learning_rate_scale = 1.0;

  bool reads_external() const { return parents.size() == 1 && parents[0] == kExternal; }

  friend bool operator==(const DictionaryLayer&, const DictionaryLayer&) = default;
};

// Top-down link: `child` reconstructs its parent through kernels[slot].
struct FeedbackEdge {
  std::size_t child;
  std::size_t slot;
};

// Validated DAG of layers. Construction throws GraphError (naming the
// offending layer) unless:
//   - names are unique and every parent exists;
//   - exactly one layer is the joint layer, it has >= 2 parents, and every
//     other layer has exactly one parent of its own branch (or "external");
//   - every non-joint layer feeds some child, so every path ends at the joint;
//   - kernel geometry chains: each stack accepts its parent's code shape and
//     all of a layer's stacks produce the same code shape.
// A graph of a single external layer is accepted as the degenerate case.
class LayerGraph {
 public:
  LayerGraph() = default;
  LayerGraph(std::vector<DictionaryLayer> layers, std::map<Branch, Shape> external_shapes,
             bool feedback_enabled = true, double feedback_scale = 1.0);

  const std::vector<DictionaryLayer>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  const DictionaryLayer& layer(std::size_t i) const { return layers_.at(i); }
  const DictionaryLayer& layer(const std::string& name) const { return layers_[index_of(name)]; }
  // Kernel access for learning. Shapes must not change.
  KernelStack& kernels(std::size_t layer, std::size_t slot) { return layers_.at(layer).kernels.at(slot); }

  std::size_t index_of(const std::string& name) const;
  // Index of the parent layer feeding `slot` of `layer`, or nullopt for an
  // external input.
  std::optional<std::size_t> parent_index(std::size_t layer, std::size_t slot) const {
    return parent_index_.at(layer).at(slot);
  }
  const std::vector<FeedbackEdge>& children(std::size_t layer) const { return children_.at(layer); }
  // Layers in dependency order (parents first).
  const std::vector<std::size_t>& order() const { return order_; }
  std::optional<std::size_t> joint_index() const { return joint_; }

  const Shape& code_shape(std::size_t layer) const { return code_shapes_.at(layer); }
  const Shape& input_shape(std::size_t layer, std::size_t slot) const { return input_shapes_.at(layer).at(slot); }
  const Shape& external_shape(Branch b) const;
  const std::map<Branch, Shape>& external_shapes() const { return external_shapes_; }

  bool feedback_enabled() const { return feedback_enabled_; }
  double feedback_scale() const { return feedback_scale_; }
  void set_feedback_enabled(bool on) { feedback_enabled_ = on; }
  void set_feedback_scale(double s) { feedback_scale_ = s; }

 private:
  void validate();

  std::vector<DictionaryLayer> layers_;
  std::map<Branch, Shape> external_shapes_;
  bool feedback_enabled_ = true;
  double feedback_scale_ = 1.0;

  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::optional<std::size_t>>> parent_index_;
  std::vector<std::vector<FeedbackEdge>> children_;
  std::vector<std::size_t> order_;
  std::optional<std::size_t> joint_;
  std::vector<Shape> code_shapes_;
  std::vector<std::vector<Shape>> input_shapes_;
};

}  // namespace dsc
