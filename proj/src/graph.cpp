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

#include "dsc/graph.hpp"

#include <functional>

#include "dsc/errors.hpp"

namespace dsc {

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::kVision:
      return "vision";
    case Branch::kText:
      return "text";
    case Branch::kJoint:
      return "joint";
  }
  return "?";
}

Branch parse_branch(const std::string& name) {
  if (name == "vision") return Branch::kVision;
  if (name == "text") return Branch::kText;
  if (name == "joint") return Branch::kJoint;
  throw ConfigError("unknown branch '" + name + "' (expected vision, text or joint)");
}

LayerGraph::LayerGraph(std::vector<DictionaryLayer> layers, std::map<Branch, Shape> external_shapes,
                       bool feedback_enabled, double feedback_scale)
    : layers_(std::move(layers)),
      external_shapes_(std::move(external_shapes)),
      feedback_enabled_(feedback_enabled),
      feedback_scale_(feedback_scale) {
  validate();
}

std::size_t LayerGraph::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw GraphError("unknown layer '" + name + "'");
  return it->second;
}

const Shape& LayerGraph::external_shape(Branch b) const {
  auto it = external_shapes_.find(b);
  if (it == external_shapes_.end()) {
    throw GraphError(std::string("no external input shape for branch ") + branch_name(b));
  }
  return it->second;
}

void LayerGraph::validate() {
  if (layers_.empty()) throw GraphError("layer graph is empty");
  const std::size_t n = layers_.size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& L = layers_[i];
    if (L.name.empty() || L.name == kExternal) throw GraphError("invalid layer name '" + L.name + "'");
    if (!index_.emplace(L.name, i).second) throw GraphError("duplicate layer name '" + L.name + "'");
  }

  parent_index_.assign(n, {});
  children_.assign(n, {});
  std::size_t joint_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& L = layers_[i];
    const std::string where = "layer '" + L.name + "': ";
    if (L.parents.empty()) throw GraphError(where + "has no parent inputs");
    if (L.kernels.size() != L.parents.size()) {
      throw GraphError(where + "needs one kernel stack per parent input");
    }
    if (L.parent_weights.empty()) L.parent_weights.assign(L.parents.size(), 1.0);
    if (L.parent_weights.size() != L.parents.size()) {
      throw GraphError(where + "needs one weight per parent input");
    }
    for (double w : L.parent_weights) {
      if (!(w > 0.0)) throw GraphError(where + "parent weights must be positive");
    }
    try {
      L.params.validate();
    } catch (const PreconditionError& e) {
      throw GraphError(where + e.what());
    }

    if (L.branch == Branch::kJoint) {
      ++joint_count;
      joint_ = i;
      if (L.parents.size() < 2) throw GraphError(where + "joint layer needs at least two parent inputs");
    } else if (L.parents.size() != 1) {
      throw GraphError(where + "only the joint layer may have more than one parent");
    }

    for (std::size_t s = 0; s < L.parents.size(); ++s) {
      const std::string& p = L.parents[s];
      if (p == kExternal) {
        if (L.branch == Branch::kJoint) throw GraphError(where + "joint layer cannot read external input");
        parent_index_[i].push_back(std::nullopt);
        continue;
      }
      auto it = index_.find(p);
      if (it == index_.end()) throw GraphError(where + "unknown parent '" + p + "'");
      const auto& P = layers_[it->second];
      if (P.branch == Branch::kJoint) throw GraphError(where + "joint layer cannot be a parent");
      if (L.branch != Branch::kJoint && P.branch != L.branch) {
        throw GraphError(where + "parent '" + p + "' belongs to another branch");
      }
      parent_index_[i].push_back(it->second);
      children_[it->second].push_back({i, s});
    }
    if (L.branch == Branch::kJoint) {
      for (std::size_t a = 0; a < L.parents.size(); ++a) {
        for (std::size_t b = a + 1; b < L.parents.size(); ++b) {
          if (L.parents[a] == L.parents[b]) throw GraphError(where + "duplicate parent '" + L.parents[a] + "'");
        }
      }
    }
  }

  if (n > 1) {
    if (joint_count != 1) {
      throw GraphError("graph must have exactly one joint layer, found " + std::to_string(joint_count));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (layers_[i].branch != Branch::kJoint && children_[i].empty()) {
        throw GraphError("layer '" + layers_[i].name + "' does not feed the joint layer");
      }
    }
  } else if (joint_count != 0) {
    throw GraphError("layer '" + layers_[0].name + "': a single-layer graph cannot be a joint layer");
  }

  // Depth-first topological sort; a gray node revisited means a cycle.
  std::vector<int> mark(n, 0);
  order_.clear();
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (mark[i] == 2) return;
    if (mark[i] == 1) throw GraphError("cycle through layer '" + layers_[i].name + "'");
    mark[i] = 1;
    for (const auto& p : parent_index_[i]) {
      if (p) visit(*p);
    }
    mark[i] = 2;
    order_.push_back(i);
  };
  for (std::size_t i = 0; i < n; ++i) visit(i);

  code_shapes_.assign(n, {});
  input_shapes_.assign(n, {});
  for (std::size_t i : order_) {
    const auto& L = layers_[i];
    for (std::size_t s = 0; s < L.parents.size(); ++s) {
      const auto& p = parent_index_[i][s];
      Shape in;
      if (p) {
        in = code_shapes_[*p];
      } else {
        auto it = external_shapes_.find(L.branch);
        if (it == external_shapes_.end()) {
          throw GraphError("layer '" + L.name + "': no external input shape for branch " + branch_name(L.branch));
        }
        in = it->second;
      }
      Shape code;
      try {
        code = L.kernels[s].code_shape(in);
      } catch (const GeometryError& e) {
        throw GraphError("layer '" + L.name + "': " + e.what());
      }
      if (s == 0) {
        code_shapes_[i] = code;
      } else if (code != code_shapes_[i]) {
        throw GraphError("layer '" + L.name + "': kernel stacks produce different code shapes " +
                         shape_to_string(code_shapes_[i]) + " and " + shape_to_string(code));
      }
      input_shapes_[i].push_back(std::move(in));
    }
  }
}

}  // namespace dsc
