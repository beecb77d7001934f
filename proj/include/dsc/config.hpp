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

// Model configuration files.
//
//   [solver]     iterations, dt_over_tau, feedback, feedback_scale, threshold
//   [training]   epochs, learning_rate, update_every, seed
//   [layer:NAME] branch, parents, features, kernel, stride, lambda,
//                nonnegative, lr_scale, parent_weights, iterations,
//                dt_over_tau
//
// `kernel`, `stride` and `parent_weights` take one comma-separated entry per
// parent; kernel and stride entries are "K" or "HxW". Lines starting with '#'
// or ';' are comments. Layers keep their file order.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsc/graph.hpp"
#include "dsc/learning.hpp"

namespace dsc {

struct KernelSize {
  std::size_t h = 0;
  std::size_t w = 0;
  friend bool operator==(const KernelSize&, const KernelSize&) = default;
};

struct LayerSpec {
  std::string name;
  Branch branch = Branch::kVision;
  std::vector<std::string> parents;
  std::size_t features = 0;
  std::vector<KernelSize> kernels;  // one per parent
  std::vector<Stride> strides;      // one per parent
  double lambda = 0.1;
  bool nonnegative = false;
  double lr_scale = 1.0;
  std::vector<double> parent_weights;  // empty means all 1
  std::optional<int> iterations;       // overrides the solver default
  std::optional<double> dt_over_tau;   // overrides the solver default

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct SolverSpec {
  int iterations = 400;
  double dt_over_tau = 0.05;
  bool feedback = true;
  double feedback_scale = 1.0;
  ThresholdKind threshold = ThresholdKind::kSoft;

  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct ModelConfig {
  SolverSpec solver;
  TrainSchedule training;
  std::vector<LayerSpec> layers;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws ConfigError "<source>:<line>: ..." for syntax errors and
// "<section>.<key>: ..." for bad values, then validates the graph.
ModelConfig parse_config(const std::string& text, const std::string& source = "config");
ModelConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_string(c)) == c.
std::string to_string(const ModelConfig& config);

// Builds the graph with unit-norm Gaussian kernels drawn in layer/slot order
// from `seed`. Throws ConfigError naming the offending layer.
LayerGraph build_graph(const ModelConfig& config, std::uint64_t seed);

// Structural checks only (build_graph with a fixed seed).
void validate_config(const ModelConfig& config);

}  // namespace dsc
