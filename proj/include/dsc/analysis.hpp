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

// Read-only measurements over a frozen network. "Activation" always means
// the thresholded code a, mean-pooled over spatial positions per feature.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dsc/graph.hpp"
#include "dsc/network.hpp"
#include "dsc/sample.hpp"

namespace dsc {

// Fraction of nonzero entries.
double sparsity_fraction(const Tensor& code);

// Per-feature mean over positions of a [F, H, W] code.
std::vector<double> pooled_code(const Tensor& code);

// Codes of `layer` for every sample, in sample order.
std::vector<Tensor> infer_codes(const LayerGraph& graph, const std::vector<Sample>& samples, const std::string& layer,
                                BranchPresence presence = {}, int threads = 1);

// Per-feature mean pooled activation over `samples`. Throws
// PreconditionError for an empty subset.
std::vector<double> class_average_activation(const LayerGraph& graph, const std::vector<Sample>& samples,
                                             const std::string& layer, BranchPresence presence = {},
                                             int threads = 1);

inline constexpr double kRatioEpsilon = 1e-9;

struct ActivationProfile {
  std::size_t neuron = 0;
  double image_target = 0;  // mean on target items, image only
  double image_other = 0;
  double text_target = 0;  // mean on target items, text only
  double text_other = 0;
  double image_ratio = 0;
  double text_ratio = 0;

  double ratio() const { return image_ratio < text_ratio ? image_ratio : text_ratio; }
};

double selectivity_ratio(double target, double other);

// Joint-layer profiles for every neuron, measured with the text branch absent
// and then with the image branch absent.
std::vector<ActivationProfile> activation_profiles(const LayerGraph& graph, const std::vector<Sample>& samples,
                                                   const std::string& target_label, int threads = 1);

// Neurons whose ratio reaches `ratio_threshold` under both presentations and
// whose target means are positive, strongest first (ties by index). Throws
// PreconditionError unless both target and non-target items exist.
std::vector<ActivationProfile> find_invariant_neurons(const LayerGraph& graph, const std::vector<Sample>& samples,
                                                      const std::string& target_label, double ratio_threshold,
                                                      int threads = 1);

struct TriggeredAverage {
  Tensor image;
  Tensor text;
  double total_weight = 0;
};

// Activation-weighted mean of the inputs; zero tensors when the neuron never
// fires. Throws PreconditionError for an empty corpus or bad neuron index.
TriggeredAverage activity_triggered_average(const LayerGraph& graph, const std::vector<Sample>& samples,
                                            const std::string& layer, std::size_t neuron, int threads = 1);

// Same reduction over precomputed pooled weights (one per sample).
TriggeredAverage weighted_input_average(const std::vector<Sample>& samples, const std::vector<double>& weights);

struct CentroidResult {
  std::string label;
  std::map<std::string, double> distances;
};

// Per-class mean of flattened codes. Throws PreconditionError if no class has
// any code or shapes differ.
std::map<std::string, Tensor> class_centroids(const std::map<std::string, std::vector<Tensor>>& codes);
CentroidResult classify_nearest(const std::map<std::string, Tensor>& centroids, const Tensor& query);
// Euclidean nearest centroid; ties go to the lexicographically first label.
CentroidResult nearest_centroid(const std::map<std::string, std::vector<Tensor>>& codes, const Tensor& query);

struct GeneratedModality {
  Branch generated_branch;
  Tensor generated;  // decoded absent external signal
  Tensor present_reconstruction;  // vision if present, else text
  NetworkState state;
};

// Infers with the absent branch removed, then decodes down the absent branch:
// each layer's membrane estimate is its child's reconstruction and its code
// is the threshold of that estimate. With both branches present nothing is
// decoded: `generated` is empty and `generated_branch` is kJoint. Throws
// PreconditionError when both are absent.
GeneratedModality generate_missing_modality(const LayerGraph& graph, const Sample& sample, BranchPresence presence);

// Reconstruction of the external signal of `branch` from `state`.
Tensor reconstruct_external(const LayerGraph& graph, const NetworkState& state, Branch branch);

// CSV "label,f0,f1,..." with one row of flattened code per sample.
void write_features_csv(std::ostream& out, const std::vector<std::string>& labels, const std::vector<Tensor>& codes);
// Throws IngestionError naming the path on I/O failure.
void export_features(const LayerGraph& graph, const std::vector<Sample>& samples, const std::string& layer,
                     const std::filesystem::path& path, BranchPresence presence = {}, int threads = 1);

// CSV "iteration,reconstruction_term,sparsity_term,total" for one layer.
void write_energy_trace_csv(std::ostream& out, const std::vector<EnergyTerms>& trace);

}  // namespace dsc
