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

#include "dsc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "dsc/errors.hpp"
#include "dsc/parallel.hpp"

namespace dsc {
namespace {

std::size_t external_layer(const LayerGraph& graph, Branch branch) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& l = graph.layer(i);
    if (l.reads_external() && l.branch == branch) return i;
  }
  throw PreconditionError(std::string("no layer reads the ") + branch_name(branch) + " input");
}

std::vector<std::vector<double>> pooled_codes(const LayerGraph& graph, const std::vector<Sample>& samples,
                                              const std::string& layer, BranchPresence presence, int threads) {
  const auto codes = infer_codes(graph, samples, layer, presence, threads);
  std::vector<std::vector<double>> out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.push_back(pooled_code(c));
  return out;
}

std::vector<double> mean_rows(const std::vector<std::vector<double>>& rows, const std::vector<bool>& take,
                              bool want) {
  std::vector<double> mean(rows.front().size(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (take[i] != want) continue;
    for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += rows[i][f];
    ++n;
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double sparsity_fraction(const Tensor& code) {
  if (code.empty()) return 0.0;
  std::size_t active = 0;
  for (double v : code.values()) active += v != 0.0;
  return static_cast<double>(active) / static_cast<double>(code.size());
}

std::vector<double> pooled_code(const Tensor& code) {
  if (code.rank() != 3) throw GeometryError("pooled_code expects [F, H, W], got " + shape_to_string(code.shape()));
  const std::size_t positions = code.dim(1) * code.dim(2);
  std::vector<double> out(code.dim(0), 0.0);
  const auto v = code.values();
  for (std::size_t f = 0; f < out.size(); ++f) {
    double s = 0.0;
    for (std::size_t p = 0; p < positions; ++p) s += v[f * positions + p];
    out[f] = s / static_cast<double>(positions);
  }
  return out;
}

std::vector<Tensor> infer_codes(const LayerGraph& graph, const std::vector<Sample>& samples, const std::string& layer,
                                BranchPresence presence, int threads) {
  graph.index_of(layer);
  return parallel_map(samples.size(), threads, [&](std::size_t i) {
    return extract_code(graph, solve_network(graph, samples[i], presence), layer);
  });
}

std::vector<double> class_average_activation(const LayerGraph& graph, const std::vector<Sample>& samples,
                                             const std::string& layer, BranchPresence presence, int threads) {
  if (samples.empty()) throw PreconditionError("class_average_activation needs a nonempty subset");
  const auto rows = pooled_codes(graph, samples, layer, presence, threads);
  return mean_rows(rows, std::vector<bool>(rows.size(), true), true);
}

double selectivity_ratio(double target, double other) { return target / std::max(other, kRatioEpsilon); }

std::vector<ActivationProfile> activation_profiles(const LayerGraph& graph, const std::vector<Sample>& samples,
                                                   const std::string& target_label, int threads) {
  const auto joint = graph.joint_index();
  if (!joint) throw PreconditionError("the graph has no joint layer");
  std::vector<bool> is_target;
  for (const auto& s : samples) is_target.push_back(s.label == target_label);
  const auto n_target = std::count(is_target.begin(), is_target.end(), true);
  if (n_target == 0 || n_target == static_cast<long>(samples.size())) {
    throw PreconditionError("invariance needs both '" + target_label + "' and other items");
  }
  const std::string& name = graph.layer(*joint).name;
  const auto image = pooled_codes(graph, samples, name, BranchPresence::image_only(), threads);
  const auto text = pooled_codes(graph, samples, name, BranchPresence::text_only(), threads);
  const auto it = mean_rows(image, is_target, true);
  const auto io = mean_rows(image, is_target, false);
  const auto tt = mean_rows(text, is_target, true);
  const auto to = mean_rows(text, is_target, false);

  std::vector<ActivationProfile> out(it.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = {f, it[f], io[f], tt[f], to[f], selectivity_ratio(it[f], io[f]), selectivity_ratio(tt[f], to[f])};
  }
  return out;
}

std::vector<ActivationProfile> find_invariant_neurons(const LayerGraph& graph, const std::vector<Sample>& samples,
                                                      const std::string& target_label, double ratio_threshold,
                                                      int threads) {
  std::vector<ActivationProfile> out;
  for (const auto& p : activation_profiles(graph, samples, target_label, threads)) {
    if (p.image_target > 0 && p.text_target > 0 && p.image_ratio >= ratio_threshold &&
        p.text_ratio >= ratio_threshold) {
      out.push_back(p);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ratio() > b.ratio(); });
  return out;
}

TriggeredAverage weighted_input_average(const std::vector<Sample>& samples, const std::vector<double>& weights) {
  if (samples.empty()) throw PreconditionError("activity-triggered average needs a nonempty corpus");
  if (weights.size() != samples.size()) throw PreconditionError("one weight per sample is required");
  TriggeredAverage out{Tensor(samples.front().image.shape()), Tensor(samples.front().text.shape()), 0.0};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] == 0.0) continue;
    axpy(weights[i], samples[i].image, out.image);
    axpy(weights[i], samples[i].text, out.text);
    out.total_weight += weights[i];
  }
  if (out.total_weight != 0.0) {
    out.image = scale(out.image, 1.0 / out.total_weight);
    out.text = scale(out.text, 1.0 / out.total_weight);
  }
  return out;
}

TriggeredAverage activity_triggered_average(const LayerGraph& graph, const std::vector<Sample>& samples,
                                            const std::string& layer, std::size_t neuron, int threads) {
  if (samples.empty()) throw PreconditionError("activity-triggered average needs a nonempty corpus");
  const std::size_t features = graph.code_shape(graph.index_of(layer)).at(0);
  if (neuron >= features) {
    throw PreconditionError("neuron " + std::to_string(neuron) + " out of range for layer '" + layer + "' with " +
                            std::to_string(features) + " features");
  }
  const auto rows = pooled_codes(graph, samples, layer, {}, threads);
  std::vector<double> weights;
  for (const auto& r : rows) weights.push_back(r[neuron]);
  return weighted_input_average(samples, weights);
}

std::map<std::string, Tensor> class_centroids(const std::map<std::string, std::vector<Tensor>>& codes) {
  std::map<std::string, Tensor> out;
  for (const auto& [label, list] : codes) {
    if (list.empty()) continue;
    Tensor sum(list.front().shape());
    for (const auto& c : list) {
      require_same_shape(sum, c, "class_centroids");
      axpy(1.0, c, sum);
    }
    out.emplace(label, scale(sum, 1.0 / static_cast<double>(list.size())));
  }
  if (out.empty()) throw PreconditionError("nearest centroid needs at least one training code");
  return out;
}

CentroidResult classify_nearest(const std::map<std::string, Tensor>& centroids, const Tensor& query) {
  if (centroids.empty()) throw PreconditionError("nearest centroid needs at least one class");
  CentroidResult out;
  double best = 0.0;
  for (const auto& [label, c] : centroids) {
    if (c.size() != query.size()) {
      throw GeometryError("query " + shape_to_string(query.shape()) + " does not match centroid " +
                          shape_to_string(c.shape()));
    }
    double d2 = 0.0;
    const auto cv = c.values();
    const auto qv = query.values();
    for (std::size_t i = 0; i < cv.size(); ++i) d2 += (cv[i] - qv[i]) * (cv[i] - qv[i]);
    const double d = std::sqrt(d2);
    out.distances[label] = d;
    // Map order is lexicographic, so strict < keeps the first label on ties.
    if (out.label.empty() || d < best) {
      out.label = label;
      best = d;
    }
  }
  return out;
}

CentroidResult nearest_centroid(const std::map<std::string, std::vector<Tensor>>& codes, const Tensor& query) {
  return classify_nearest(class_centroids(codes), query);
}

Tensor reconstruct_external(const LayerGraph& graph, const NetworkState& state, Branch branch) {
  const std::size_t e = external_layer(graph, branch);
  return conv_transpose(state[e].a, graph.layer(e).kernels[0]);
}

GeneratedModality generate_missing_modality(const LayerGraph& graph, const Sample& sample,
                                            BranchPresence presence) {
  if (!presence.vision && !presence.text) throw PreconditionError("generation needs one present modality");
  GeneratedModality out;
  out.state = solve_network(graph, sample, presence);
  const Branch present = presence.vision ? Branch::kVision : Branch::kText;
  out.present_reconstruction = reconstruct_external(graph, out.state, present);
  if (presence.vision && presence.text) {
    out.generated_branch = Branch::kJoint;
    return out;
  }
  const Branch absent = presence.vision ? Branch::kText : Branch::kVision;
  out.generated_branch = absent;

  const auto joint = graph.joint_index();
  if (!joint) throw PreconditionError("generation needs a joint layer");
  std::size_t layer = *joint;
  std::size_t slot = graph.layer(layer).parents.size();
  for (std::size_t s = 0; s < graph.layer(layer).parents.size(); ++s) {
    const auto p = graph.parent_index(layer, s);
    if (p && graph.layer(*p).branch == absent) slot = s;
  }
  if (slot == graph.layer(layer).parents.size()) {
    throw PreconditionError(std::string("joint layer has no ") + branch_name(absent) + " parent");
  }
  Tensor code = out.state[layer].a;
  while (true) {
    Tensor estimate = conv_transpose(code, graph.layer(layer).kernels[slot]);
    const auto parent = graph.parent_index(layer, slot);
    if (!parent) {
      out.generated = std::move(estimate);
      return out;
    }
    layer = *parent;
    slot = 0;
    code = threshold(estimate, graph.layer(layer).params);
  }
}

void write_features_csv(std::ostream& out, const std::vector<std::string>& labels, const std::vector<Tensor>& codes) {
  if (labels.size() != codes.size()) throw PreconditionError("one label per code is required");
  if (codes.empty()) throw PreconditionError("feature export needs a nonempty corpus");
  const std::size_t width = codes.front().size();
  out << "label";
  for (std::size_t f = 0; f < width; ++f) out << ",f" << f;
  out << '\n';
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].size() != width) throw GeometryError("feature rows differ in width");
    if (labels[i].find_first_of(",\"\n") != std::string::npos) {
      out << '"';
      for (char c : labels[i]) out << (c == '"' ? std::string("\"\"") : std::string(1, c));
      out << '"';
    } else {
      out << labels[i];
    }
    for (double v : codes[i].values()) out << ',' << format_double(v);
    out << '\n';
  }
}

void export_features(const LayerGraph& graph, const std::vector<Sample>& samples, const std::string& layer,
                     const std::filesystem::path& path, BranchPresence presence, int threads) {
  if (samples.empty()) throw PreconditionError("feature export needs a nonempty corpus");
  const auto codes = infer_codes(graph, samples, layer, presence, threads);
  std::vector<std::string> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write features to '" + path.string() + "'");
  write_features_csv(out, labels, codes);
  if (!out.flush()) throw IngestionError("short write to '" + path.string() + "'");
}

void write_energy_trace_csv(std::ostream& out, const std::vector<EnergyTerms>& trace) {
  out << "iteration,reconstruction_term,sparsity_term,total\n";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << t + 1 << ',' << format_double(trace[t].reconstruction) << ',' << format_double(trace[t].sparsity) << ','
        << format_double(trace[t].total()) << '\n';
  }
}

}  // namespace dsc
