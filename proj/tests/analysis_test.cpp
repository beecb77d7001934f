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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dsc/analysis.hpp"
#include "dsc/errors.hpp"
#include "test_util.hpp"

namespace dsc {
namespace {

using testing::tiny_graph;
using testing::tiny_sample;

std::vector<Sample> labelled(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tiny_sample(rng, i % 3 == 0 ? "target" : "other"));
  return out;
}

TEST(AnalysisTest, SparsityAndPooling) {
  Tensor code({2, 1, 3}, std::vector<double>{0, 1, 0, 2, 3, 0});
  EXPECT_DOUBLE_EQ(sparsity_fraction(code), 0.5);
  EXPECT_EQ(sparsity_fraction(Tensor({2, 2, 2})), 0.0);
  auto pooled = pooled_code(code);
  ASSERT_EQ(pooled.size(), 2u);
  EXPECT_DOUBLE_EQ(pooled[0], 1.0 / 3);
  EXPECT_DOUBLE_EQ(pooled[1], 5.0 / 3);
}

TEST(AnalysisTest, ClassAverageOfIdenticalInputsIsThatInputsCode) {
  LayerGraph g = tiny_graph(1);
  std::mt19937_64 rng(2);
  Sample s = tiny_sample(rng);
  auto avg = class_average_activation(g, {s, s, s}, "P1");
  auto one = pooled_code(extract_code(g, solve_network(g, s), "P1"));
  ASSERT_EQ(avg.size(), one.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_NEAR(avg[i], one[i], 1e-15);
  EXPECT_THROW(class_average_activation(g, {}, "P1"), PreconditionError);
  EXPECT_THROW(class_average_activation(g, {s}, "Q7"), GraphError);
}

TEST(AnalysisTest, ParallelInferenceMatchesSerial) {
  LayerGraph g = tiny_graph(3);
  auto data = labelled(7, 4);
  auto serial = infer_codes(g, data, "P1", {}, 1);
  auto parallel = infer_codes(g, data, "P1", {}, 3);
  EXPECT_EQ(serial, parallel);
}

TEST(AnalysisTest, SelectivityRatio) {
  EXPECT_DOUBLE_EQ(selectivity_ratio(2.0, 1.0), 2.0);
  EXPECT_EQ(selectivity_ratio(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(selectivity_ratio(1.0, 0.0), 1.0 / kRatioEpsilon);
}

TEST(AnalysisTest, InvariantNeuronsFollowTheirProfiles) {
  LayerGraph g = tiny_graph(5);
  auto data = labelled(9, 6);
  auto profiles = activation_profiles(g, data, "target");
  ASSERT_EQ(profiles.size(), 6u);
  for (double threshold : {1.0, 1.5, 2.0}) {
    std::vector<std::size_t> expected;
    for (const auto& p : profiles) {
      if (p.image_target > 0 && p.text_target > 0 && p.image_ratio >= threshold && p.text_ratio >= threshold) {
        expected.push_back(p.neuron);
      }
    }
    auto found = find_invariant_neurons(g, data, "target", threshold);
    ASSERT_EQ(found.size(), expected.size()) << threshold;
    for (std::size_t i = 0; i < found.size(); ++i) {
      EXPECT_NE(std::find(expected.begin(), expected.end(), found[i].neuron), expected.end());
      if (i) EXPECT_GE(found[i - 1].ratio(), found[i].ratio());
    }
  }
  EXPECT_THROW(find_invariant_neurons(g, data, "nobody", 2.0), PreconditionError);
  std::vector<Sample> only_target(data.begin(), data.begin() + 1);
  EXPECT_THROW(find_invariant_neurons(g, only_target, "target", 2.0), PreconditionError);
}

TEST(AnalysisTest, ProfilesUseSingleModalityPresentations) {
  LayerGraph g = tiny_graph(7);
  auto data = labelled(6, 8);
  auto profiles = activation_profiles(g, data, "target");
  std::vector<Sample> target, other;
  for (const auto& s : data) (s.label == "target" ? target : other).push_back(s);
  auto it = class_average_activation(g, target, "P1", BranchPresence::image_only());
  auto to = class_average_activation(g, other, "P1", BranchPresence::text_only());
  for (std::size_t f = 0; f < profiles.size(); ++f) {
    EXPECT_EQ(profiles[f].image_target, it[f]);
    EXPECT_EQ(profiles[f].text_other, to[f]);
  }
}

TEST(AnalysisTest, TriggeredAverageWithEqualWeightsIsTheMean) {
  std::mt19937_64 rng(9);
  std::vector<Sample> data;
  for (int i = 0; i < 5; ++i) data.push_back(tiny_sample(rng));
  auto avg = weighted_input_average(data, std::vector<double>(5, 0.37));
  Tensor mean(testing::kTinyImage);
  for (const auto& s : data) axpy(0.2, s.image, mean);
  for (std::size_t i = 0; i < mean.size(); ++i) EXPECT_NEAR(avg.image[i], mean[i], 1e-6);
  EXPECT_NEAR(avg.total_weight, 5 * 0.37, 1e-12);

  auto silent = weighted_input_average(data, std::vector<double>(5, 0.0));
  EXPECT_EQ(max_abs(silent.image), 0.0);
  EXPECT_EQ(max_abs(silent.text), 0.0);
  EXPECT_EQ(silent.image.shape(), testing::kTinyImage);
}

TEST(AnalysisTest, TriggeredAverageUsesPooledCodes) {
  LayerGraph g = tiny_graph(10);
  auto data = labelled(4, 11);
  auto codes = infer_codes(g, data, "P1");
  std::vector<double> w;
  for (const auto& c : codes) w.push_back(pooled_code(c)[2]);
  auto direct = activity_triggered_average(g, data, "P1", 2);
  auto ref = weighted_input_average(data, w);
  EXPECT_EQ(direct.image, ref.image);
  EXPECT_EQ(direct.text, ref.text);
  EXPECT_THROW(activity_triggered_average(g, data, "P1", 6), PreconditionError);
  EXPECT_THROW(activity_triggered_average(g, {}, "P1", 0), PreconditionError);
}

TEST(AnalysisTest, NearestCentroid) {
  auto t = [](std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  };
  std::map<std::string, std::vector<Tensor>> codes{{"b", {t({0, 0}), t({2, 0})}}, {"a", {t({3, 0}), t({5, 0})}}};
  auto r = nearest_centroid(codes, t({0.5, 0}));
  EXPECT_EQ(r.label, "b");
  EXPECT_DOUBLE_EQ(r.distances.at("a"), 3.5);
  EXPECT_DOUBLE_EQ(r.distances.at("b"), 0.5);
  // Equidistant: the lexicographically first label wins.
  EXPECT_EQ(nearest_centroid(codes, t({2.5, 0})).label, "a");
  // Scaling codes and query together keeps the decision.
  std::map<std::string, std::vector<Tensor>> scaled;
  for (auto& [label, list] : codes)
    for (auto& c : list) scaled[label].push_back(scale(c, 7.0));
  EXPECT_EQ(nearest_centroid(scaled, t({3.5, 0})).label, "b");
  EXPECT_THROW(nearest_centroid({}, t({0, 0})), PreconditionError);
  EXPECT_THROW(nearest_centroid(codes, t({0, 0, 0})), GeometryError);
}

TEST(AnalysisTest, GenerationDecodesDownTheAbsentBranch) {
  LayerGraph g = tiny_graph(12);
  std::mt19937_64 rng(13);
  Sample s = tiny_sample(rng);
  auto gm = generate_missing_modality(g, s, BranchPresence::image_only());
  EXPECT_EQ(gm.generated_branch, Branch::kText);
  const auto& p1 = g.layer("P1");
  const auto& t1 = g.layer("T1");
  Tensor estimate = conv_transpose(gm.state[g.index_of("P1")].a, p1.kernels[1]);
  Tensor expected = conv_transpose(threshold(estimate, t1.params), t1.kernels[0]);
  EXPECT_EQ(gm.generated, expected);
  EXPECT_EQ(gm.generated.shape(), testing::kTinyText);
  EXPECT_EQ(gm.present_reconstruction, reconstruct_external(g, gm.state, Branch::kVision));

  auto back = generate_missing_modality(g, s, BranchPresence::text_only());
  EXPECT_EQ(back.generated_branch, Branch::kVision);
  EXPECT_EQ(back.generated.shape(), testing::kTinyImage);

  auto none = generate_missing_modality(g, s, {});
  EXPECT_EQ(none.generated_branch, Branch::kJoint);
  EXPECT_TRUE(none.generated.empty());
  EXPECT_THROW(generate_missing_modality(g, s, {false, false}), PreconditionError);
}

TEST(AnalysisTest, FeatureCsv) {
  std::vector<Tensor> codes{Tensor({2, 1, 2}, std::vector<double>{0, 0.5, 1e-300, 3}), Tensor({2, 1, 2})};
  std::ostringstream out;
  write_features_csv(out, {"Smith, J", "B"}, codes);
  EXPECT_EQ(out.str(), "label,f0,f1,f2,f3\n\"Smith, J\",0,0.5,1e-300,3\nB,0,0,0,0\n");
  EXPECT_THROW(write_features_csv(out, {"x"}, codes), PreconditionError);
}

TEST(AnalysisTest, ExportFeaturesWritesOneRowPerSample) {
  LayerGraph g = tiny_graph(14);
  auto data = labelled(4, 15);
  const auto path = std::filesystem::temp_directory_path() / "dsc_analysis_export.csv";
  export_features(g, data, "P1", path);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 24) << line;
  }
  EXPECT_EQ(rows, 5u);
  std::filesystem::remove(path);
  EXPECT_THROW(export_features(g, data, "P1", "/nonexistent-dir/x.csv"), IngestionError);
}

TEST(AnalysisTest, EnergyTraceCsv) {
  std::ostringstream out;
  write_energy_trace_csv(out, {{1.5, 0.25}, {1.0, 0.5}});
  EXPECT_EQ(out.str(), "iteration,reconstruction_term,sparsity_term,total\n1,1.5,0.25,1.75\n2,1,0.5,1.5\n");
}

}  // namespace
}  // namespace dsc
