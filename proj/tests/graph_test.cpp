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

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "dsc/errors.hpp"
#include "dsc/graph.hpp"
#include "test_util.hpp"

namespace dsc {
namespace {

using testing::kTinyImage;
using testing::kTinyText;

std::map<Branch, Shape> tiny_shapes() { return {{Branch::kVision, kTinyImage}, {Branch::kText, kTinyText}}; }

void expect_graph_error(const std::vector<DictionaryLayer>& layers, const std::string& needle) {
  try {
    LayerGraph g(layers, tiny_shapes());
    FAIL() << "expected GraphError mentioning " << needle;
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(GraphTest, TinyGraphStructure) {
  LayerGraph g = testing::tiny_graph(1);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.joint_index(), g.index_of("P1"));
  EXPECT_EQ(g.code_shape(g.index_of("H1")), (Shape{4, 4, 4}));
  EXPECT_EQ(g.code_shape(g.index_of("T1")), (Shape{3, 2, 4}));
  EXPECT_EQ(g.code_shape(g.index_of("P1")), (Shape{6, 2, 2}));
  EXPECT_EQ(g.parent_index(g.index_of("P1"), 1), g.index_of("T1"));
  EXPECT_FALSE(g.parent_index(g.index_of("H1"), 0).has_value());
  ASSERT_EQ(g.children(g.index_of("T1")).size(), 1u);
  EXPECT_EQ(g.children(g.index_of("T1"))[0].slot, 1u);
  EXPECT_TRUE(g.children(g.index_of("P1")).empty());
  EXPECT_EQ(g.order().back(), g.index_of("P1"));
  EXPECT_THROW(g.index_of("V9"), GraphError);
}

class GraphValidationTest : public ::testing::Test {
 protected:
  void SetUp() override { layers_ = testing::tiny_graph(2).layers(); }
  DictionaryLayer& layer(const std::string& name) {
    for (auto& L : layers_)
      if (L.name == name) return L;
    throw std::logic_error(name);
  }
  std::vector<DictionaryLayer> layers_;
};

TEST_F(GraphValidationTest, DuplicateName) {
  layer("T1").name = "H1";
  expect_graph_error(layers_, "duplicate layer name 'H1'");
}

TEST_F(GraphValidationTest, UnknownParent) {
  layer("P1").parents[1] = "T9";
  expect_graph_error(layers_, "unknown parent 'T9'");
}

TEST_F(GraphValidationTest, TwoJointLayers) {
  layer("H1").branch = Branch::kJoint;
  expect_graph_error(layers_, "H1");
}

TEST_F(GraphValidationTest, CrossBranchParent) {
  layers_.push_back(layer("T1"));
  layers_.back().name = "T2";
  layers_.back().parents = {"H1"};
  expect_graph_error(layers_, "T2");
}

TEST_F(GraphValidationTest, DanglingLayer) {
  layers_.push_back(layer("H1"));
  layers_.back().name = "H9";
  expect_graph_error(layers_, "layer 'H9' does not feed the joint layer");
}

TEST_F(GraphValidationTest, GeometryMismatch) {
  std::mt19937_64 rng(3);
  layer("P1").kernels[1] = KernelStack::random(6, 3, 2, 2, {2, 2}, rng);
  expect_graph_error(layers_, "P1");
}

TEST_F(GraphValidationTest, WeightCountAndSign) {
  layer("P1").parent_weights = {1.0};
  expect_graph_error(layers_, "one weight per parent");
  layer("P1").parent_weights = {1.0, 0.0};
  expect_graph_error(layers_, "positive");
}

TEST_F(GraphValidationTest, CycleIsRejected) {
  std::mt19937_64 rng(4);
  DictionaryLayer h2 = layer("H1");
  h2.name = "H2";
  h2.parents = {"H3"};
  h2.kernels = {KernelStack::random(4, 4, 1, 1, {1, 1}, rng)};
  DictionaryLayer h3 = h2;
  h3.name = "H3";
  h3.parents = {"H2"};
  layers_.push_back(h2);
  layers_.push_back(h3);
  layer("P1").parents[0] = "H2";
  EXPECT_THROW(LayerGraph(layers_, tiny_shapes()), GraphError);
}

TEST(GraphTest, SingleExternalLayerIsAccepted) {
  LayerGraph g({testing::tiny_graph(5).layer("H1")}, {{Branch::kVision, kTinyImage}});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_FALSE(g.joint_index().has_value());
}

TEST(GraphTest, MissingExternalShape) {
  auto layers = testing::tiny_graph(6).layers();
  EXPECT_THROW(LayerGraph(layers, {{Branch::kVision, kTinyImage}}), GraphError);
}

}  // namespace
}  // namespace dsc
