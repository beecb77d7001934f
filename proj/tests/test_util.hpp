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

#include <cstdint>
#include <random>
#include <vector>

#include "dsc/graph.hpp"
#include "dsc/sample.hpp"
#include "dsc/tensor.hpp"

namespace dsc::testing {

inline Tensor gaussian(const Shape& shape, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  Tensor t(shape);
  for (double& v : t.values()) v = n(rng);
  return t;
}

inline Tensor uniform(const Shape& shape, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Vision [1, 8, 8] -> H1 [4, 4, 4]; text [1, 4, 8] -> T1 [3, 2, 4];
// P1 reconstructs both into a [6, 2, 2] code.
inline const Shape kTinyImage{1, 8, 8};
inline const Shape kTinyText{1, 4, 8};

inline LayerGraph tiny_graph(std::uint64_t seed, bool feedback = true, double feedback_scale = 1.0,
                             int iterations = 60) {
  std::mt19937_64 rng(seed);
  LcaParams p;
  p.lambda = 0.05;
  p.dt_over_tau = 0.1;
  p.n_iterations = iterations;

  DictionaryLayer h1{"H1", Branch::kVision, {kExternal}, {KernelStack::random(4, 1, 4, 4, {2, 2}, rng)}, {1.0}, p};
  DictionaryLayer t1{"T1", Branch::kText, {kExternal}, {KernelStack::random(3, 1, 2, 2, {2, 2}, rng)}, {1.0}, p};
  DictionaryLayer p1{"P1",
                     Branch::kJoint,
                     {"H1", "T1"},
                     {KernelStack::random(6, 4, 2, 2, {2, 2}, rng), KernelStack::random(6, 3, 1, 2, {1, 2}, rng)},
                     {1.0, 1.0},
                     p};
  return LayerGraph({h1, t1, p1}, {{Branch::kVision, kTinyImage}, {Branch::kText, kTinyText}}, feedback,
                    feedback_scale);
}

inline Sample tiny_sample(std::mt19937_64& rng, std::string label = "x") {
  return {uniform(kTinyImage, rng), uniform(kTinyText, rng), std::move(label)};
}

}  // namespace dsc::testing
