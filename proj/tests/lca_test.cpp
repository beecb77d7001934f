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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dsc/errors.hpp"
#include "dsc/lca.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace dsc {
namespace {

using testing::gaussian;

// A fully connected stack over an [n, 1, 1] input is a dense n x atoms
// dictionary.
KernelStack dense_stack(const testing::DenseDictionary& d) {
  return KernelStack(Tensor({d.atoms, d.rows, 1, 1}, d.columns), {1, 1});
}

testing::DenseDictionary random_dense(std::size_t rows, std::size_t atoms, std::mt19937_64& rng) {
  testing::DenseDictionary d{rows, atoms, {}};
  std::normal_distribution<double> n;
  d.columns.resize(rows * atoms);
  for (std::size_t j = 0; j < atoms; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += std::pow(d.columns[j * rows + i] = n(rng), 2);
    for (std::size_t i = 0; i < rows; ++i) d.columns[j * rows + i] /= std::sqrt(s);
  }
  return d;
}

TEST(ThresholdTest, SoftHardAndNonnegative) {
  EXPECT_EQ(threshold_value(0.3, 0.1, false), 0.3 - 0.1);
  EXPECT_EQ(threshold_value(-0.3, 0.1, false), -0.3 + 0.1);
  EXPECT_EQ(threshold_value(0.05, 0.1, false), 0.0);
  EXPECT_EQ(threshold_value(-0.3, 0.1, true), 0.0);
  EXPECT_EQ(threshold_value(0.3, 0.1, false, ThresholdKind::kHard), 0.3);
  EXPECT_EQ(threshold_value(-0.3, 0.1, false, ThresholdKind::kHard), -0.3);
  EXPECT_EQ(threshold_value(-0.3, 0.1, true, ThresholdKind::kHard), 0.0);
  EXPECT_EQ(threshold_value(0.1, 0.1, false), 0.0);
  EXPECT_THROW(threshold(Tensor({2}), -1.0, false), PreconditionError);
}

TEST(ThresholdTest, SoftIsMonotoneAndOneLipschitz) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (bool nonneg : {false, true}) {
    for (int i = 0; i < 10000; ++i) {
      double x = u(rng), y = u(rng), lambda = std::abs(u(rng));
      double tx = threshold_value(x, lambda, nonneg), ty = threshold_value(y, lambda, nonneg);
      EXPECT_LE(std::abs(tx - ty), std::abs(x - y) + 1e-15);
      if (x <= y) EXPECT_LE(tx, ty);
    }
  }
}

TEST(LcaTest, EnergyMatchesDenseOracle) {
  std::mt19937_64 rng(7);
  auto d = random_dense(6, 9, rng);
  KernelStack k = dense_stack(d);
  Tensor x = gaussian({6, 1, 1}, rng);
  Tensor a = gaussian({9, 1, 1}, rng);
  std::vector<double> xs(x.values().begin(), x.values().end()), as(a.values().begin(), a.values().end());
  EXPECT_NEAR(energy(x, k, a, 0.3), testing::lasso_objective(d, xs, as, 0.3), 1e-12);
  EnergyTerms e = energy_terms(x, k, Tensor({9, 1, 1}), 0.3);
  EXPECT_NEAR(e.reconstruction, 0.5 * squared_l2_norm(x), 1e-12);
  EXPECT_EQ(e.sparsity, 0.0);
}

TEST(LcaTest, FirstFullStepFromRestIsAnalysis) {
  std::mt19937_64 rng(8);
  KernelStack k = KernelStack::random(3, 2, 3, 3, {1, 1}, rng);
  Tensor x = gaussian({2, 5, 5}, rng);
  LcaParams p;
  p.dt_over_tau = 1.0;
  LayerState s = lca_step(LayerState::zeros(k.code_shape(x.shape())), x, k, nullptr, p);
  EXPECT_EQ(s.u, conv_forward(x, k));
  EXPECT_EQ(s.a, threshold(s.u, p));
}

TEST(LcaTest, EquilibriumIsAFixedPoint) {
  std::mt19937_64 rng(10);
  KernelStack k = KernelStack::random(3, 1, 4, 4, {2, 2}, rng);
  Tensor x = gaussian({1, 8, 8}, rng);
  LcaParams p;
  LayerState s{Tensor(k.code_shape(x.shape())), gaussian(k.code_shape(x.shape()), rng)};
  const DriveTerm term{&x, &k, 1.0};
  s.u = compute_drive(s, {&term, 1}, p.lambda).drive;
  EXPECT_EQ(fixed_point_residual(s, x, k), 0.0);
  EXPECT_EQ(lca_step(s, x, k, nullptr, p).u, s.u);
}

TEST(LcaTest, OrthonormalBasisConvergesToThresholdedAnalysis) {
  std::mt19937_64 rng(12);
  // Gram-Schmidt on random vectors gives an orthonormal 4 x 4 basis.
  testing::DenseDictionary d = random_dense(4, 4, rng);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t q = 0; q < j; ++q) {
      double p = 0;
      for (std::size_t i = 0; i < 4; ++i) p += d.columns[j * 4 + i] * d.columns[q * 4 + i];
      for (std::size_t i = 0; i < 4; ++i) d.columns[j * 4 + i] -= p * d.columns[q * 4 + i];
    }
    double n = 0;
    for (std::size_t i = 0; i < 4; ++i) n += d.columns[j * 4 + i] * d.columns[j * 4 + i];
    for (std::size_t i = 0; i < 4; ++i) d.columns[j * 4 + i] /= std::sqrt(n);
  }
  KernelStack k = dense_stack(d);
  Tensor x({4, 1, 1}, std::vector<double>{0.9, -0.4, 0.05, 0.6});
  LcaParams p;
  p.lambda = 0.2;
  p.n_iterations = 1000;
  SolveResult r = solve_single_layer(x, k, p);
  Tensor expected = threshold(conv_forward(x, k), p);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.state.a[i], expected[i], 1e-9);
  EXPECT_LT(fixed_point_residual(r.state, x, k), 1e-9);
}

TEST(LcaTest, LeakOnlyDecayIsGeometric) {
  std::mt19937_64 rng(13);
  KernelStack k = KernelStack::random(2, 1, 2, 2, {2, 2}, rng);
  Tensor x({1, 4, 4});
  LcaParams p;
  p.lambda = 1.0;
  p.dt_over_tau = 0.1;
  Tensor u0 = testing::uniform({2, 2, 2}, rng, -0.9, 0.9);
  LayerState s{u0, threshold(u0, p)};
  ASSERT_EQ(l1_norm(s.a), 0.0);
  for (int t = 1; t <= 50; ++t) {
    s = lca_step(s, x, k, nullptr, p);
    for (std::size_t i = 0; i < u0.size(); ++i) {
      EXPECT_NEAR(s.u[i], u0[i] * std::pow(1.0 - p.dt_over_tau, t), 1e-15);
    }
  }
}

TEST(LcaTest, ZeroInputStaysAtRest) {
  std::mt19937_64 rng(14);
  KernelStack k = KernelStack::random(3, 1, 3, 3, {1, 1}, rng);
  LcaParams p;
  p.n_iterations = 20;
  SolveResult r = solve_single_layer(Tensor({1, 6, 6}), k, p);
  ASSERT_EQ(r.trace.size(), 20u);
  for (const EnergyTerms& e : r.trace) EXPECT_EQ(e.total(), 0.0);
  EXPECT_EQ(max_abs(r.state.u), 0.0);
}

TEST(LcaTest, StateStaysCoherentAndEnergyDescends) {
  std::mt19937_64 rng(15);
  KernelStack k = KernelStack::random(4, 1, 4, 4, {2, 2}, rng);
  Tensor x = gaussian({1, 8, 8}, rng);
  LcaParams p;
  p.nonnegative = true;
  LayerState s = LayerState::zeros(k.code_shape(x.shape()));
  const double e0 = energy(x, k, s.a, p.lambda);
  for (int t = 0; t < 400; ++t) {
    s = lca_step(s, x, k, nullptr, p);
    ASSERT_EQ(s.a, threshold(s.u, p));
  }
  EXPECT_LT(energy(x, k, s.a, p.lambda), e0);
  EXPECT_EQ(solve_single_layer(x, k, p).state, s);
}

TEST(LcaTest, MatchesFistaOnSmallLasso) {
  std::mt19937_64 rng(16);
  auto d = random_dense(8, 12, rng);
  KernelStack k = dense_stack(d);
  Tensor x = gaussian({8, 1, 1}, rng, 0.4);
  std::vector<double> xs(x.values().begin(), x.values().end());
  LcaParams p;
  p.lambda = 0.1;
  p.n_iterations = 3000;
  SolveResult r = solve_single_layer(x, k, p);
  std::vector<double> a(r.state.a.values().begin(), r.state.a.values().end());
  const double lca = testing::lasso_objective(d, xs, a, p.lambda);
  const double ref = testing::lasso_objective(d, xs, testing::fista(d, xs, p.lambda), p.lambda);
  EXPECT_NEAR(lca, ref, 1e-6 * (1 + ref));
}

TEST(LcaTest, DivergenceNamesIteration) {
  Tensor big({2, 1, 2, 2}, 1e200);
  KernelStack k(big, {2, 2});
  Tensor x({1, 4, 4}, 1.0);
  LcaParams p;
  try {
    solve_single_layer(x, k, p);
    FAIL() << "expected NumericDivergence";
  } catch (const NumericDivergence& e) {
    EXPECT_EQ(e.layer(), "single-layer");
    EXPECT_GE(e.iteration(), 1);
  }
}

TEST(LcaTest, ParamsValidate) {
  LcaParams p;
  p.dt_over_tau = 0.0;
  EXPECT_THROW(p.validate(), PreconditionError);
  p.dt_over_tau = 1.5;
  EXPECT_THROW(p.validate(), PreconditionError);
  p = {};
  p.lambda = -1;
  EXPECT_THROW(p.validate(), PreconditionError);
  p = {};
  p.n_iterations = 0;
  EXPECT_THROW(p.validate(), PreconditionError);
}

TEST(LcaTest, FeedbackShapeMismatchThrows) {
  std::mt19937_64 rng(17);
  KernelStack k = KernelStack::random(2, 1, 2, 2, {2, 2}, rng);
  Tensor x({1, 4, 4});
  Tensor wrong({2, 3, 3});
  EXPECT_THROW(lca_step(LayerState::zeros({2, 2, 2}), x, k, &wrong, LcaParams{}), GeometryError);
}

}  // namespace
}  // namespace dsc
