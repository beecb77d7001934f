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

// Independent reference solvers used to check the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dsc::testing {

// Column-major dense dictionary: atom j occupies [j * rows, (j + 1) * rows).
struct DenseDictionary {
  std::size_t rows = 0;
  std::size_t atoms = 0;
  std::vector<double> columns;

  double at(std::size_t i, std::size_t j) const { return columns[j * rows + i]; }

  std::vector<double> synthesize(const std::vector<double>& a) const {
    std::vector<double> out(rows, 0.0);
    for (std::size_t j = 0; j < atoms; ++j)
      for (std::size_t i = 0; i < rows; ++i) out[i] += at(i, j) * a[j];
    return out;
  }

  std::vector<double> analyze(const std::vector<double>& r) const {
    std::vector<double> out(atoms, 0.0);
    for (std::size_t j = 0; j < atoms; ++j)
      for (std::size_t i = 0; i < rows; ++i) out[j] += at(i, j) * r[i];
    return out;
  }

  // Largest eigenvalue of the Gram matrix by power iteration.
  double lipschitz() const {
    std::vector<double> v(atoms, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
      std::vector<double> w = analyze(synthesize(v));
      double n = 0.0;
      for (double e : w) n += e * e;
      n = std::sqrt(n);
      if (n == 0.0) return 0.0;
      for (std::size_t j = 0; j < atoms; ++j) v[j] = w[j] / n;
      lambda = n;
    }
    return lambda;
  }
};

inline double lasso_objective(const DenseDictionary& d, const std::vector<double>& x, const std::vector<double>& a,
                              double lambda) {
  std::vector<double> r = d.synthesize(a);
  double rec = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rec += (x[i] - r[i]) * (x[i] - r[i]);
  for (double v : a) l1 += std::abs(v);
  return 0.5 * rec + lambda * l1;
}

// Accelerated proximal gradient on 1/2 ||x - D a||^2 + lambda ||a||_1.
inline std::vector<double> fista(const DenseDictionary& d, const std::vector<double>& x, double lambda,
                                 int iterations = 20000) {
  const double L = d.lipschitz();
  const double step = 1.0 / L;
  std::vector<double> a(d.atoms, 0.0), y = a, prev = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> r = d.synthesize(y);
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - r[i];
    std::vector<double> g = d.analyze(r);
    prev = a;
    for (std::size_t j = 0; j < d.atoms; ++j) {
      double z = y[j] + step * g[j];
      double m = std::max(std::abs(z) - step * lambda, 0.0);
      a[j] = z < 0 ? -m : m;
    }
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t j = 0; j < d.atoms; ++j) y[j] = a[j] + (t - 1.0) / tn * (a[j] - prev[j]);
    t = tn;
  }
  return a;
}

}  // namespace dsc::testing
