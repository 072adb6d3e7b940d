// Copyright 2026 The lgn Authors
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

#ifndef LGN_TESTS_TEST_UTIL_H_
#define LGN_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lgn/network.h"

namespace lgn::testing {

// Multilinear interpolation of the truth table, written in the corner basis
// rather than via the library's coefficient table.
inline double CornerInterpolation(int id, double a, double b) {
  const double f00 = (id >> 0) & 1, f01 = (id >> 1) & 1;
  const double f10 = (id >> 2) & 1, f11 = (id >> 3) & 1;
  return f00 * (1 - a) * (1 - b) + f01 * (1 - a) * b + f10 * a * (1 - b) +
         f11 * a * b;
}

inline std::vector<double> NaiveSoftmax(std::span<const double> x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  std::vector<double> p(x.size());
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += p[i] = std::exp(x[i] - m);
  for (double& v : p) v /= s;
  return p;
}

// Sample-at-a-time forward pass. `weights(l, n)` returns the 16 mixture
// weights of neuron n in layer l.
template <typename Weights>
std::vector<double> OracleScores(const Model& m, std::span<const double> x,
                                 Weights weights) {
  const NetworkConfig& c = m.config();
  std::vector<double> cur(x.begin(), x.end());
  for (int l = 0; l < c.depth; ++l) {
    std::vector<double> next(c.width);
    for (int n = 0; n < c.width; ++n) {
      const std::vector<double> w = weights(l, n);
      const double a = cur[m.wiring()[l].left[n]];
      const double b = cur[m.wiring()[l].right[n]];
      double out = 0;
      for (int i = 0; i < 16; ++i) out += w[i] * CornerInterpolation(i, a, b);
      next[n] = out;
    }
    cur = std::move(next);
  }
  std::vector<double> scores(c.num_classes, 0.0);
  const int group = c.width / c.num_classes;
  for (int j = 0; j < c.width; ++j) scores[j / group] += cur[j];
  for (double& s : scores) s /= c.groupsum_tau;
  return scores;
}

inline NetworkConfig SmallConfig(int input_bits, int depth, int width,
                                 int classes, std::uint64_t seed) {
  return {.input_bits = input_bits,
          .depth = depth,
          .width = width,
          .num_classes = classes,
          .groupsum_tau = 1.0,
          .wiring_seed = seed,
          .init_seed = seed + 1000};
}

inline Activations AllBinaryInputs(int bits) {
  const int n = 1 << bits;
  Activations x(bits, n);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < bits; ++i) x.at(i, s) = (s >> i) & 1;
  }
  return x;
}

inline double RelError(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace lgn::testing

#endif  // LGN_TESTS_TEST_UTIL_H_
