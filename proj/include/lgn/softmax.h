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

#ifndef LGN_SOFTMAX_H_
#define LGN_SOFTMAX_H_

#include <algorithm>
#include <cmath>
#include <span>

namespace lgn {

inline double LogSumExp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

// out may alias x.
inline void Softmax(std::span<const double> x, std::span<double> out) {
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] /= sum;
}

inline void LogSoftmax(std::span<const double> x, std::span<double> out) {
  const double lse = LogSumExp(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
}

}  // namespace lgn

#endif  // LGN_SOFTMAX_H_
