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

#ifndef LGN_RANDOM_H_
#define LGN_RANDOM_H_

#include <cstdint>
#include <random>
#include <string>

namespace lgn {

// Mixes a base seed with a stream index (splitmix64 finalizer). Used to give
// every consumer (wiring, init, noise, batching, probe i, ...) its own
// independent, reproducible stream.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream);

// -log(-log u). Throws Error(kDomain) unless 0 < u < 1.
double SampleGumbel(double u);

// Seeded generator. All variates are derived from raw 64-bit engine output
// with fixed formulas (no std::*_distribution), so a stream is reproducible
// across standard libraries and its state is fully captured by the engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1); exact zeros are rejected.
  double UniformOpen() {
    double u;
    do {
      u = Uniform();
    } while (u == 0.0);
    return u;
  }

  // Standard normal by Box-Muller. Consumes exactly two uniforms and keeps
  // no cached second variate.
  double Normal();

  double Gumbel() { return SampleGumbel(UniformOpen()); }

  double Rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

  std::string SaveState() const;
  void LoadState(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lgn

#endif  // LGN_RANDOM_H_
