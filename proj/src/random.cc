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

#include "lgn/random.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lgn/error.h"

namespace lgn {

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SampleGumbel(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << "Gumbel sampling needs u in (0,1), got " << u;
    throw Error(ErrorCode::kDomain, msg.str());
  }
  return -std::log(-std::log(u));
}

double Rng::Normal() {
  const double u1 = UniformOpen();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::Below(std::uint64_t n) {
  // Rejection on the top of the range keeps every residue equally likely.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::string Rng::SaveState() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::LoadState(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (in.fail()) throw Error(ErrorCode::kFormat, "corrupt RNG state");
}

}  // namespace lgn
