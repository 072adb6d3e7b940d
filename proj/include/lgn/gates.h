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

#ifndef LGN_GATES_H_
#define LGN_GATES_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace lgn {

inline constexpr int kNumGates = 16;

// The 16 two-input Boolean functions. The numeric value is the truth table:
// bit (2a + b) of the id holds f(a, b), i.e.
//   id = 8 f(1,1) + 4 f(1,0) + 2 f(0,1) + f(0,0).
enum class Gate : std::uint8_t {
  kFalse = 0,
  kNor = 1,
  kNotAAndB = 2,
  kNotA = 3,
  kAAndNotB = 4,
  kNotB = 5,
  kXor = 6,
  kNand = 7,
  kAnd = 8,
  kXnor = 9,
  kB = 10,
  kAImpliesB = 11,  // !a | b
  kA = 12,
  kBImpliesA = 13,  // a | !b
  kOr = 14,
  kTrue = 15,
};

constexpr int GateIndex(Gate gate) { return static_cast<int>(gate); }

// Throws Error(kDomain) unless 0 <= id < 16.
Gate GateFromId(int id);

std::string_view GateName(Gate gate);

// Relaxed gate h(a, b) = c0 + c1 a + c2 b + c3 ab: the multilinear
// interpolation of the truth table over [0,1]^2 (AND -> ab, OR -> a+b-ab,
// XOR -> a+b-2ab, ...).
struct Bilinear {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  constexpr double operator()(double a, double b) const {
    return c0 + c1 * a + c2 * b + c3 * a * b;
  }
  constexpr double da(double b) const { return c1 + c3 * b; }
  constexpr double db(double a) const { return c2 + c3 * a; }
};

constexpr Bilinear RelaxationOf(int id) {
  const double f00 = (id >> 0) & 1;
  const double f01 = (id >> 1) & 1;
  const double f10 = (id >> 2) & 1;
  const double f11 = (id >> 3) & 1;
  return {f00, f10 - f00, f01 - f00, f11 - f10 - f01 + f00};
}

inline constexpr std::array<Bilinear, kNumGates> kRelaxations = [] {
  std::array<Bilinear, kNumGates> table{};
  for (int id = 0; id < kNumGates; ++id) table[id] = RelaxationOf(id);
  return table;
}();

constexpr const Bilinear& Relaxation(Gate gate) {
  return kRelaxations[GateIndex(gate)];
}

// sum_i weights[i] * h_i as a single bilinear form. `weights` has 16 entries.
constexpr Bilinear MixRelaxations(std::span<const double> weights) {
  Bilinear h;
  for (int i = 0; i < kNumGates; ++i) {
    const Bilinear& g = kRelaxations[i];
    h.c0 += weights[i] * g.c0;
    h.c1 += weights[i] * g.c1;
    h.c2 += weights[i] * g.c2;
    h.c3 += weights[i] * g.c3;
  }
  return h;
}

// Relaxed value on [0,1]^2. Throws Error(kDomain) for inputs outside [0,1]
// or non-finite inputs.
double EvalRelaxed(Gate gate, double a, double b);

// (d/da, d/db) of the relaxed gate. Same domain checks as EvalRelaxed.
std::pair<double, double> EvalRelaxedGrad(Gate gate, double a, double b);

constexpr bool EvalDiscrete(Gate gate, bool a, bool b) {
  return (GateIndex(gate) >> (2 * int{a} + int{b})) & 1;
}

// Applies the gate lane-wise: bit k of the result is
// EvalDiscrete(gate, bit k of wa, bit k of wb).
constexpr std::uint64_t EvalBitpacked(Gate gate, std::uint64_t wa,
                                      std::uint64_t wb) {
  switch (gate) {
    case Gate::kFalse:
      return 0;
    case Gate::kNor:
      return ~(wa | wb);
    case Gate::kNotAAndB:
      return ~wa & wb;
    case Gate::kNotA:
      return ~wa;
    case Gate::kAAndNotB:
      return wa & ~wb;
    case Gate::kNotB:
      return ~wb;
    case Gate::kXor:
      return wa ^ wb;
    case Gate::kNand:
      return ~(wa & wb);
    case Gate::kAnd:
      return wa & wb;
    case Gate::kXnor:
      return ~(wa ^ wb);
    case Gate::kB:
      return wb;
    case Gate::kAImpliesB:
      return ~wa | wb;
    case Gate::kA:
      return wa;
    case Gate::kBImpliesA:
      return wa | ~wb;
    case Gate::kOr:
      return wa | wb;
    case Gate::kTrue:
      return ~std::uint64_t{0};
  }
  return 0;
}

// Structural symmetries of the gate set.
constexpr Gate Negated(Gate gate) {
  return static_cast<Gate>(15 - GateIndex(gate));
}

// The gate g' with g'(a, b) = g(b, a): swaps the f(0,1) and f(1,0) bits.
constexpr Gate InputsSwapped(Gate gate) {
  const int id = GateIndex(gate);
  const int f01 = (id >> 1) & 1;
  const int f10 = (id >> 2) & 1;
  return static_cast<Gate>((id & 0b1001) | (f01 << 2) | (f10 << 1));
}

}  // namespace lgn

#endif  // LGN_GATES_H_
