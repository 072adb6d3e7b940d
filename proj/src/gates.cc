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

#include "lgn/gates.h"

#include <cmath>
#include <sstream>

#include "lgn/error.h"

namespace lgn {
namespace {

constexpr std::array<std::string_view, kNumGates> kNames = {
    "FALSE", "NOR", "NOT_A_AND_B", "NOT_A", "A_AND_NOT_B", "NOT_B",
    "XOR",   "NAND", "AND", "XNOR", "B", "A_IMPLIES_B", "A", "B_IMPLIES_A",
    "OR",    "TRUE"};

void CheckUnitInterval(double a, double b) {
  auto ok = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
  if (!ok(a) || !ok(b)) {
    std::ostringstream msg;
    msg << "relaxed gate inputs must lie in [0,1], got (" << a << ", " << b
        << ")";
    throw Error(ErrorCode::kDomain, msg.str());
  }
}

}  // namespace

Gate GateFromId(int id) {
  if (id < 0 || id >= kNumGates) {
    throw Error(ErrorCode::kDomain,
                "gate id " + std::to_string(id) + " outside [0, 15]");
  }
  return static_cast<Gate>(id);
}

std::string_view GateName(Gate gate) { return kNames[GateIndex(gate)]; }

double EvalRelaxed(Gate gate, double a, double b) {
  CheckUnitInterval(a, b);
  return Relaxation(gate)(a, b);
}

std::pair<double, double> EvalRelaxedGrad(Gate gate, double a, double b) {
  CheckUnitInterval(a, b);
  const Bilinear& h = Relaxation(gate);
  return {h.da(b), h.db(a)};
}

}  // namespace lgn
