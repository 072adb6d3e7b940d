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

#include "lgn/error.h"

namespace lgn {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain:
      return "domain";
    case ErrorCode::kShape:
      return "shape";
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kParameter:
      return "parameter";
    case ErrorCode::kIndex:
      return "index";
    case ErrorCode::kContract:
      return "contract";
    case ErrorCode::kFormat:
      return "format";
    case ErrorCode::kNumeric:
      return "numeric";
    case ErrorCode::kTraining:
      return "training";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace lgn
