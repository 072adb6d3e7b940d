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

#ifndef LGN_ERROR_H_
#define LGN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lgn {

// Coarse failure categories. The CLI prints the category name as a stable,
// machine-parsable prefix.
enum class ErrorCode {
  kDomain,     // argument outside the mathematical domain
  kShape,      // length or partition mismatch
  kConfig,     // invalid configuration
  kParameter,  // invalid scalar hyperparameter (e.g. tau <= 0)
  kIndex,      // label or index out of range
  kContract,   // caller broke an API contract (e.g. mode/trace mismatch)
  kFormat,     // malformed file contents
  kNumeric,    // non-finite or degenerate intermediate
  kTraining,   // training diverged
  kIo,         // filesystem failure
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lgn

#endif  // LGN_ERROR_H_
