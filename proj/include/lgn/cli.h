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

#ifndef LGN_CLI_H_
#define LGN_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lgn/data.h"
#include "lgn/network.h"
#include "lgn/training.h"

namespace lgn {

struct DataConfig {
  // synthetic | idx | cifar10
  std::string kind = "synthetic";
  // synthetic
  std::string task = "xor";
  int task_bits = 2;
  // idx
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  // cifar10
  std::vector<std::string> train_files;
  std::vector<std::string> test_files;
  // Empty means the per-kind default: {0.5} for idx, {0.25, 0.5, 0.75} for
  // cifar10. Unused for synthetic data.
  std::vector<double> thresholds;
  // 0 keeps everything.
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
};

struct DiagnosticsConfig {
  std::vector<std::string> reports;
  int curvature_batch = 512;
  int hutchinson_probes = 200;
  int power_iterations = 200;
  int landscape_resolution = 21;
  double landscape_radius = 1.0;
  int entropy_samples = 100000;
  double entropy_percentile = 2.5;
  std::vector<double> lemma_taus = {4.0, 8.0, 16.0};
  std::int64_t lemma_samples = 1000000;
  std::uint64_t seed = 0;
};

struct RunConfig {
  // input_bits and num_classes of 0 are filled in from the data.
  NetworkConfig network{.input_bits = 0, .depth = 6, .width = 8000,
                        .num_classes = 0};
  TrainConfig training;
  DataConfig data;
  DiagnosticsConfig diagnostics;
  std::string output_dir = "run";
  int keep_checkpoints = 3;
};

inline constexpr std::string_view kReportNames[] = {
    "entropy", "hessian", "eigen", "landscape", "histogram", "lemma"};

// Strict parse: unknown keys and type mismatches throw Error(kConfig) naming
// the key and its line.
RunConfig ParseRunConfig(std::string_view text);

// Reads the file and applies LGN_OUTPUT_DIR and LGN_THREADS.
RunConfig LoadRunConfig(const std::string& path);

std::string RunConfigToJson(const RunConfig& config);

struct LoadedData {
  Dataset train;
  Dataset test;  // may be empty
};

LoadedData LoadData(const DataConfig& config);

// Fills input_bits / num_classes from the data when unset and checks that
// the rest agree. Throws Error(kShape) naming expected vs found.
void ResolveShapes(NetworkConfig& network, const Dataset& data);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  TrainConfig training;
  Trainer::State state;
};

void SaveCheckpoint(const std::string& path, const Model& model,
                    const TrainConfig& training, const Trainer::State& state);
Checkpoint LoadCheckpoint(const std::string& path);

// Entry point of the `lgn` tool. Errors are reported on `err` as a single
// "error[<category>]: <message>" line and a nonzero status.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace lgn

#endif  // LGN_CLI_H_
