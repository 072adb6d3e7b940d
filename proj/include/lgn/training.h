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

#ifndef LGN_TRAINING_H_
#define LGN_TRAINING_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgn/data.h"
#include "lgn/network.h"
#include "lgn/random.h"

namespace lgn {

// -log softmax(scores)[label] via log-sum-exp. Throws Error(kIndex) for a
// label outside [0, scores.size()).
double CrossEntropyLoss(std::span<const double> scores, int label);

struct BatchLoss {
  double loss = 0.0;   // mean over the batch
  ClassScores grad;    // d(mean loss) / d(scores)
};

BatchLoss MeanCrossEntropy(const ClassScores& scores,
                           std::span<const int> labels);

// How the straight-through backward pass treats a neuron's inputs.
enum class StraightThrough {
  // d out / d(a, b) from the Gumbel-softmax mixture, so the gradient equals
  // the gumbel_soft gradient evaluated on the hard trace.
  kSoftMixture,
  // d out / d(a, b) from the selected gate only, as autograd produces for
  // weights stop_grad(one_hot - pi^G) + pi^G.
  kHardGate,
};

std::string_view StraightThroughName(StraightThrough st);
StraightThrough ParseStraightThrough(std::string_view name);

struct BackwardOptions {
  StraightThrough straight_through = StraightThrough::kSoftMixture;
  int threads = 1;
};

// Reverse-mode pass through GroupSum, gate mixtures and wiring fan-out.
// Returns d loss / d logits given d loss / d scores. `mode` and `tau` must
// match the trace; a kGumbelST trace may also be differentiated as
// kGumbelSoft. Throws Error(kContract) on a mismatch and Error(kShape) on
// a score-gradient shape mismatch.
std::vector<double> Backward(const Model& model, const ForwardTrace& trace,
                             const ClassScores& score_grads, Mode mode,
                             double tau, const BackwardOptions& options = {});

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  bool operator==(const AdamState&) const = default;
};

// Bias-corrected Adam. Throws Error(kTraining) naming the step if any
// gradient entry is non-finite; parameters are left untouched in that case.
void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, double learning_rate);

struct TrainConfig {
  Mode mode = Mode::kSoftmax;
  double tau = 1.0;
  double learning_rate = 0.01;
  int batch_size = 128;
  std::int64_t max_iterations = 2000;
  std::int64_t eval_every = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  StraightThrough straight_through = StraightThrough::kSoftMixture;

  // Throws Error(kConfig).
  void Validate() const;
};

struct LossReport {
  std::int64_t iteration = 0;
  double loss = 0.0;  // mean batch loss since the previous report
  double soft_accuracy = 0.0;
  double discrete_accuracy = 0.0;
  double gap = 0.0;  // |soft_accuracy - discrete_accuracy|
  double wall_seconds = 0.0;
  double iters_per_hour = 0.0;
};

// Feature-major input matrix for the given samples.
Activations GatherInputs(const Dataset& data, std::span<const int> indices);

// Accuracy of the noise-free soft network: softmax(z) for kSoftmax and
// softmax(z / tau) for the Gumbel modes.
double SoftAccuracy(const Model& model, const Dataset& data, Mode mode,
                    double tau, int threads = 1);

std::vector<int> PredictScalar(const DiscreteNetlist& netlist,
                               const Dataset& data);
std::vector<int> PredictBitpacked(const DiscreteNetlist& netlist,
                                  const Dataset& data);
double DiscreteAccuracy(const DiscreteNetlist& netlist, const Dataset& data);

// The training loop: sample a batch, draw one Gumbel vector per neuron,
// forward in the configured mode, backward, Adam. Deterministic given the
// seed, the data and the initial model.
class Trainer {
 public:
  struct State {
    AdamState adam;
    std::int64_t iteration = 0;
    std::string noise_rng;
    BatchIterator::State batches;
    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
  };

  // `eval` may be empty, in which case accuracies are measured on `train`.
  // Both datasets must outlive the trainer.
  Trainer(Model model, const Dataset& train, const Dataset& eval,
          TrainConfig config);

  // Runs one iteration and returns its batch loss. Throws Error(kTraining)
  // on a non-finite loss or gradient.
  double Step();

  // Soft and discrete accuracy on the eval set; consumes the running loss
  // average.
  LossReport Evaluate();

  // Steps until max_iterations, evaluating every eval_every iterations.
  std::vector<LossReport> Run(
      const std::function<void(const LossReport&)>& on_report = {});

  const Model& model() const { return model_; }
  const TrainConfig& config() const { return config_; }
  std::int64_t iteration() const { return iteration_; }

  State state() const;
  void Restore(const State& state);

 private:
  Model model_;
  const Dataset& train_;
  const Dataset& eval_;
  TrainConfig config_;
  AdamState adam_;
  Rng noise_rng_;
  BatchIterator batches_;
  std::int64_t iteration_ = 0;
  std::int64_t start_iteration_ = 0;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
  std::chrono::steady_clock::time_point start_;
  double train_seconds_ = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<LossReport> reports;
};

TrainResult TrainLoop(Model model, const Dataset& train,
                      const TrainConfig& config, const Dataset& eval);

// Deterministic columns of the metrics file and the timing columns, kept in
// separate files so metrics are byte-reproducible.
inline constexpr std::string_view kMetricsCsvHeader =
    "iteration,loss,soft_acc,discrete_acc,gap";
inline constexpr std::string_view kTimingCsvHeader =
    "iteration,wall_seconds,iters_per_hour";

std::string MetricsCsvRow(const LossReport& report);
std::string TimingCsvRow(const LossReport& report);

}  // namespace lgn

#endif  // LGN_TRAINING_H_
