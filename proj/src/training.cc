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

#include "lgn/training.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lgn/error.h"
#include "lgn/parallel.h"
#include "lgn/softmax.h"

namespace lgn {
namespace {

constexpr std::size_t kG = kNumGates;
constexpr int kEvalChunk = 1024;

std::string IterationMessage(const char* what, std::int64_t iteration) {
  return std::string(what) + " at iteration " + std::to_string(iteration);
}

}  // namespace

double CrossEntropyLoss(std::span<const double> scores, int label) {
  if (label < 0 || label >= static_cast<int>(scores.size())) {
    throw Error(ErrorCode::kIndex,
                "label " + std::to_string(label) + " outside [0, " +
                    std::to_string(scores.size()) + ")");
  }
  return LogSumExp(scores) - scores[label];
}

BatchLoss MeanCrossEntropy(const ClassScores& scores,
                           std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != scores.batch) {
    throw Error(ErrorCode::kShape,
                "label count " + std::to_string(labels.size()) +
                    " does not match batch " + std::to_string(scores.batch));
  }
  BatchLoss out;
  out.grad.batch = scores.batch;
  out.grad.num_classes = scores.num_classes;
  out.grad.values.assign(scores.values.size(), 0.0);
  const double inv_batch = 1.0 / std::max(scores.batch, 1);
  for (int s = 0; s < scores.batch; ++s) {
    std::span<const double> x = scores.sample(s);
    out.loss += CrossEntropyLoss(x, labels[s]);
    std::span<double> g = out.grad.sample(s);
    Softmax(x, g);
    g[labels[s]] -= 1.0;
    for (double& v : g) v *= inv_batch;
  }
  out.loss *= inv_batch;
  return out;
}

std::string_view StraightThroughName(StraightThrough st) {
  return st == StraightThrough::kHardGate ? "hard_gate" : "soft_mixture";
}

StraightThrough ParseStraightThrough(std::string_view name) {
  if (name == "soft_mixture") return StraightThrough::kSoftMixture;
  if (name == "hard_gate") return StraightThrough::kHardGate;
  throw Error(ErrorCode::kConfig,
              "unknown straight_through '" + std::string(name) +
                  "' (expected soft_mixture or hard_gate)");
}

std::vector<double> Backward(const Model& model, const ForwardTrace& trace,
                             const ClassScores& score_grads, Mode mode,
                             double tau, const BackwardOptions& options) {
  const NetworkConfig& cfg = model.config();
  const bool st_as_soft =
      mode == Mode::kGumbelSoft && trace.mode == Mode::kGumbelST;
  if (mode != trace.mode && !st_as_soft) {
    throw Error(ErrorCode::kContract,
                "backward mode " + std::string(ModeName(mode)) +
                    " does not match trace mode " +
                    std::string(ModeName(trace.mode)));
  }
  const bool gumbel = mode != Mode::kSoftmax;
  if (gumbel && tau != trace.tau) {
    std::ostringstream msg;
    msg << "backward tau " << tau << " does not match trace tau " << trace.tau;
    throw Error(ErrorCode::kContract, msg.str());
  }
  if (static_cast<int>(trace.layers.size()) != cfg.depth + 1 ||
      trace.gate_weights.size() != model.num_parameters()) {
    throw Error(ErrorCode::kContract,
                "trace does not hold every layer of this model");
  }
  const int batch = trace.batch();
  if (score_grads.batch != batch || score_grads.num_classes != cfg.num_classes) {
    throw Error(ErrorCode::kShape,
                "score gradient shape " + std::to_string(score_grads.batch) +
                    "x" + std::to_string(score_grads.num_classes) +
                    " does not match " + std::to_string(batch) + "x" +
                    std::to_string(cfg.num_classes));
  }

  const int width = cfg.width;
  const int group = width / cfg.num_classes;
  const bool hard_inputs = mode == Mode::kGumbelST &&
                           options.straight_through == StraightThrough::kHardGate;
  const double inv_tau = gumbel ? 1.0 / tau : 1.0;
  std::vector<double> grad(model.num_parameters(), 0.0);

  Activations delta(width, batch);
  for (int j = 0; j < width; ++j) {
    const int c = j / group;
    std::span<double> d = delta.row(j);
    for (int s = 0; s < batch; ++s) {
      d[s] = score_grads.values[static_cast<std::size_t>(s) * cfg.num_classes +
                                c] /
             cfg.groupsum_tau;
    }
  }

  std::vector<Bilinear> through(width);
  for (int l = cfg.depth - 1; l >= 0; --l) {
    const Activations& prev = trace.layers[l];
    const LayerWiring& wires = model.wiring()[l];

    ParallelFor(width, options.threads, [&](int begin, int end) {
      for (int n = begin; n < end; ++n) {
        const std::size_t idx = static_cast<std::size_t>(l) * width + n;
        std::span<const double> a = prev.row(wires.left[n]);
        std::span<const double> b = prev.row(wires.right[n]);
        std::span<const double> d = delta.row(n);
        double g0 = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0;
        for (int s = 0; s < batch; ++s) {
          g0 += d[s];
          g1 += d[s] * a[s];
          g2 += d[s] * b[s];
          g3 += d[s] * a[s] * b[s];
        }
        const double* w = trace.gate_weights.data() + idx * kG;
        std::array<double, kG> gw;
        double mean = 0.0;
        for (std::size_t i = 0; i < kG; ++i) {
          const Bilinear& h = kRelaxations[i];
          gw[i] = h.c0 * g0 + h.c1 * g1 + h.c2 * g2 + h.c3 * g3;
          mean += w[i] * gw[i];
        }
        double* gz = grad.data() + idx * kG;
        for (std::size_t i = 0; i < kG; ++i) {
          gz[i] = w[i] * (gw[i] - mean) * inv_tau;
        }
        through[n] = hard_inputs
                         ? Relaxation(trace.hard_gates[idx])
                         : MixRelaxations(std::span<const double>(w, kG));
      }
    });
    if (l == 0) break;

    // Each thread owns a contiguous block of target rows and visits the
    // neurons in order, so sums do not depend on the thread count.
    Activations dprev(prev.rows, batch);
    ParallelFor(prev.rows, options.threads, [&](int begin, int end) {
      const auto lo = static_cast<std::uint32_t>(begin);
      const auto hi = static_cast<std::uint32_t>(end);
      for (int n = 0; n < width; ++n) {
        const std::uint32_t li = wires.left[n];
        const std::uint32_t ri = wires.right[n];
        const bool take_left = li >= lo && li < hi;
        const bool take_right = ri >= lo && ri < hi;
        if (!take_left && !take_right) continue;
        const Bilinear& h = through[n];
        std::span<const double> a = prev.row(li);
        std::span<const double> b = prev.row(ri);
        std::span<const double> d = delta.row(n);
        if (take_left) {
          std::span<double> out = dprev.row(li);
          for (int s = 0; s < batch; ++s) out[s] += d[s] * (h.c1 + h.c3 * b[s]);
        }
        if (take_right) {
          std::span<double> out = dprev.row(ri);
          for (int s = 0; s < batch; ++s) out[s] += d[s] * (h.c2 + h.c3 * a[s]);
        }
      }
    });
    delta = std::move(dprev);
  }
  return grad;
}

void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, double learning_rate) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error(ErrorCode::kShape, "Adam parameter, gradient and moment sizes differ");
  }
  const std::int64_t step = state.step + 1;
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::kTraining,
                  IterationMessage("non-finite gradient", step));
    }
  }
  state.step = step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kConfig, msg);
  };
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be positive");
  }
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (max_iterations < 0) fail("max_iterations must be >= 0");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
}

Activations GatherInputs(const Dataset& data, std::span<const int> indices) {
  const int cols = static_cast<int>(indices.size());
  Activations x(data.feature_bits, cols);
  for (int s = 0; s < cols; ++s) {
    std::span<const std::uint8_t> bits = data.sample(indices[s]);
    for (int f = 0; f < data.feature_bits; ++f) {
      x.data[static_cast<std::size_t>(f) * cols + s] = bits[f];
    }
  }
  return x;
}

double SoftAccuracy(const Model& model, const Dataset& data, Mode mode,
                    double tau, int threads) {
  if (data.empty()) return 0.0;
  ForwardOptions opts;
  opts.mode = mode == Mode::kSoftmax ? Mode::kSoftmax : Mode::kGumbelSoft;
  opts.tau = tau;
  opts.threads = threads;
  opts.keep_layers = false;
  std::size_t correct = 0;
  std::vector<int> idx;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(data.size(), start + kEvalChunk);
    idx.resize(stop - start);
    for (std::size_t i = start; i < stop; ++i) idx[i - start] = static_cast<int>(i);
    const ForwardResult r = Forward(model, GatherInputs(data, idx), opts);
    for (std::size_t i = start; i < stop; ++i) {
      const int s = static_cast<int>(i - start);
      if (ArgmaxLowest(r.scores.sample(s)) == data.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<int> PredictScalar(const DiscreteNetlist& netlist,
                               const Dataset& data) {
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = NetlistInfer(netlist, data.sample(i)).predicted_class;
  }
  return out;
}

std::vector<int> PredictBitpacked(const DiscreteNetlist& netlist,
                                  const Dataset& data) {
  std::vector<int> out(data.size());
  std::vector<std::span<const std::uint8_t>> lanes;
  for (std::size_t start = 0; start < data.size(); start += 64) {
    const std::size_t stop = std::min(data.size(), start + 64);
    lanes.clear();
    for (std::size_t i = start; i < stop; ++i) lanes.push_back(data.sample(i));
    const std::vector<std::uint64_t> packed =
        PackSamples(lanes, data.feature_bits);
    const PackedPrediction p = NetlistInferBitpacked(
        netlist, packed, static_cast<int>(stop - start));
    std::copy(p.predicted.begin(), p.predicted.end(), out.begin() + start);
  }
  return out;
}

double DiscreteAccuracy(const DiscreteNetlist& netlist, const Dataset& data) {
  if (data.empty()) return 0.0;
  const std::vector<int> pred = PredictBitpacked(netlist, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Trainer::Trainer(Model model, const Dataset& train, const Dataset& eval,
                 TrainConfig config)
    : model_(std::move(model)),
      train_(train),
      eval_(eval.empty() ? train : eval),
      config_(config),
      adam_(model_.num_parameters()),
      noise_rng_(DeriveSeed(config.seed, 1)),
      batches_(train.size(), std::max(config.batch_size, 1),
               DeriveSeed(config.seed, 2)),
      start_(std::chrono::steady_clock::now()) {
  config_.Validate();
  if (train.empty()) throw Error(ErrorCode::kConfig, "training set is empty");
  if (train.feature_bits != model_.config().input_bits) {
    throw Error(ErrorCode::kShape,
                "input feature_bits: expected " +
                    std::to_string(model_.config().input_bits) + ", found " +
                    std::to_string(train.feature_bits));
  }
  if (train.num_classes > model_.config().num_classes) {
    throw Error(ErrorCode::kShape,
                "dataset has " + std::to_string(train.num_classes) +
                    " classes but the model has " +
                    std::to_string(model_.config().num_classes));
  }
}

double Trainer::Step() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t it = iteration_ + 1;
  const std::vector<int> idx = batches_.Next();
  std::vector<int> labels(idx.size());
  for (std::size_t s = 0; s < idx.size(); ++s) labels[s] = train_.labels[idx[s]];

  ForwardOptions opts;
  opts.mode = config_.mode;
  opts.tau = config_.tau;
  opts.threads = config_.threads;
  GumbelNoise noise;
  if (config_.mode != Mode::kSoftmax) {
    noise = SampleGumbelNoise(model_, noise_rng_);
    opts.noise = &noise;
  }
  const ForwardResult fwd = Forward(model_, GatherInputs(train_, idx), opts);
  const BatchLoss loss = MeanCrossEntropy(fwd.scores, labels);
  if (!std::isfinite(loss.loss)) {
    throw Error(ErrorCode::kTraining, IterationMessage("non-finite loss", it));
  }
  const std::vector<double> grad =
      Backward(model_, fwd.trace, loss.grad, config_.mode, config_.tau,
               {config_.straight_through, config_.threads});
  try {
    AdamStep(model_.mutable_logits(), grad, adam_, config_.learning_rate);
  } catch (const Error&) {
    throw Error(ErrorCode::kTraining,
                IterationMessage("non-finite gradient", it));
  }
  iteration_ = it;
  loss_sum_ += loss.loss;
  ++loss_count_;
  train_seconds_ += std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  return loss.loss;
}

LossReport Trainer::Evaluate() {
  LossReport r;
  r.iteration = iteration_;
  r.loss = loss_count_ > 0 ? loss_sum_ / loss_count_ : 0.0;
  loss_sum_ = 0.0;
  loss_count_ = 0;
  r.soft_accuracy = SoftAccuracy(model_, eval_, config_.mode, config_.tau,
                                 config_.threads);
  r.discrete_accuracy = DiscreteAccuracy(Discretize(model_), eval_);
  r.gap = std::abs(r.soft_accuracy - r.discrete_accuracy);
  r.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start_)
                       .count();
  const std::int64_t done = iteration_ - start_iteration_;
  r.iters_per_hour =
      train_seconds_ > 0.0 ? 3600.0 * static_cast<double>(done) / train_seconds_
                           : 0.0;
  return r;
}

std::vector<LossReport> Trainer::Run(
    const std::function<void(const LossReport&)>& on_report) {
  std::vector<LossReport> reports;
  while (iteration_ < config_.max_iterations) {
    Step();
    if (iteration_ % config_.eval_every == 0) {
      reports.push_back(Evaluate());
      if (on_report) on_report(reports.back());
    }
  }
  return reports;
}

Trainer::State Trainer::state() const {
  return {adam_,          iteration_,  noise_rng_.SaveState(),
          batches_.state(), loss_sum_, loss_count_};
}

void Trainer::Restore(const State& state) {
  if (state.adam.m.size() != model_.num_parameters() ||
      state.adam.v.size() != model_.num_parameters()) {
    throw Error(ErrorCode::kShape, "optimizer state does not match the model");
  }
  adam_ = state.adam;
  iteration_ = state.iteration;
  start_iteration_ = state.iteration;
  noise_rng_.LoadState(state.noise_rng);
  batches_.Restore(state.batches);
  loss_sum_ = state.loss_sum;
  loss_count_ = state.loss_count;
  train_seconds_ = 0.0;
  start_ = std::chrono::steady_clock::now();
}

TrainResult TrainLoop(Model model, const Dataset& train,
                      const TrainConfig& config, const Dataset& eval) {
  Trainer trainer(std::move(model), train, eval, config);
  std::vector<LossReport> reports = trainer.Run();
  return {trainer.model(), std::move(reports)};
}

std::string MetricsCsvRow(const LossReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g",
                static_cast<long long>(r.iteration), r.loss, r.soft_accuracy,
                r.discrete_accuracy, r.gap);
  return buf;
}

std::string TimingCsvRow(const LossReport& r) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%lld,%.3f,%.1f",
                static_cast<long long>(r.iteration), r.wall_seconds,
                r.iters_per_hour);
  return buf;
}

}  // namespace lgn
