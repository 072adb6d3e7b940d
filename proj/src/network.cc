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

#include "lgn/network.h"

#include <array>
#include <cmath>
#include <sstream>

#include "lgn/error.h"
#include "lgn/parallel.h"
#include "lgn/softmax.h"

namespace lgn {
namespace {

constexpr std::size_t kG = kNumGates;

void ApplyGate(const Bilinear& h, std::span<const double> a,
               std::span<const double> b, std::span<double> out) {
  const double c0 = h.c0, c1 = h.c1, c2 = h.c2, c3 = h.c3;
  const std::size_t n = out.size();
  for (std::size_t s = 0; s < n; ++s) {
    out[s] = c0 + c1 * a[s] + c2 * b[s] + c3 * a[s] * b[s];
  }
}

std::string ShapeMessage(const char* what, long long expected,
                         long long found) {
  std::ostringstream msg;
  msg << what << ": expected " << expected << ", found " << found;
  return msg.str();
}

}  // namespace

void NetworkConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kConfig, msg);
  };
  if (input_bits < 1) fail("input_bits must be >= 1");
  if (depth < 1) fail("depth must be >= 1");
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (width < num_classes) fail("width must be >= num_classes");
  if (width % num_classes != 0) {
    fail("width " + std::to_string(width) + " is not divisible by " +
         std::to_string(num_classes) + " classes");
  }
  if (!(groupsum_tau > 0.0) || !std::isfinite(groupsum_tau)) {
    fail("groupsum_tau must be positive and finite");
  }
}

Wiring SampleWiring(const NetworkConfig& config) {
  config.Validate();
  Rng rng(config.wiring_seed);
  Wiring wiring(config.depth);
  for (int l = 0; l < config.depth; ++l) {
    const std::uint64_t fan_in = config.LayerInputs(l);
    auto& layer = wiring[l];
    layer.left.resize(config.width);
    layer.right.resize(config.width);
    for (int n = 0; n < config.width; ++n) {
      layer.left[n] = static_cast<std::uint32_t>(rng.Below(fan_in));
      layer.right[n] = static_cast<std::uint32_t>(rng.Below(fan_in));
    }
  }
  return wiring;
}

void ValidateWiring(const NetworkConfig& config, const Wiring& wiring) {
  if (static_cast<int>(wiring.size()) != config.depth) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("wiring layers", config.depth, wiring.size()));
  }
  for (int l = 0; l < config.depth; ++l) {
    const auto& layer = wiring[l];
    if (static_cast<int>(layer.left.size()) != config.width ||
        static_cast<int>(layer.right.size()) != config.width) {
      throw Error(ErrorCode::kShape,
                  ShapeMessage("wiring width", config.width, layer.left.size()));
    }
    const std::uint32_t limit = config.LayerInputs(l);
    for (int n = 0; n < config.width; ++n) {
      if (layer.left[n] >= limit || layer.right[n] >= limit) {
        throw Error(ErrorCode::kShape,
                    "wiring index out of range in layer " + std::to_string(l));
      }
    }
  }
}

Model::Model(NetworkConfig config, Wiring wiring, std::vector<double> logits)
    : config_(std::move(config)),
      wiring_(std::move(wiring)),
      logits_(std::move(logits)) {
  config_.Validate();
  ValidateWiring(config_, wiring_);
  const std::size_t expected =
      static_cast<std::size_t>(config_.num_neurons()) * kG;
  if (logits_.size() != expected) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("logit count", expected, logits_.size()));
  }
}

Model InitModel(const NetworkConfig& config) {
  config.Validate();
  Wiring wiring = SampleWiring(config);
  Rng rng(config.init_seed);
  std::vector<double> logits(static_cast<std::size_t>(config.num_neurons()) *
                             kG);
  for (double& z : logits) z = rng.Normal();
  return Model(config, std::move(wiring), std::move(logits));
}

Activations SingleSample(std::span<const double> features) {
  Activations a(static_cast<int>(features.size()), 1);
  std::copy(features.begin(), features.end(), a.data.begin());
  return a;
}

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kSoftmax:
      return "softmax";
    case Mode::kGumbelSoft:
      return "gumbel_soft";
    case Mode::kGumbelST:
      return "gumbel_st";
  }
  return "softmax";
}

Mode ParseMode(std::string_view name) {
  if (name == "softmax") return Mode::kSoftmax;
  if (name == "gumbel_soft") return Mode::kGumbelSoft;
  if (name == "gumbel_st") return Mode::kGumbelST;
  throw Error(ErrorCode::kConfig,
              "unknown mode '" + std::string(name) +
                  "' (expected softmax, gumbel_soft or gumbel_st)");
}

GumbelNoise SampleGumbelNoise(const Model& model, Rng& rng) {
  GumbelNoise noise(model.num_parameters());
  for (double& g : noise) g = rng.Gumbel();
  return noise;
}

int ArgmaxLowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ForwardResult Forward(const Model& model, const Activations& inputs,
                      const ForwardOptions& options) {
  const NetworkConfig& cfg = model.config();
  if (inputs.rows != cfg.input_bits) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("input feature_bits", cfg.input_bits, inputs.rows));
  }
  for (double x : inputs.data) {
    if (!(x >= 0.0 && x <= 1.0)) {
      std::ostringstream msg;
      msg << "network inputs must lie in [0,1], got " << x;
      throw Error(ErrorCode::kDomain, msg.str());
    }
  }
  const bool gumbel = options.mode != Mode::kSoftmax;
  if (gumbel && !(options.tau > 0.0 && std::isfinite(options.tau))) {
    std::ostringstream msg;
    msg << "Gumbel temperature must be positive, got " << options.tau;
    throw Error(ErrorCode::kParameter, msg.str());
  }
  if (options.noise != nullptr &&
      options.noise->size() != model.num_parameters()) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("Gumbel noise length", model.num_parameters(),
                             options.noise->size()));
  }

  ForwardResult result;
  ForwardTrace& trace = result.trace;
  trace.mode = options.mode;
  trace.tau = gumbel ? options.tau : 1.0;
  trace.gate_weights.resize(model.num_parameters());
  if (options.mode == Mode::kGumbelST) trace.hard_gates.resize(model.num_neurons());
  if (gumbel) {
    trace.noise = options.noise != nullptr
                      ? *options.noise
                      : GumbelNoise(model.num_parameters(), 0.0);
  }

  const int batch = inputs.cols;
  const int width = cfg.width;
  const double inv_tau = 1.0 / trace.tau;
  if (options.keep_layers) trace.layers.reserve(cfg.depth + 1);
  trace.layers.push_back(inputs);

  for (int l = 0; l < cfg.depth; ++l) {
    const Activations& in = trace.layers.back();
    Activations out(width, batch);
    const LayerWiring& wires = model.wiring()[l];
    ParallelFor(width, options.threads, [&](int begin, int end) {
      std::array<double, kG> y;
      for (int n = begin; n < end; ++n) {
        const std::size_t idx = static_cast<std::size_t>(l) * width + n;
        std::span<const double> z = model.neuron_logits(l, n);
        std::span<double> w(trace.gate_weights.data() + idx * kG, kG);
        Bilinear h;
        if (!gumbel) {
          Softmax(z, w);
          h = MixRelaxations(w);
        } else {
          // log pi is taken as log-softmax(z) directly.
          LogSoftmax(z, y);
          const double* g = trace.noise.data() + idx * kG;
          for (std::size_t i = 0; i < kG; ++i) y[i] = (y[i] + g[i]) * inv_tau;
          Softmax(y, w);
          if (options.mode == Mode::kGumbelST) {
            const int k = ArgmaxLowest(y);
            trace.hard_gates[idx] = static_cast<Gate>(k);
            h = kRelaxations[k];
          } else {
            h = MixRelaxations(w);
          }
        }
        ApplyGate(h, in.row(wires.left[n]), in.row(wires.right[n]), out.row(n));
      }
    });
    if (!options.keep_layers) trace.layers.clear();
    trace.layers.push_back(std::move(out));
  }

  const Activations& last = trace.layers.back();
  ClassScores& scores = result.scores;
  scores.batch = batch;
  scores.num_classes = cfg.num_classes;
  scores.values.assign(static_cast<std::size_t>(batch) * cfg.num_classes, 0.0);
  const int group = width / cfg.num_classes;
  std::vector<double> sums(batch);
  for (int c = 0; c < cfg.num_classes; ++c) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int j = c * group; j < (c + 1) * group; ++j) {
      std::span<const double> row = last.row(j);
      for (int s = 0; s < batch; ++s) sums[s] += row[s];
    }
    for (int s = 0; s < batch; ++s) {
      scores.values[static_cast<std::size_t>(s) * cfg.num_classes + c] =
          sums[s] / cfg.groupsum_tau;
    }
  }
  return result;
}

ForwardResult ForwardSoft(const Model& model, const Activations& inputs,
                          int threads) {
  return Forward(model, inputs, {.mode = Mode::kSoftmax, .threads = threads});
}

ForwardResult ForwardGumbelSoft(const Model& model, const Activations& inputs,
                                double tau, const GumbelNoise& noise,
                                int threads) {
  return Forward(model, inputs,
                 {.mode = Mode::kGumbelSoft, .tau = tau, .noise = &noise,
                  .threads = threads});
}

ForwardResult ForwardGumbelSoft(const Model& model, const Activations& inputs,
                                double tau, Rng& rng, int threads) {
  const GumbelNoise noise = SampleGumbelNoise(model, rng);
  return ForwardGumbelSoft(model, inputs, tau, noise, threads);
}

ForwardResult ForwardGumbelHard(const Model& model, const Activations& inputs,
                                double tau, const GumbelNoise& noise,
                                int threads) {
  return Forward(model, inputs,
                 {.mode = Mode::kGumbelST, .tau = tau, .noise = &noise,
                  .threads = threads});
}

ForwardResult ForwardGumbelHard(const Model& model, const Activations& inputs,
                                double tau, Rng& rng, int threads) {
  const GumbelNoise noise = SampleGumbelNoise(model, rng);
  return ForwardGumbelHard(model, inputs, tau, noise, threads);
}

std::vector<double> GroupSum(std::span<const double> activations,
                             int num_classes, double groupsum_tau) {
  if (num_classes < 1 || activations.empty() ||
      activations.size() % num_classes != 0) {
    throw Error(ErrorCode::kShape,
                "GroupSum needs a width divisible by the class count (width " +
                    std::to_string(activations.size()) + ", classes " +
                    std::to_string(num_classes) + ")");
  }
  const std::size_t group = activations.size() / num_classes;
  std::vector<double> scores(num_classes, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    double sum = 0.0;
    for (std::size_t j = c * group; j < (c + 1) * group; ++j) {
      sum += activations[j];
    }
    scores[c] = sum / groupsum_tau;
  }
  return scores;
}

void DiscreteNetlist::Validate() const {
  NetworkConfig cfg{.input_bits = input_bits,
                    .depth = depth,
                    .width = width,
                    .num_classes = num_classes,
                    .groupsum_tau = groupsum_tau};
  try {
    cfg.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kShape, std::string("netlist header: ") + e.what());
  }
  if (static_cast<int>(layers.size()) != depth) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("netlist layers", depth, layers.size()));
  }
  Wiring wiring;
  for (const NetlistLayer& layer : layers) {
    if (static_cast<int>(layer.gates.size()) != width) {
      throw Error(ErrorCode::kShape,
                  ShapeMessage("netlist gates per layer", width,
                               layer.gates.size()));
    }
    wiring.push_back({layer.left, layer.right});
  }
  ValidateWiring(cfg, wiring);
}

DiscreteNetlist Discretize(const Model& model) {
  const NetworkConfig& cfg = model.config();
  DiscreteNetlist net;
  net.input_bits = cfg.input_bits;
  net.depth = cfg.depth;
  net.width = cfg.width;
  net.num_classes = cfg.num_classes;
  net.groupsum_tau = cfg.groupsum_tau;
  net.layers.resize(cfg.depth);
  for (int l = 0; l < cfg.depth; ++l) {
    NetlistLayer& layer = net.layers[l];
    layer.left = model.wiring()[l].left;
    layer.right = model.wiring()[l].right;
    layer.gates.resize(cfg.width);
    for (int n = 0; n < cfg.width; ++n) {
      layer.gates[n] = static_cast<Gate>(ArgmaxLowest(model.neuron_logits(l, n)));
    }
  }
  return net;
}

Model SaturatedModel(const DiscreteNetlist& netlist, double magnitude) {
  netlist.Validate();
  NetworkConfig cfg{.input_bits = netlist.input_bits,
                    .depth = netlist.depth,
                    .width = netlist.width,
                    .num_classes = netlist.num_classes,
                    .groupsum_tau = netlist.groupsum_tau};
  Wiring wiring;
  std::vector<double> logits(static_cast<std::size_t>(cfg.num_neurons()) * kG,
                             0.0);
  for (int l = 0; l < cfg.depth; ++l) {
    const NetlistLayer& layer = netlist.layers[l];
    wiring.push_back({layer.left, layer.right});
    for (int n = 0; n < cfg.width; ++n) {
      const std::size_t idx = static_cast<std::size_t>(l) * cfg.width + n;
      logits[idx * kG + GateIndex(layer.gates[n])] = magnitude;
    }
  }
  return Model(cfg, std::move(wiring), std::move(logits));
}

Prediction NetlistInfer(const DiscreteNetlist& netlist,
                        std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != netlist.input_bits) {
    throw Error(ErrorCode::kShape, ShapeMessage("input feature_bits",
                                                netlist.input_bits, bits.size()));
  }
  std::vector<std::uint8_t> current(bits.begin(), bits.end());
  std::vector<std::uint8_t> next(netlist.width);
  for (const NetlistLayer& layer : netlist.layers) {
    for (int n = 0; n < netlist.width; ++n) {
      next[n] = EvalDiscrete(layer.gates[n], current[layer.left[n]] != 0,
                             current[layer.right[n]] != 0);
    }
    current.swap(next);
    next.resize(netlist.width);
  }
  std::vector<double> active(current.begin(), current.end());
  Prediction p;
  p.scores = GroupSum(active, netlist.num_classes, netlist.groupsum_tau);
  p.predicted_class = ArgmaxLowest(p.scores);
  return p;
}

PackedPrediction NetlistInferBitpacked(
    const DiscreteNetlist& netlist,
    std::span<const std::uint64_t> packed_inputs, int lanes) {
  if (lanes < 1 || lanes > 64) {
    throw Error(ErrorCode::kShape,
                "bit-packed lane count must be in [1, 64], got " +
                    std::to_string(lanes));
  }
  if (static_cast<int>(packed_inputs.size()) != netlist.input_bits) {
    throw Error(ErrorCode::kShape,
                ShapeMessage("packed input words", netlist.input_bits,
                             packed_inputs.size()));
  }
  std::vector<std::uint64_t> current(packed_inputs.begin(), packed_inputs.end());
  std::vector<std::uint64_t> next(netlist.width);
  for (const NetlistLayer& layer : netlist.layers) {
    const Gate* gates = layer.gates.data();
    const std::uint32_t* left = layer.left.data();
    const std::uint32_t* right = layer.right.data();
    for (int n = 0; n < netlist.width; ++n) {
      next[n] = EvalBitpacked(gates[n], current[left[n]], current[right[n]]);
    }
    current.swap(next);
    next.resize(netlist.width);
  }

  const std::uint64_t lane_mask =
      lanes == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << lanes) - 1;
  const int group = netlist.width / netlist.num_classes;
  int planes = 1;
  while ((1 << planes) <= group) ++planes;

  PackedPrediction out;
  out.lanes = lanes;
  out.num_classes = netlist.num_classes;
  out.counts.assign(static_cast<std::size_t>(lanes) * netlist.num_classes, 0);
  std::vector<std::uint64_t> counter(planes);
  for (int c = 0; c < netlist.num_classes; ++c) {
    // Bit-sliced ripple counter: plane p holds bit p of every lane's count.
    std::fill(counter.begin(), counter.end(), 0);
    for (int j = c * group; j < (c + 1) * group; ++j) {
      std::uint64_t carry = current[j] & lane_mask;
      for (int p = 0; carry != 0 && p < planes; ++p) {
        const std::uint64_t sum = counter[p] ^ carry;
        carry &= counter[p];
        counter[p] = sum;
      }
    }
    for (int lane = 0; lane < lanes; ++lane) {
      int count = 0;
      for (int p = 0; p < planes; ++p) {
        count |= static_cast<int>((counter[p] >> lane) & 1) << p;
      }
      out.counts[static_cast<std::size_t>(lane) * netlist.num_classes + c] =
          count;
    }
  }
  out.predicted.resize(lanes);
  for (int lane = 0; lane < lanes; ++lane) {
    std::span<const int> counts = out.lane_counts(lane);
    int best = 0;
    for (int c = 1; c < netlist.num_classes; ++c) {
      if (counts[c] > counts[best]) best = c;
    }
    out.predicted[lane] = best;
  }
  return out;
}

std::vector<std::uint64_t> PackSamples(
    std::span<const std::span<const std::uint8_t>> samples, int input_bits) {
  if (samples.size() > 64) {
    throw Error(ErrorCode::kShape, "at most 64 samples fit in one word");
  }
  std::vector<std::uint64_t> words(input_bits, 0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (static_cast<int>(samples[k].size()) != input_bits) {
      throw Error(ErrorCode::kShape, ShapeMessage("input feature_bits",
                                                  input_bits, samples[k].size()));
    }
    for (int i = 0; i < input_bits; ++i) {
      if (samples[k][i] != 0) words[i] |= std::uint64_t{1} << k;
    }
  }
  return words;
}

}  // namespace lgn
