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

#ifndef LGN_NETWORK_H_
#define LGN_NETWORK_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgn/gates.h"
#include "lgn/random.h"

namespace lgn {

struct NetworkConfig {
  int input_bits = 0;
  int depth = 1;
  int width = 0;
  int num_classes = 2;
  // Scores are s_i = (sum of group i) / groupsum_tau.
  double groupsum_tau = 100.0;
  std::uint64_t wiring_seed = 0;
  std::uint64_t init_seed = 1;

  // Throws Error(kConfig) on an unusable shape.
  void Validate() const;

  // Number of values feeding layer `layer`.
  int LayerInputs(int layer) const { return layer == 0 ? input_bits : width; }
  int num_neurons() const { return depth * width; }

  bool operator==(const NetworkConfig&) const = default;
};

// Input indices of every neuron of one layer, into the previous layer's
// outputs (or the input bits for layer 0).
struct LayerWiring {
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;

  bool operator==(const LayerWiring&) const = default;
};

using Wiring = std::vector<LayerWiring>;

// Uniform with replacement, independently per neuron and input slot,
// driven only by config.wiring_seed.
Wiring SampleWiring(const NetworkConfig& config);

// Throws Error(kShape) if the wiring does not fit the config.
void ValidateWiring(const NetworkConfig& config, const Wiring& wiring);

// A layered network: 16 gate logits per neuron, laid out
// [layer][neuron][gate], plus fixed wiring and a GroupSum head.
class Model {
 public:
  Model(NetworkConfig config, Wiring wiring, std::vector<double> logits);

  const NetworkConfig& config() const { return config_; }
  const Wiring& wiring() const { return wiring_; }

  std::span<const double> logits() const { return logits_; }
  std::span<double> mutable_logits() { return logits_; }

  std::span<const double> neuron_logits(int layer, int neuron) const {
    return std::span<const double>(logits_).subspan(
        (static_cast<std::size_t>(layer) * config_.width + neuron) *
            kNumGates,
        kNumGates);
  }

  int num_neurons() const { return config_.num_neurons(); }
  std::size_t num_parameters() const { return logits_.size(); }

  bool operator==(const Model&) const = default;

 private:
  NetworkConfig config_;
  Wiring wiring_;
  std::vector<double> logits_;
};

// Samples wiring from config.wiring_seed and i.i.d. N(0,1) logits from
// config.init_seed.
Model InitModel(const NetworkConfig& config);

// Dense row-major matrix with one row per feature (or neuron) and one
// column per sample, so that a neuron's whole batch is contiguous.
struct Activations {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Activations() = default;
  Activations(int rows, int cols)
      : rows(rows), cols(cols),
        data(static_cast<std::size_t>(rows) * cols, 0.0) {}

  std::span<double> row(int r) {
    return std::span<double>(data).subspan(static_cast<std::size_t>(r) * cols,
                                           cols);
  }
  std::span<const double> row(int r) const {
    return std::span<const double>(data).subspan(
        static_cast<std::size_t>(r) * cols, cols);
  }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
};

// A single sample as a one-column matrix.
Activations SingleSample(std::span<const double> features);

// Per-sample class scores, laid out [sample][class].
struct ClassScores {
  int batch = 0;
  int num_classes = 0;
  std::vector<double> values;

  std::span<const double> sample(int s) const {
    return std::span<const double>(values).subspan(
        static_cast<std::size_t>(s) * num_classes, num_classes);
  }
  std::span<double> sample(int s) {
    return std::span<double>(values).subspan(
        static_cast<std::size_t>(s) * num_classes, num_classes);
  }
};

enum class Mode { kSoftmax, kGumbelSoft, kGumbelST };

std::string_view ModeName(Mode mode);
// Accepts "softmax", "gumbel_soft", "gumbel_st". Throws Error(kConfig).
Mode ParseMode(std::string_view name);

// One Gumbel(0,1) 16-vector per neuron, laid out like the logits.
using GumbelNoise = std::vector<double>;

GumbelNoise SampleGumbelNoise(const Model& model, Rng& rng);

// Everything the backward pass needs from a forward pass.
struct ForwardTrace {
  Mode mode = Mode::kSoftmax;
  double tau = 1.0;
  // layers[0] holds the inputs, layers[l + 1] the outputs of layer l.
  std::vector<Activations> layers;
  // Per neuron, the 16 gate weights used: softmax(z) for kSoftmax and the
  // Gumbel-softmax vector for the Gumbel modes.
  std::vector<double> gate_weights;
  // kGumbelST only: the gate with the largest perturbed logit per neuron.
  std::vector<Gate> hard_gates;
  // Gumbel modes: the noise that produced gate_weights.
  GumbelNoise noise;

  int batch() const { return layers.empty() ? 0 : layers.front().cols; }
};

struct ForwardResult {
  ClassScores scores;
  ForwardTrace trace;
};

struct ForwardOptions {
  Mode mode = Mode::kSoftmax;
  double tau = 1.0;
  // Gumbel modes only. Null means zero noise (the deterministic tempered
  // forward softmax(z / tau)).
  const GumbelNoise* noise = nullptr;
  int threads = 1;
  // When false only the output layer is retained in the trace.
  bool keep_layers = true;
};

// Throws Error(kShape) if inputs.rows != input_bits, Error(kParameter) if
// tau <= 0 in a Gumbel mode, Error(kDomain) for soft-mode inputs outside
// [0,1].
ForwardResult Forward(const Model& model, const Activations& inputs,
                      const ForwardOptions& options);

// Each neuron outputs sum_i softmax(z)_i h_i(a, b).
ForwardResult ForwardSoft(const Model& model, const Activations& inputs,
                          int threads = 1);

// Each neuron outputs sum_i pi^G_i h_i(a, b) with
// pi^G = softmax((log softmax(z) + g) / tau).
ForwardResult ForwardGumbelSoft(const Model& model, const Activations& inputs,
                                double tau, const GumbelNoise& noise,
                                int threads = 1);
ForwardResult ForwardGumbelSoft(const Model& model, const Activations& inputs,
                                double tau, Rng& rng, int threads = 1);

// Each neuron outputs h_k(a, b) for k = argmax_j(log softmax(z)_j + g_j).
// The trace also keeps pi^G for the straight-through backward pass.
ForwardResult ForwardGumbelHard(const Model& model, const Activations& inputs,
                                double tau, const GumbelNoise& noise,
                                int threads = 1);
ForwardResult ForwardGumbelHard(const Model& model, const Activations& inputs,
                                double tau, Rng& rng, int threads = 1);

// s_i = (sum_{j in G_i} a_j) / tau with G_i the i-th contiguous block of
// width / num_classes neurons. Throws Error(kShape) on a partition mismatch.
std::vector<double> GroupSum(std::span<const double> activations,
                             int num_classes, double groupsum_tau);

// Index of the largest value; ties go to the lowest index.
int ArgmaxLowest(std::span<const double> values);

struct NetlistLayer {
  std::vector<Gate> gates;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;

  bool operator==(const NetlistLayer&) const = default;
};

// A discretized network: one gate and two input indices per neuron.
struct DiscreteNetlist {
  int input_bits = 0;
  int depth = 0;
  int width = 0;
  int num_classes = 0;
  double groupsum_tau = 1.0;
  std::vector<NetlistLayer> layers;

  // Throws Error(kShape) on inconsistent sizes or out-of-range indices.
  void Validate() const;

  bool operator==(const DiscreteNetlist&) const = default;
};

// Per neuron, the argmax gate of its logits (lowest index on ties).
DiscreteNetlist Discretize(const Model& model);

// A model whose logits are `magnitude` at the netlist's gate and 0
// elsewhere, so its soft forward saturates onto the netlist.
Model SaturatedModel(const DiscreteNetlist& netlist, double magnitude = 50.0);

struct Prediction {
  int predicted_class = 0;
  std::vector<double> scores;
};

// Throws Error(kShape) if bits.size() != input_bits.
Prediction NetlistInfer(const DiscreteNetlist& netlist,
                        std::span<const std::uint8_t> bits);

// Lane-parallel inference over up to 64 samples.
struct PackedPrediction {
  int lanes = 0;
  int num_classes = 0;
  // Number of active neurons per class, laid out [lane][class]; the score is
  // count / groupsum_tau.
  std::vector<int> counts;
  std::vector<int> predicted;

  std::span<const int> lane_counts(int lane) const {
    return std::span<const int>(counts).subspan(
        static_cast<std::size_t>(lane) * num_classes, num_classes);
  }
};

// packed_inputs holds one word per input bit; bit k of word i is input bit i
// of sample k. Throws Error(kShape) if the word count is wrong or lanes is
// not in [1, 64].
PackedPrediction NetlistInferBitpacked(
    const DiscreteNetlist& netlist,
    std::span<const std::uint64_t> packed_inputs, int lanes);

// Packs up to 64 samples (each a row of input_bits bytes in {0,1}) into one
// word per input bit.
std::vector<std::uint64_t> PackSamples(
    std::span<const std::span<const std::uint8_t>> samples, int input_bits);

inline constexpr int kNetlistFormatVersion = 1;

std::string NetlistToJson(const DiscreteNetlist& netlist);
// Throws Error(kFormat) on malformed or inconsistent documents.
DiscreteNetlist NetlistFromJson(std::string_view text);

void SaveNetlist(const DiscreteNetlist& netlist, const std::string& path);
DiscreteNetlist LoadNetlist(const std::string& path);

}  // namespace lgn

#endif  // LGN_NETWORK_H_
