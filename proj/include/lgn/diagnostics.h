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

#ifndef LGN_DIAGNOSTICS_H_
#define LGN_DIAGNOSTICS_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgn/data.h"
#include "lgn/network.h"
#include "lgn/training.h"

namespace lgn {

// ---------------------------------------------------------------------------
// Entropy

// Shannon entropy (nats) of softmax(logits).
double NeuronEntropy(std::span<const double> logits);

inline const double kMaxGateEntropy = std::log(16.0);
// Large-n asymptote of E[H(softmax(z))] for z ~ N(0, I_n), evaluated at n=16.
inline const double kAsymptoticInitEntropy = std::log(16.0) - 0.5;

// Entropies of `count` fresh N(0,1)^16 neurons drawn from Rng(seed).
std::vector<double> SampleInitEntropies(int count, std::uint64_t seed);

// Percentile (0..100) with linear interpolation between order statistics.
double Percentile(std::vector<double> values, double percentile);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<int> counts;
};

Histogram MakeHistogram(std::span<const double> values, double lo, double hi,
                        int bins);

struct EntropyOptions {
  int init_samples = 100000;
  double percentile = 2.5;
  std::uint64_t seed = 0;
  int bins = 32;
};

struct EntropyReport {
  double expected_init_entropy = kAsymptoticInitEntropy;
  double init_mean_entropy = 0.0;
  double init_interval_low = 0.0;   // 2.5th percentile
  double init_interval_high = 0.0;  // 97.5th percentile
  double percentile = 2.5;
  double threshold = 0.0;
  int init_samples = 0;
  std::vector<double> mean_entropy_per_layer;
  std::vector<double> unused_fraction_per_layer;
  double unused_fraction = 0.0;
  std::vector<Histogram> layer_histograms;
};

// A neuron counts as unused when its entropy exceeds the given percentile of
// the fresh-initialization entropy distribution.
EntropyReport ComputeEntropyReport(const Model& model,
                                   const EntropyOptions& options = {});

std::string EntropyReportJson(const EntropyReport& report);

// ---------------------------------------------------------------------------
// Gate histograms

using GateCounts = std::array<int, kNumGates>;

struct GateHistogram {
  std::vector<GateCounts> per_layer;
  // Final layer only, one entry per class group.
  std::vector<GateCounts> per_class;
};

GateHistogram ComputeGateHistogram(const DiscreteNetlist& netlist);

// Columns: layer,gate_id,count (16 rows per layer).
std::string GateHistogramCsv(const GateHistogram& histogram);
// Columns: class,gate_id,count.
std::string ClassGateHistogramCsv(const GateHistogram& histogram);

// ---------------------------------------------------------------------------
// Curvature

// A twice-differentiable scalar objective with an analytic gradient.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double Value(std::span<const double> theta) const = 0;
  virtual std::vector<double> Gradient(std::span<const double> theta) const = 0;
};

// L(theta) = 1/2 theta^T A theta + b^T theta with a dense symmetric A.
class QuadraticObjective : public Objective {
 public:
  // `a` is row-major n x n; `b` may be empty (zero).
  QuadraticObjective(std::vector<double> a, std::vector<double> b = {});

  std::size_t dimension() const override { return n_; }
  double Value(std::span<const double> theta) const override;
  std::vector<double> Gradient(std::span<const double> theta) const override;

  double Trace() const;
  std::vector<double> Apply(std::span<const double> v) const;

 private:
  std::size_t n_;
  std::vector<double> a_;
  std::vector<double> b_;
};

// Mean cross-entropy of a fixed batch under the deterministic soft forward
// (softmax, or softmax(z / tau) for the Gumbel modes), as a function of the
// model logits.
class BatchLossObjective : public Objective {
 public:
  BatchLossObjective(Model model, Activations inputs, std::vector<int> labels,
                     Mode mode = Mode::kSoftmax, double tau = 1.0,
                     int threads = 1);

  std::size_t dimension() const override { return model_.num_parameters(); }
  double Value(std::span<const double> theta) const override;
  std::vector<double> Gradient(std::span<const double> theta) const override;

  const Model& model() const { return model_; }

 private:
  Model WithLogits(std::span<const double> theta) const;

  Model model_;
  Activations inputs_;
  std::vector<int> labels_;
  ForwardOptions forward_;
};

// Builds the objective on the first `batch_size` samples of `data`.
BatchLossObjective MakeBatchObjective(const Model& model, const Dataset& data,
                                      int batch_size, Mode mode, double tau,
                                      int threads = 1);

inline constexpr double kHvpEpsilon = 1e-3;

// (grad(theta + e v) - grad(theta - e v)) / (2 e) with e = kHvpEpsilon/|v|.
// Throws Error(kNumeric) on non-finite intermediates.
std::vector<double> Hvp(const Objective& objective,
                        std::span<const double> theta,
                        std::span<const double> v);

struct CurvatureReport {
  double trace_estimate = 0.0;
  int probes = 0;
  std::vector<double> per_probe;
  double standard_error = 0.0;
  std::optional<double> top_eigenvalue;
  int eigen_iterations = 0;
};

// Hutchinson estimate with Rademacher probes; probe i is drawn from
// Rng(DeriveSeed(seed, i)), so results do not depend on `threads`.
CurvatureReport HutchinsonTrace(const Objective& objective,
                                std::span<const double> theta, int probes,
                                std::uint64_t seed, int threads = 1);

// Power iteration on v -> Hv from a N(0, I) start. Returns the final Rayleigh
// quotient, which converges to the eigenvalue of largest magnitude.
double PowerIterationTopEigenvalue(const Objective& objective,
                                   std::span<const double> theta,
                                   int iterations, std::uint64_t seed);

std::string CurvatureReportJson(const CurvatureReport& report);

// ---------------------------------------------------------------------------
// Loss landscape

struct LandscapeOptions {
  int resolution = 21;
  double radius = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct LandscapeGrid {
  int resolution = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> coords;  // shared by alpha and beta
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<double> loss;    // [alpha index][beta index]

  double at(int i, int j) const {
    return loss[static_cast<std::size_t>(i) * resolution + j];
  }
};

// Loss on theta + alpha d1 + beta d2 over [-radius, radius]^2. d1, d2 are
// unit-normalized Gaussian directions, d2 is then orthogonalized against d1
// and renormalized.
LandscapeGrid ComputeLandscape(const Objective& objective,
                               std::span<const double> theta,
                               const LandscapeOptions& options = {});

// Columns: alpha,beta,loss.
std::string LandscapeCsv(const LandscapeGrid& grid);

// ---------------------------------------------------------------------------
// Gumbel smoothing

using SimplexLoss = std::function<double(std::span<const double> p)>;

struct SmoothingCheck {
  double monte_carlo_j = 0.0;
  double standard_error = 0.0;
  double base_loss = 0.0;       // L(softmax(z / tau))
  double hessian_trace = 0.0;   // tr H_f at z / tau, f = L o softmax
  double curvature_term = 0.0;  // pi^2 / (12 tau^2) * hessian_trace
  double analytic_rhs = 0.0;    // base_loss + curvature_term
  double residual = 0.0;        // |monte_carlo_j - analytic_rhs|
};

// Compares E_g[L(softmax((z + g) / tau))], g ~ Gumbel(0,1)^16, with its
// second-order expansion in 1/tau. Throws Error(kParameter) for tau <= 0.
SmoothingCheck GumbelSmoothingCheck(const SimplexLoss& loss,
                                    std::span<const double> z, double tau,
                                    std::int64_t samples, std::uint64_t seed);

std::string SmoothingCheckJson(const SmoothingCheck& check, double tau);

// ---------------------------------------------------------------------------
// Discretization gap and checkpoint selection

struct GapReport {
  double soft_accuracy = 0.0;
  double discrete_accuracy = 0.0;
  double gap = 0.0;
};

// Throws Error(kConfig) for an empty eval set.
GapReport DiscretizationGap(const Model& model, const Dataset& eval,
                            Mode mode = Mode::kSoftmax, double tau = 1.0,
                            int threads = 1);

// Indices of checkpoints whose accuracy beats every earlier kept one.
std::vector<std::size_t> MonotoneAccuracyCheckpoints(
    std::span<const double> accuracies);

}  // namespace lgn

#endif  // LGN_DIAGNOSTICS_H_
