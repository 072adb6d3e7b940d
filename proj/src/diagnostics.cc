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

#include "lgn/diagnostics.h"

#include <algorithm>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "lgn/error.h"
#include "lgn/parallel.h"
#include "lgn/random.h"
#include "lgn/softmax.h"

namespace lgn {
namespace {

using nlohmann::json;

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

void Scale(std::span<double> a, double c) {
  for (double& v : a) v *= c;
}

void CheckFinite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNumeric, std::string("non-finite ") + what);
    }
  }
}

void CheckDimension(const Objective& objective, std::size_t n) {
  if (n != objective.dimension()) {
    throw Error(ErrorCode::kShape,
                "vector length " + std::to_string(n) +
                    " does not match objective dimension " +
                    std::to_string(objective.dimension()));
  }
}

std::vector<double> GaussianDirection(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> d(n);
  for (double& v : d) v = rng.Normal();
  return d;
}

json HistogramJson(const Histogram& h) {
  return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

}  // namespace

double NeuronEntropy(std::span<const double> logits) {
  std::array<double, kNumGates> logp;
  LogSoftmax(logits, logp);
  double h = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    h -= std::exp(logp[i]) * logp[i];
  }
  return std::max(h, 0.0);
}

std::vector<double> SampleInitEntropies(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(std::max(count, 0));
  std::array<double, kNumGates> z;
  for (double& h : out) {
    for (double& v : z) v = rng.Normal();
    h = NeuronEntropy(z);
  }
  return out;
}

double Percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw Error(ErrorCode::kParameter, "percentile of nothing");
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw Error(ErrorCode::kParameter, "percentile must lie in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double rank = percentile / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Histogram MakeHistogram(std::span<const double> values, double lo, double hi,
                        int bins) {
  Histogram h{lo, hi, std::vector<int>(std::max(bins, 1), 0)};
  const double width = (hi - lo) / h.counts.size();
  for (double v : values) {
    int b = static_cast<int>(std::floor((v - lo) / width));
    b = std::clamp(b, 0, static_cast<int>(h.counts.size()) - 1);
    ++h.counts[b];
  }
  return h;
}

EntropyReport ComputeEntropyReport(const Model& model,
                                   const EntropyOptions& options) {
  if (options.init_samples < 1) {
    throw Error(ErrorCode::kParameter, "init_samples must be >= 1");
  }
  EntropyReport r;
  r.percentile = options.percentile;
  r.init_samples = options.init_samples;
  const std::vector<double> init =
      SampleInitEntropies(options.init_samples, options.seed);
  r.init_mean_entropy =
      std::accumulate(init.begin(), init.end(), 0.0) / init.size();
  r.init_interval_low = Percentile(init, 2.5);
  r.init_interval_high = Percentile(init, 97.5);
  r.threshold = Percentile(init, options.percentile);

  const NetworkConfig& cfg = model.config();
  std::size_t unused_total = 0;
  std::vector<double> layer(cfg.width);
  for (int l = 0; l < cfg.depth; ++l) {
    std::size_t unused = 0;
    for (int n = 0; n < cfg.width; ++n) {
      layer[n] = NeuronEntropy(model.neuron_logits(l, n));
      if (layer[n] > r.threshold) ++unused;
    }
    unused_total += unused;
    r.mean_entropy_per_layer.push_back(
        std::accumulate(layer.begin(), layer.end(), 0.0) / cfg.width);
    r.unused_fraction_per_layer.push_back(static_cast<double>(unused) /
                                          cfg.width);
    r.layer_histograms.push_back(
        MakeHistogram(layer, 0.0, kMaxGateEntropy, options.bins));
  }
  r.unused_fraction =
      static_cast<double>(unused_total) / static_cast<double>(model.num_neurons());
  return r;
}

std::string EntropyReportJson(const EntropyReport& r) {
  json doc;
  doc["expected_init_entropy"] = r.expected_init_entropy;
  doc["init_mean_entropy"] = r.init_mean_entropy;
  doc["init_interval_95"] = {r.init_interval_low, r.init_interval_high};
  doc["percentile"] = r.percentile;
  doc["threshold"] = r.threshold;
  doc["init_samples"] = r.init_samples;
  doc["mean_entropy_per_layer"] = r.mean_entropy_per_layer;
  doc["unused_fraction_per_layer"] = r.unused_fraction_per_layer;
  doc["unused_fraction"] = r.unused_fraction;
  json hists = json::array();
  for (const Histogram& h : r.layer_histograms) hists.push_back(HistogramJson(h));
  doc["layer_histograms"] = std::move(hists);
  return doc.dump(2) + "\n";
}

GateHistogram ComputeGateHistogram(const DiscreteNetlist& netlist) {
  netlist.Validate();
  GateHistogram h;
  for (const NetlistLayer& layer : netlist.layers) {
    GateCounts counts{};
    for (Gate g : layer.gates) ++counts[GateIndex(g)];
    h.per_layer.push_back(counts);
  }
  const int group = netlist.width / netlist.num_classes;
  h.per_class.assign(netlist.num_classes, GateCounts{});
  const NetlistLayer& last = netlist.layers.back();
  for (int n = 0; n < netlist.width; ++n) {
    ++h.per_class[n / group][GateIndex(last.gates[n])];
  }
  return h;
}

namespace {

std::string CountsCsv(const char* key, const std::vector<GateCounts>& rows) {
  std::ostringstream out;
  out << key << ",gate_id,count\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int g = 0; g < kNumGates; ++g) {
      out << r << ',' << g << ',' << rows[r][g] << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string GateHistogramCsv(const GateHistogram& h) {
  return CountsCsv("layer", h.per_layer);
}

std::string ClassGateHistogramCsv(const GateHistogram& h) {
  return CountsCsv("class", h.per_class);
}

QuadraticObjective::QuadraticObjective(std::vector<double> a,
                                       std::vector<double> b)
    : n_(static_cast<std::size_t>(std::llround(std::sqrt(a.size())))),
      a_(std::move(a)),
      b_(std::move(b)) {
  if (n_ * n_ != a_.size() || n_ == 0) {
    throw Error(ErrorCode::kShape, "quadratic form needs a square matrix");
  }
  if (b_.empty()) b_.assign(n_, 0.0);
  if (b_.size() != n_) throw Error(ErrorCode::kShape, "linear term length");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (a_[i * n_ + j] != a_[j * n_ + i]) {
        throw Error(ErrorCode::kParameter, "quadratic form must be symmetric");
      }
    }
  }
}

std::vector<double> QuadraticObjective::Apply(std::span<const double> v) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = Dot(std::span<const double>(a_).subspan(i * n_, n_), v);
  }
  return out;
}

double QuadraticObjective::Value(std::span<const double> theta) const {
  return 0.5 * Dot(theta, Apply(theta)) + Dot(b_, theta);
}

std::vector<double> QuadraticObjective::Gradient(
    std::span<const double> theta) const {
  std::vector<double> g = Apply(theta);
  for (std::size_t i = 0; i < n_; ++i) g[i] += b_[i];
  return g;
}

double QuadraticObjective::Trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
  return t;
}

BatchLossObjective::BatchLossObjective(Model model, Activations inputs,
                                       std::vector<int> labels, Mode mode,
                                       double tau, int threads)
    : model_(std::move(model)),
      inputs_(std::move(inputs)),
      labels_(std::move(labels)) {
  forward_.mode = mode == Mode::kSoftmax ? Mode::kSoftmax : Mode::kGumbelSoft;
  forward_.tau = tau;
  forward_.threads = threads;
  if (static_cast<int>(labels_.size()) != inputs_.cols) {
    throw Error(ErrorCode::kShape, "one label per batch column required");
  }
}

Model BatchLossObjective::WithLogits(std::span<const double> theta) const {
  if (theta.size() != model_.num_parameters()) {
    throw Error(ErrorCode::kShape, "parameter vector length mismatch");
  }
  return Model(model_.config(), model_.wiring(),
               std::vector<double>(theta.begin(), theta.end()));
}

double BatchLossObjective::Value(std::span<const double> theta) const {
  ForwardOptions opts = forward_;
  opts.keep_layers = false;
  const ForwardResult f = Forward(WithLogits(theta), inputs_, opts);
  return MeanCrossEntropy(f.scores, labels_).loss;
}

std::vector<double> BatchLossObjective::Gradient(
    std::span<const double> theta) const {
  const Model m = WithLogits(theta);
  const ForwardResult f = Forward(m, inputs_, forward_);
  const BatchLoss bl = MeanCrossEntropy(f.scores, labels_);
  return Backward(m, f.trace, bl.grad, forward_.mode, forward_.tau,
                  {.threads = forward_.threads});
}

BatchLossObjective MakeBatchObjective(const Model& model, const Dataset& data,
                                      int batch_size, Mode mode, double tau,
                                      int threads) {
  if (data.empty()) throw Error(ErrorCode::kConfig, "empty evaluation batch");
  const int n = std::min<int>(std::max(batch_size, 1), data.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> labels(data.labels.begin(), data.labels.begin() + n);
  return BatchLossObjective(model, GatherInputs(data, idx), std::move(labels),
                            mode, tau, threads);
}

std::vector<double> Hvp(const Objective& objective,
                        std::span<const double> theta,
                        std::span<const double> v) {
  CheckDimension(objective, theta.size());
  CheckDimension(objective, v.size());
  CheckFinite(v, "HVP direction");
  const double norm = Norm(v);
  if (norm == 0.0) return std::vector<double>(v.size(), 0.0);
  const double eps = kHvpEpsilon / norm;
  std::vector<double> plus(theta.begin(), theta.end());
  std::vector<double> minus(theta.begin(), theta.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    plus[i] += eps * v[i];
    minus[i] -= eps * v[i];
  }
  std::vector<double> out = objective.Gradient(plus);
  const std::vector<double> g_minus = objective.Gradient(minus);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (out[i] - g_minus[i]) / (2.0 * eps);
  }
  CheckFinite(out, "Hessian-vector product");
  return out;
}

CurvatureReport HutchinsonTrace(const Objective& objective,
                                std::span<const double> theta, int probes,
                                std::uint64_t seed, int threads) {
  if (probes < 1) throw Error(ErrorCode::kParameter, "probe count must be >= 1");
  CheckDimension(objective, theta.size());
  CurvatureReport r;
  r.probes = probes;
  r.per_probe.assign(probes, 0.0);
  ParallelFor(probes, threads, [&](int begin, int end) {
    std::vector<double> v(theta.size());
    for (int i = begin; i < end; ++i) {
      Rng rng(DeriveSeed(seed, i));
      for (double& x : v) x = rng.Rademacher();
      r.per_probe[i] = Dot(v, Hvp(objective, theta, v));
    }
  });
  double sum = 0.0;
  for (double q : r.per_probe) sum += q;
  r.trace_estimate = sum / probes;
  if (probes > 1) {
    double sq = 0.0;
    for (double q : r.per_probe) sq += (q - r.trace_estimate) * (q - r.trace_estimate);
    r.standard_error = std::sqrt(sq / (probes - 1) / probes);
  }
  return r;
}

double PowerIterationTopEigenvalue(const Objective& objective,
                                   std::span<const double> theta,
                                   int iterations, std::uint64_t seed) {
  if (iterations < 1) {
    throw Error(ErrorCode::kParameter, "power iteration needs >= 1 iteration");
  }
  CheckDimension(objective, theta.size());
  std::vector<double> v = GaussianDirection(theta.size(), seed);
  Scale(v, 1.0 / Norm(v));
  double rayleigh = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> w = Hvp(objective, theta, v);
    rayleigh = Dot(v, w);
    const double norm = Norm(w);
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::kNumeric,
                  "power iteration collapsed to the zero vector at iteration " +
                      std::to_string(it + 1));
    }
    Scale(w, 1.0 / norm);
    v = std::move(w);
  }
  return rayleigh;
}

std::string CurvatureReportJson(const CurvatureReport& r) {
  json doc;
  doc["trace_estimate"] = r.trace_estimate;
  doc["probes"] = r.probes;
  doc["standard_error"] = r.standard_error;
  doc["per_probe"] = r.per_probe;
  if (r.top_eigenvalue) {
    doc["top_eigenvalue"] = *r.top_eigenvalue;
    doc["eigen_iterations"] = r.eigen_iterations;
  }
  return doc.dump(2) + "\n";
}

LandscapeGrid ComputeLandscape(const Objective& objective,
                               std::span<const double> theta,
                               const LandscapeOptions& options) {
  if (options.resolution < 2) {
    throw Error(ErrorCode::kParameter, "landscape resolution must be >= 2");
  }
  if (!(options.radius > 0.0)) {
    throw Error(ErrorCode::kParameter, "landscape radius must be positive");
  }
  CheckDimension(objective, theta.size());
  const std::size_t n = theta.size();
  LandscapeGrid g;
  g.resolution = options.resolution;
  g.radius = options.radius;
  g.seed = options.seed;

  g.d1 = GaussianDirection(n, DeriveSeed(options.seed, 0));
  Scale(g.d1, 1.0 / Norm(g.d1));
  for (std::uint64_t attempt = 1;; ++attempt) {
    g.d2 = GaussianDirection(n, DeriveSeed(options.seed, attempt));
    Scale(g.d2, 1.0 / Norm(g.d2));
    const double overlap = Dot(g.d1, g.d2);
    for (std::size_t i = 0; i < n; ++i) g.d2[i] -= overlap * g.d1[i];
    const double norm = Norm(g.d2);
    if (norm > 1e-8) {
      Scale(g.d2, 1.0 / norm);
      // One more pass removes the rounding left by the first projection.
      const double residue = Dot(g.d1, g.d2);
      for (std::size_t i = 0; i < n; ++i) g.d2[i] -= residue * g.d1[i];
      break;
    }
    std::cerr << "warning: landscape directions nearly collinear, resampling\n";
  }

  const int res = options.resolution;
  g.coords.resize(res);
  for (int i = 0; i < res; ++i) {
    g.coords[i] = options.radius * (2.0 * i - (res - 1)) / (res - 1);
  }
  g.loss.assign(static_cast<std::size_t>(res) * res, 0.0);
  ParallelFor(res * res, options.threads, [&](int begin, int end) {
    std::vector<double> point(n);
    for (int k = begin; k < end; ++k) {
      const double alpha = g.coords[k / res];
      const double beta = g.coords[k % res];
      for (std::size_t i = 0; i < n; ++i) {
        point[i] = theta[i] + alpha * g.d1[i] + beta * g.d2[i];
      }
      g.loss[k] = objective.Value(point);
    }
  });
  return g;
}

std::string LandscapeCsv(const LandscapeGrid& g) {
  std::ostringstream out;
  out.precision(17);
  out << "alpha,beta,loss\n";
  for (int i = 0; i < g.resolution; ++i) {
    for (int j = 0; j < g.resolution; ++j) {
      out << g.coords[i] << ',' << g.coords[j] << ',' << g.at(i, j) << '\n';
    }
  }
  return out.str();
}

SmoothingCheck GumbelSmoothingCheck(const SimplexLoss& loss,
                                    std::span<const double> z, double tau,
                                    std::int64_t samples, std::uint64_t seed) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kParameter, "tau must be positive");
  }
  if (samples < 2) throw Error(ErrorCode::kParameter, "need >= 2 samples");
  if (z.size() != kNumGates) {
    throw Error(ErrorCode::kShape, "smoothing check works on 16 logits");
  }
  std::array<double, kNumGates> a, p;
  auto f = [&](std::span<const double> x) {
    Softmax(x, p);
    return loss(p);
  };

  SmoothingCheck c;
  for (int i = 0; i < kNumGates; ++i) a[i] = z[i] / tau;
  c.base_loss = f(a);
  const double h = 1e-4;
  for (int i = 0; i < kNumGates; ++i) {
    std::array<double, kNumGates> up = a, down = a;
    up[i] += h;
    down[i] -= h;
    c.hessian_trace += (f(up) - 2.0 * c.base_loss + f(down)) / (h * h);
  }
  c.curvature_term =
      std::numbers::pi * std::numbers::pi / (12.0 * tau * tau) * c.hessian_trace;
  c.analytic_rhs = c.base_loss + c.curvature_term;

  Rng rng(seed);
  std::array<double, kNumGates> y;
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < kNumGates; ++i) y[i] = (z[i] + rng.Gumbel()) / tau;
    const double v = f(y);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  c.monte_carlo_j = mean;
  c.standard_error =
      std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  c.residual = std::abs(c.monte_carlo_j - c.analytic_rhs);
  return c;
}

std::string SmoothingCheckJson(const SmoothingCheck& c, double tau) {
  json doc;
  doc["tau"] = tau;
  doc["monte_carlo_j"] = c.monte_carlo_j;
  doc["standard_error"] = c.standard_error;
  doc["base_loss"] = c.base_loss;
  doc["hessian_trace"] = c.hessian_trace;
  doc["curvature_term"] = c.curvature_term;
  doc["analytic_rhs"] = c.analytic_rhs;
  doc["residual"] = c.residual;
  doc["residual_times_tau_cubed"] = c.residual * tau * tau * tau;
  return doc.dump(2) + "\n";
}

GapReport DiscretizationGap(const Model& model, const Dataset& eval, Mode mode,
                            double tau, int threads) {
  if (eval.empty()) {
    throw Error(ErrorCode::kConfig, "discretization gap needs a nonempty eval set");
  }
  GapReport r;
  r.soft_accuracy = SoftAccuracy(model, eval, mode, tau, threads);
  r.discrete_accuracy = DiscreteAccuracy(Discretize(model), eval);
  r.gap = std::abs(r.soft_accuracy - r.discrete_accuracy);
  return r;
}

std::vector<std::size_t> MonotoneAccuracyCheckpoints(
    std::span<const double> accuracies) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    if (kept.empty() || accuracies[i] > accuracies[kept.back()]) {
      kept.push_back(i);
    }
  }
  return kept;
}

}  // namespace lgn
