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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.
//
//   acceptance                 all criteria
//   acceptance --criterion 9   a single criterion
//
// Criteria 9 and 10 train two MNIST networks (LGN_MNIST_DIR, default
// /root/data/mnist). Runs are kept under LGN_ACCEPTANCE_DIR and resumed from
// their newest checkpoint, so an interrupted run continues where it stopped
// and a finished run is reused.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "gradient_oracle.h"
#include "lgn/cli.h"
#include "lgn/diagnostics.h"
#include "lgn/error.h"
#include "test_util.h"

namespace lgn {
namespace {

namespace fs = std::filesystem;

// Tolerances and sizes.
constexpr double kGateRuntimeSeconds = 1.0;
constexpr int kGateInteriorPoints = 10000;
constexpr int kGradientSeeds = 20;
constexpr double kGradientRelError = 1e-4;
constexpr double kGradientRuntimeSeconds = 60.0;
constexpr double kTranslationTolerance = 1e-12;
constexpr int kEntropySamples = 100000;
constexpr double kEntropyTolerance = 0.01;
constexpr int kGumbelSamples = 1000000;
constexpr double kGumbelMeanTolerance = 0.005;
constexpr double kGumbelVarianceTolerance = 0.02;
constexpr std::int64_t kLemmaSamples = 1000000;
constexpr double kLemmaTau3Bound = 0.5;
constexpr double kLemmaStandardErrors = 3.0;
constexpr double kLemmaRuntimeSeconds = 300.0;
constexpr int kHutchinsonProbes = 200;
constexpr int kHutchinsonSeeds = 20;
constexpr double kHutchinsonStandardErrors = 3.0;
constexpr double kDiagonalTolerance = 1e-6;
constexpr double kScoreTolerance = 1e-9;
constexpr std::int64_t kMnistIterations = 50000;
// 100 * 8000 / 64000: the per-class score range of a width-64000 network.
constexpr double kMnistGroupSumTau = 12.5;
constexpr double kMaxStGap = 0.01;
constexpr double kMinSoftmaxDiscreteAccuracy = 0.95;
constexpr double kLandscapeOrthogonality = 1e-10;
constexpr double kLandscapeR2 = 0.999;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  std::string out(std::snprintf(nullptr, 0, format, args...), '\0');
  std::snprintf(out.data(), out.size() + 1, format, args...);
  return out;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string EnvOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

fs::path WorkDir() {
  return EnvOr("LGN_ACCEPTANCE_DIR", LGN_DEFAULT_ACCEPTANCE_DIR);
}

int Threads() { return std::max(1, std::atoi(EnvOr("LGN_THREADS", "1").c_str())); }

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

int Cli(std::vector<std::string> args, std::ostream& out) {
  args.insert(args.begin(), "lgn");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int status = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (status != 0) std::cerr << err.str();
  return status;
}

Model TrainToy(const Dataset& data, const NetworkConfig& config,
               std::int64_t iterations) {
  TrainConfig tc;
  tc.learning_rate = 0.05;
  tc.batch_size = 32;
  tc.max_iterations = iterations;
  tc.eval_every = iterations;
  return TrainLoop(InitModel(config), data, tc, {}).model;
}

// ---------------------------------------------------------------------------

Outcome GateTables() {
  const auto start = std::chrono::steady_clock::now();
  int agree = 0;
  for (int id = 0; id < kNumGates; ++id) {
    const Gate g = GateFromId(id);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const bool truth = (id >> (2 * a + b)) & 1;
        const double relaxed = EvalRelaxed(g, a, b);
        if (relaxed == (truth ? 1.0 : 0.0) && EvalDiscrete(g, a, b) == truth) {
          ++agree;
        }
      }
    }
  }
  Rng rng(1);
  int in_range = 0;
  for (int i = 0; i < kGateInteriorPoints; ++i) {
    const double a = rng.UniformOpen(), b = rng.UniformOpen();
    bool ok = true;
    for (int id = 0; id < kNumGates; ++id) {
      const double v = EvalRelaxed(GateFromId(id), a, b);
      ok = ok && v >= 0.0 && v <= 1.0;
    }
    in_range += ok;
  }
  const double t = Seconds(start);
  return {agree == 64 && in_range == kGateInteriorPoints &&
              t < kGateRuntimeSeconds,
          Fmt("%d/64 corner equalities, %d/%d interior points in [0,1], %.3f s",
              agree, in_range, kGateInteriorPoints, t)};
}

Outcome GradientCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (Mode mode : {Mode::kSoftmax, Mode::kGumbelSoft, Mode::kGumbelST}) {
    for (std::uint64_t seed = 0; seed < kGradientSeeds; ++seed) {
      worst = std::max(worst, testing::MaxRelErrorVsFiniteDifferences(
                                  testing::MakeCase(seed), mode,
                                  StraightThrough::kSoftMixture));
    }
  }
  const double t = Seconds(start);
  return {worst <= kGradientRelError && t < kGradientRuntimeSeconds,
          Fmt("max relative error %.3g over 3 modes x %d seeds (limit %.0e), "
              "%.1f s",
              worst, kGradientSeeds, kGradientRelError, t)};
}

Outcome TranslationInvariance() {
  NetworkConfig c = testing::SmallConfig(8, 3, 32, 4, 3);
  const Model model = InitModel(c);
  Rng rng(4);
  Activations x(8, 16);
  for (double& v : x.data) v = rng.Uniform();
  const ForwardResult base = ForwardSoft(model, x);
  double worst = 0.0;
  for (double shift : {-10.0, 0.1, 3.7}) {
    Model shifted = model;
    for (double& z : shifted.mutable_logits()) z += shift;
    const ForwardResult r = ForwardSoft(shifted, x);
    for (std::size_t l = 0; l < r.trace.layers.size(); ++l) {
      for (std::size_t i = 0; i < r.trace.layers[l].data.size(); ++i) {
        worst = std::max(worst, std::abs(r.trace.layers[l].data[i] -
                                         base.trace.layers[l].data[i]));
      }
    }
    for (std::size_t i = 0; i < r.scores.values.size(); ++i) {
      worst = std::max(worst,
                       std::abs(r.scores.values[i] - base.scores.values[i]));
    }
  }
  return {worst < kTranslationTolerance,
          Fmt("max output change %.3g for shifts {-10, 0.1, 3.7}", worst)};
}

Outcome InitEntropy() {
  const std::vector<double> h = SampleInitEntropies(kEntropySamples, 0);
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(h.size());
  const double target = kAsymptoticInitEntropy;
  return {std::abs(mean - target) <= kEntropyTolerance,
          Fmt("mean entropy %.4f over %d neurons, target %.4f +/- %.2f", mean,
              kEntropySamples, target, kEntropyTolerance)};
}

Outcome GumbelMoments() {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < kGumbelSamples; ++i) {
    const double g = rng.Gumbel();
    sum += g;
    sq += g * g;
  }
  const double n = kGumbelSamples;
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  const double gamma = std::numbers::egamma;
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  return {std::abs(mean - gamma) <= kGumbelMeanTolerance &&
              std::abs(var - pi2_6) <= kGumbelVarianceTolerance,
          Fmt("mean %.5f (target %.5f), variance %.5f (target %.5f)", mean,
              gamma, var, pi2_6)};
}

Outcome SmoothingExpansion() {
  const auto start = std::chrono::steady_clock::now();
  Rng wr(1), zr(2);
  std::vector<double> w(kNumGates), z(kNumGates);
  for (double& v : w) v = wr.Normal();
  for (double& v : z) v = zr.Normal();
  const SimplexLoss loss = [&w](std::span<const double> p) {
    double s = 0.0;
    for (int i = 0; i < kNumGates; ++i) s += w[i] * p[i];
    return s;
  };
  std::string detail = "residual*tau^3:";
  double worst = 0.0;
  bool matched = false;
  std::string match;
  const double taus[] = {4.0, 8.0, 16.0};
  for (int k = 0; k < 3; ++k) {
    const double tau = taus[k];
    const SmoothingCheck c =
        GumbelSmoothingCheck(loss, z, tau, kLemmaSamples, DeriveSeed(6, k));
    const double scaled = c.residual * tau * tau * tau;
    worst = std::max(worst, scaled);
    detail += Fmt(" %.3f (tau %g)", scaled, tau);
    if (tau == 8.0) {
      const double gap = c.monte_carlo_j - c.base_loss;
      const double se_units = c.residual / c.standard_error;
      matched = se_units <= kLemmaStandardErrors;
      match = Fmt("; at tau 8 J - f = %.4g vs curvature term %.4g, %.2f SE "
                  "apart (SE %.3g)",
                  gap, c.curvature_term, se_units, c.standard_error);
    }
  }
  const double t = Seconds(start);
  return {worst <= kLemmaTau3Bound && matched && t < kLemmaRuntimeSeconds,
          detail + Fmt(" (bound %.2f)", kLemmaTau3Bound) + match +
              Fmt(", %.1f s", t)};
}

QuadraticObjective RandomQuadratic(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> b(static_cast<std::size_t>(n) * n);
  for (double& v : b) v = rng.Normal();
  std::vector<double> a(b.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i * n + j] = 0.5 * (b[i * n + j] + b[j * n + i]);
  }
  for (int i = 0; i < n; ++i) a[i * n + i] += 2.0;
  return QuadraticObjective(std::move(a));
}

Outcome HutchinsonCorrectness() {
  const int n = 40;
  int within = 0;
  double worst_se = 0.0;
  for (int seed = 0; seed < kHutchinsonSeeds; ++seed) {
    const QuadraticObjective q = RandomQuadratic(n, DeriveSeed(7, seed));
    Rng tr(DeriveSeed(8, seed));
    std::vector<double> theta(n);
    for (double& v : theta) v = tr.Normal();
    const CurvatureReport r = HutchinsonTrace(q, theta, kHutchinsonProbes, seed);
    const double se_units = std::abs(r.trace_estimate - q.Trace()) / r.standard_error;
    worst_se = std::max(worst_se, se_units);
    within += se_units <= kHutchinsonStandardErrors;
  }
  std::vector<double> diag(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) diag[i * n + i] = 0.5 + i;
  const QuadraticObjective d(diag);
  const CurvatureReport r =
      HutchinsonTrace(d, std::vector<double>(n, 0.3), kHutchinsonProbes, 3);
  double diag_err = std::abs(r.trace_estimate - d.Trace());
  for (double p : r.per_probe) diag_err = std::max(diag_err, std::abs(p - d.Trace()));
  return {within == kHutchinsonSeeds && diag_err <= kDiagonalTolerance,
          Fmt("%d/%d seeds within %.0f SE (worst %.2f SE); diagonal max error "
              "%.3g",
              within, kHutchinsonSeeds, kHutchinsonStandardErrors, worst_se,
              diag_err)};
}

Outcome DiscreteEngines() {
  const Dataset data = SyntheticTask("majority_5", 10);
  NetworkConfig c = testing::SmallConfig(10, 3, 40, 2, 8);
  const DiscreteNetlist net = Discretize(TrainToy(data, c, 1500));
  const Model saturated = SaturatedModel(net);
  const std::vector<int> packed = PredictBitpacked(net, data);
  int agree = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::span<const std::uint8_t> bits = data.sample(i);
    const Prediction scalar = NetlistInfer(net, bits);
    std::vector<double> x(bits.begin(), bits.end());
    const ForwardResult soft = ForwardSoft(saturated, SingleSample(x));
    const std::span<const double> s = soft.scores.sample(0);
    for (int k = 0; k < 2; ++k) worst = std::max(worst, std::abs(s[k] - scalar.scores[k]));
    if (scalar.predicted_class == packed[i] &&
        ArgmaxLowest(s) == scalar.predicted_class) {
      ++agree;
    }
  }
  const double acc = DiscreteAccuracy(net, data);
  return {agree == static_cast<int>(data.size()) && worst <= kScoreTolerance,
          Fmt("%d/%zu inputs agree across bit-packed, scalar and saturated soft "
              "(max score difference %.3g, netlist accuracy %.4f)",
              agree, data.size(), worst, acc)};
}

// ---------------------------------------------------------------------------
// MNIST paired runs

struct MnistRun {
  bool ok = false;
  std::string error;
  GapReport gap;
  double unused_fraction = 0.0;
  double hours = 0.0;
};

std::string MnistConfig(const fs::path& mnist, Mode mode, const fs::path& out) {
  const auto file = [&](const char* name) { return (mnist / name).string(); };
  return Fmt(R"({
  "network": {"depth": 6, "width": 8000, "num_classes": 10, "groupsum_tau": %g,
              "wiring_seed": 0, "init_seed": 1},
  "training": {"mode": "%s", "tau": 1.0, "learning_rate": 0.01,
               "batch_size": 128, "max_iterations": %lld, "eval_every": 1000,
               "seed": 0},
  "data": {"kind": "idx", "thresholds": [0.5],
           "train_images": "%s", "train_labels": "%s",
           "test_images": "%s", "test_labels": "%s"},
  "output_dir": "%s"
}
)",
             kMnistGroupSumTau, std::string(ModeName(mode)).c_str(),
             static_cast<long long>(kMnistIterations),
             file("train-images-idx3-ubyte").c_str(),
             file("train-labels-idx1-ubyte").c_str(),
             file("t10k-images-idx3-ubyte").c_str(),
             file("t10k-labels-idx1-ubyte").c_str(), out.string().c_str());
}

std::optional<fs::path> NewestCheckpoint(const fs::path& dir) {
  std::optional<fs::path> best;
  if (!fs::exists(dir)) return best;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("ckpt-", 0) == 0 && e.path().extension() == ".bin" &&
        (!best || name > best->filename().string())) {
      best = e.path();
    }
  }
  return best;
}

MnistRun EnsureMnistRun(Mode mode) {
  MnistRun run;
  const fs::path mnist = EnvOr("LGN_MNIST_DIR", "/root/data/mnist");
  if (!fs::exists(mnist / "train-images-idx3-ubyte")) {
    run.error = "MNIST not found in " + mnist.string();
    return run;
  }
  const fs::path dir = WorkDir() / ("mnist_" + std::string(ModeName(mode)));
  fs::create_directories(dir);
  const fs::path config = WorkDir() / ("mnist_" + std::string(ModeName(mode)) + ".json");
  const std::string text = MnistConfig(mnist, mode, dir);
  const bool same_config = fs::exists(config) && Slurp(config) == text;
  if (!same_config) {
    // A different configuration invalidates earlier results.
    fs::remove_all(dir);
    fs::create_directories(dir);
    Spit(config, text);
  }

  const fs::path final_ckpt = dir / "final.bin";
  const bool done = fs::exists(final_ckpt) &&
                    LoadCheckpoint(final_ckpt.string()).state.iteration ==
                        kMnistIterations;
  if (!done) {
    std::vector<std::string> args = {"train", "--config", config.string(),
                                     "--threads", std::to_string(Threads())};
    if (const auto ckpt = NewestCheckpoint(dir)) {
      args.push_back("--resume");
      args.push_back(ckpt->string());
    }
    const auto start = std::chrono::steady_clock::now();
    const int status = Cli(args, std::cout);
    std::ofstream(dir / "wall_seconds.log", std::ios::app)
        << Fmt("%.1f\n", Seconds(start));
    if (status != 0) {
      run.error = std::string(ModeName(mode)) + " training failed";
      return run;
    }
  }
  std::ifstream log(dir / "wall_seconds.log");
  for (double s; log >> s;) run.hours += s / 3600.0;

  const Checkpoint ckpt = LoadCheckpoint(final_ckpt.string());
  const LoadedData data = LoadData(LoadRunConfig(config.string()).data);
  run.gap = DiscretizationGap(ckpt.model, data.test, mode, 1.0, Threads());
  run.unused_fraction = ComputeEntropyReport(ckpt.model).unused_fraction;
  run.ok = true;
  return run;
}

struct PairedRuns {
  MnistRun softmax;
  MnistRun st;
};

const PairedRuns& MnistPair() {
  static const PairedRuns pair = {EnsureMnistRun(Mode::kSoftmax),
                                  EnsureMnistRun(Mode::kGumbelST)};
  return pair;
}

std::string Describe(const char* name, const MnistRun& r) {
  return Fmt("%s soft %.4f discrete %.4f gap %.4f unused %.4f (%.2f h)", name,
             r.gap.soft_accuracy, r.gap.discrete_accuracy, r.gap.gap,
             r.unused_fraction, r.hours);
}

Outcome MnistGap() {
  const PairedRuns& p = MnistPair();
  if (!p.softmax.ok || !p.st.ok) return {false, p.softmax.error + p.st.error};
  const bool a = p.st.gap.gap < p.softmax.gap.gap;
  const bool b = p.st.gap.gap < kMaxStGap;
  const bool c = p.st.unused_fraction < p.softmax.unused_fraction;
  return {a && b && c,
          Fmt("(a) %s (b) %s (c) %s; ", a ? "yes" : "no", b ? "yes" : "no",
              c ? "yes" : "no") +
              Describe("softmax", p.softmax) + "; " +
              Describe("gumbel_st", p.st)};
}

Outcome MnistAnchor() {
  const PairedRuns& p = MnistPair();
  if (!p.softmax.ok) return {false, p.softmax.error};
  return {p.softmax.gap.discrete_accuracy >= kMinSoftmaxDiscreteAccuracy,
          Fmt("softmax discrete test accuracy %.4f (required %.2f; reference "
              "at width 64000: soft 0.9833, discrete 0.9816)",
              p.softmax.gap.discrete_accuracy, kMinSoftmaxDiscreteAccuracy)};
}

// ---------------------------------------------------------------------------

Outcome Determinism() {
  const fs::path root = WorkDir() / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ostringstream sink;
  int compared = 0, identical = 0;
  const auto same = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    const std::string x = Slurp(a), y = Slurp(b);
    if (!x.empty() && x == y) {
      ++identical;
    } else {
      std::cerr << "differs: " << a << " vs " << b << "\n";
    }
  };
  for (const char* mode : {"softmax", "gumbel_soft", "gumbel_st"}) {
    const fs::path cfg = root / (std::string(mode) + ".json");
    Spit(cfg, Fmt(R"({
  "network": {"depth": 3, "width": 24, "groupsum_tau": 2.0},
  "training": {"mode": "%s", "max_iterations": 300, "eval_every": 50,
               "learning_rate": 0.05, "batch_size": 16, "seed": 11},
  "data": {"kind": "synthetic", "task": "majority_5", "task_bits": 8},
  "diagnostics": {"hutchinson_probes": 8, "power_iterations": 10,
                  "landscape_resolution": 5, "lemma_taus": [4.0],
                  "lemma_samples": 20000, "entropy_samples": 5000,
                  "curvature_batch": 64},
  "output_dir": "%s"
})",
                  mode, (root / mode).string().c_str()));
    std::vector<fs::path> runs;
    for (const char* threads : {"1", "1", "3"}) {
      const fs::path out = root / (std::string(mode) + "_" +
                                   std::to_string(runs.size()));
      const std::string ckpt = (out / "final.bin").string();
      if (Cli({"train", "--config", cfg.string(), "--output", out.string(),
               "--threads", threads},
              sink) != 0 ||
          Cli({"diagnose", "--config", cfg.string(), "--checkpoint", ckpt,
               "--out", (out / "diag").string(), "--threads", threads},
              sink) != 0 ||
          Cli({"discretize", "--checkpoint", ckpt, "--out",
               (out / "net.json").string()},
              sink) != 0 ||
          Cli({"infer", "--netlist", (out / "net.json").string(), "--config",
               cfg.string(), "--split", "train", "--bitpacked", "--out",
               (out / "pred.csv").string()},
              sink) != 0) {
        return {false, std::string("command failed for mode ") + mode};
      }
      std::ostringstream eval;
      Cli({"eval", "--config", cfg.string(), "--checkpoint", ckpt, "--split",
           "train", "--threads", threads},
          eval);
      Spit(out / "eval.json", eval.str());
      runs.push_back(out);
    }
    for (std::size_t r = 1; r < runs.size(); ++r) {
      for (const char* f :
           {"metrics.csv", "final.bin", "net.json", "pred.csv", "eval.json",
            "diag/entropy.json", "diag/hessian.json", "diag/eigen.json",
            "diag/landscape.csv", "diag/lemma.json",
            "diag/gate_histogram.csv"}) {
        same(runs[0] / f, runs[r] / f);
      }
    }
  }
  return {compared == identical,
          Fmt("%d/%d artifacts byte-identical across repeat runs and 1 vs 3 "
              "threads (train, eval, discretize, infer, diagnose; 3 modes)",
              identical, compared)};
}

double QuadraticFitR2(const LandscapeGrid& g) {
  const int n = g.resolution * g.resolution;
  Eigen::MatrixXd x(n, 6);
  Eigen::VectorXd y(n);
  for (int i = 0, r = 0; i < g.resolution; ++i) {
    for (int j = 0; j < g.resolution; ++j, ++r) {
      const double a = g.coords[i], b = g.coords[j];
      x.row(r) << 1.0, a, b, a * a, a * b, b * b;
      y(r) = g.at(i, j);
    }
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  const double ss_res = (y - x * beta).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

Outcome Landscape() {
  const Dataset data = SyntheticTask("parity_3", 6);
  const NetworkConfig c = testing::SmallConfig(6, 2, 24, 2, 12);
  const Model model = TrainToy(data, c, 300);
  const BatchLossObjective obj =
      MakeBatchObjective(model, data, 64, Mode::kSoftmax, 1.0);
  const LandscapeGrid g = ComputeLandscape(obj, model.logits(), {});
  const int mid = g.resolution / 2;
  const bool center = g.at(mid, mid) == obj.Value(model.logits());
  double dot = 0.0;
  for (std::size_t i = 0; i < g.d1.size(); ++i) dot += g.d1[i] * g.d2[i];

  const QuadraticObjective q = RandomQuadratic(30, 12);
  Rng rng(13);
  std::vector<double> theta(30);
  for (double& v : theta) v = rng.Normal();
  const double r2 = QuadraticFitR2(ComputeLandscape(q, theta, {}));
  return {center && std::abs(dot) < kLandscapeOrthogonality && r2 > kLandscapeR2,
          Fmt("center %s, |d1.d2| = %.3g, quadratic-fit R^2 = %.8f",
              center ? "exact" : "differs", std::abs(dot), r2)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> all = {
      {"gate-table soundness", GateTables},
      {"gradient correctness", GradientCorrectness},
      {"softmax translation invariance", TranslationInvariance},
      {"expected init entropy", InitEntropy},
      {"Gumbel moments", GumbelMoments},
      {"Gumbel smoothing expansion", SmoothingExpansion},
      {"Hutchinson correctness", HutchinsonCorrectness},
      {"discrete-engine equivalence", DiscreteEngines},
      {"MNIST discretization gap", MnistGap},
      {"MNIST sanity anchor", MnistAnchor},
      {"determinism", Determinism},
      {"landscape grid", Landscape},
  };
  return all;
}

}  // namespace
}  // namespace lgn

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-12)")
      ->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const auto& criteria = lgn::Criteria();
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    const auto start = std::chrono::steady_clock::now();
    lgn::Outcome o;
    try {
      o = criteria[i].run();
    } catch (const lgn::Error& e) {
      o = {false, std::string("error[") +
                      std::string(lgn::ErrorCodeName(e.code())) +
                      "]: " + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", i + 1,
                o.pass ? "PASS" : "FAIL", criteria[i].name, o.detail.c_str(),
                lgn::Seconds(start));
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
