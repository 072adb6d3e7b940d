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

#include "lgn/cli.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgn/diagnostics.h"
#include "lgn/error.h"

namespace lgn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void AppendLine(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << line << '\n';
  if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void MakeDirectories(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + dir.string() + ": " + ec.message());
  }
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::int64_t LeadingInteger(const std::string& row) {
  return std::stoll(row.substr(0, row.find(',')));
}

// Rewrites a CSV keeping the header and rows up to `iteration`.
void TruncateCsv(const fs::path& path, std::string_view header,
                 std::int64_t iteration) {
  std::string content = std::string(header) + "\n";
  const std::vector<std::string> lines = ReadLines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (LeadingInteger(lines[i]) <= iteration) content += lines[i] + "\n";
  }
  WriteFile(path, content);
}

std::string CheckpointName(std::int64_t iteration) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ckpt-%09lld.bin",
                static_cast<long long>(iteration));
  return buf;
}

// Tracks saved checkpoints. The newest `keep` files survive, as does every
// checkpoint whose discrete accuracy beats all earlier ones.
class CheckpointIndex {
 public:
  static constexpr std::string_view kHeader =
      "iteration,file,soft_acc,discrete_acc,record";

  CheckpointIndex(fs::path dir, int keep) : dir_(std::move(dir)), keep_(keep) {}

  void Load(std::int64_t up_to) {
    const std::vector<std::string> lines = ReadLines(dir_ / "checkpoints.csv");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::stringstream ss(lines[i]);
      Entry e;
      std::string field;
      std::getline(ss, field, ',');
      e.iteration = std::stoll(field);
      std::getline(ss, e.file, ',');
      std::getline(ss, field, ',');
      e.soft = std::stod(field);
      std::getline(ss, field, ',');
      e.discrete = std::stod(field);
      if (e.iteration <= up_to) entries_.push_back(e);
    }
  }

  void Add(std::int64_t iteration, const std::string& file, double soft,
           double discrete) {
    entries_.push_back({iteration, file, soft, discrete});
    Prune();
  }

 private:
  struct Entry {
    std::int64_t iteration;
    std::string file;
    double soft;
    double discrete;
  };

  void Prune() {
    std::vector<double> acc;
    for (const Entry& e : entries_) acc.push_back(e.discrete);
    std::set<std::size_t> records;
    for (std::size_t i : MonotoneAccuracyCheckpoints(acc)) records.insert(i);
    std::string csv = std::string(kHeader) + "\n";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const Entry& e = entries_[i];
      const bool record = records.count(i) > 0;
      const bool recent = i + keep_ >= entries_.size();
      if (!record && !recent) {
        std::error_code ec;
        fs::remove(dir_ / e.file, ec);
      }
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%lld,%s,%.17g,%.17g,%d",
                    static_cast<long long>(e.iteration), e.file.c_str(), e.soft,
                    e.discrete, record ? 1 : 0);
      csv += buf;
      csv += "\n";
    }
    WriteFile(dir_ / "checkpoints.csv", csv);
  }

  fs::path dir_;
  std::size_t keep_;
  std::vector<Entry> entries_;
};

struct MetricsRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double soft = 0.0;
  double discrete = 0.0;
  double gap = 0.0;
};

std::vector<MetricsRow> ReadMetrics(const fs::path& path) {
  std::vector<MetricsRow> rows;
  const std::vector<std::string> lines = ReadLines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    MetricsRow r;
    long long it = 0;
    if (std::sscanf(lines[i].c_str(), "%lld,%lf,%lf,%lf,%lf", &it, &r.loss,
                    &r.soft, &r.discrete, &r.gap) == 5) {
      r.iteration = it;
      rows.push_back(r);
    }
  }
  return rows;
}

// First evaluated iteration whose accuracy is within one percentage point of
// the best accuracy of the run.
std::int64_t IterationsToWithin(const std::vector<MetricsRow>& rows,
                                double MetricsRow::*field) {
  double best = 0.0;
  for (const MetricsRow& r : rows) best = std::max(best, r.*field);
  for (const MetricsRow& r : rows) {
    if (r.*field >= best - 0.01) return r.iteration;
  }
  return 0;
}

json SummaryJson(const std::vector<MetricsRow>& rows, const Model& model,
                 const TrainConfig& training, const DiagnosticsConfig& diag,
                 double session_seconds, double iters_per_hour) {
  json s;
  s["mode"] = ModeName(training.mode);
  s["tau"] = training.tau;
  s["iterations"] = rows.empty() ? 0 : rows.back().iteration;
  double max_soft = 0.0, max_discrete = 0.0;
  for (const MetricsRow& r : rows) {
    max_soft = std::max(max_soft, r.soft);
    max_discrete = std::max(max_discrete, r.discrete);
  }
  if (!rows.empty()) {
    s["final_loss"] = rows.back().loss;
    s["final_soft_accuracy"] = rows.back().soft;
    s["final_discrete_accuracy"] = rows.back().discrete;
    s["final_gap"] = rows.back().gap;
  }
  s["max_soft_accuracy"] = max_soft;
  s["max_discrete_accuracy"] = max_discrete;
  s["iterations_to_within_1pct_soft"] =
      IterationsToWithin(rows, &MetricsRow::soft);
  s["iterations_to_within_1pct_discrete"] =
      IterationsToWithin(rows, &MetricsRow::discrete);
  EntropyOptions eo;
  eo.init_samples = diag.entropy_samples;
  eo.percentile = diag.entropy_percentile;
  eo.seed = diag.seed;
  const EntropyReport entropy = ComputeEntropyReport(model, eo);
  s["unused_fraction"] = entropy.unused_fraction;
  s["unused_fraction_per_layer"] = entropy.unused_fraction_per_layer;
  s["session_seconds"] = session_seconds;
  s["iters_per_hour"] = iters_per_hour;
  return s;
}

RunConfig LoadConfigWithOverrides(const std::string& path,
                                  const std::string& output, int threads) {
  RunConfig config = LoadRunConfig(path);
  if (!output.empty()) config.output_dir = output;
  if (threads > 0) config.training.threads = threads;
  return config;
}

void CheckResumeCompatible(const RunConfig& config, const Checkpoint& ckpt) {
  const TrainConfig& a = config.training;
  const TrainConfig& b = ckpt.training;
  if (!(ckpt.model.config() == config.network)) {
    throw Error(ErrorCode::kConfig,
                "checkpoint network does not match the config");
  }
  if (a.mode != b.mode || a.tau != b.tau || a.learning_rate != b.learning_rate ||
      a.batch_size != b.batch_size || a.seed != b.seed ||
      a.eval_every != b.eval_every || a.straight_through != b.straight_through) {
    throw Error(ErrorCode::kConfig,
                "checkpoint training settings do not match the config (only "
                "max_iterations and threads may change on resume)");
  }
}

int Train(const std::string& config_path, const std::string& resume,
          const std::string& output, int threads, std::ostream& out) {
  RunConfig config = LoadConfigWithOverrides(config_path, output, threads);
  const LoadedData data = LoadData(config.data);
  ResolveShapes(config.network, data.train);

  const fs::path dir = config.output_dir;
  MakeDirectories(dir);
  const fs::path metrics = dir / "metrics.csv";
  const fs::path timing = dir / "timing.csv";
  CheckpointIndex index(dir, config.keep_checkpoints);

  std::optional<Trainer> trainer;
  if (!resume.empty()) {
    Checkpoint ckpt = LoadCheckpoint(resume);
    CheckResumeCompatible(config, ckpt);
    trainer.emplace(std::move(ckpt.model), data.train, data.test,
                    config.training);
    trainer->Restore(ckpt.state);
    TruncateCsv(metrics, kMetricsCsvHeader, ckpt.state.iteration);
    TruncateCsv(timing, kTimingCsvHeader, ckpt.state.iteration);
    index.Load(ckpt.state.iteration);
    out << "resumed from iteration " << ckpt.state.iteration << "\n";
  } else {
    WriteFile(dir / "config.json", RunConfigToJson(config));
    WriteFile(metrics, std::string(kMetricsCsvHeader) + "\n");
    WriteFile(timing, std::string(kTimingCsvHeader) + "\n");
    WriteFile(dir / "checkpoints.csv",
              std::string(CheckpointIndex::kHeader) + "\n");
    trainer.emplace(InitModel(config.network), data.train, data.test,
                    config.training);
  }

  const auto start = std::chrono::steady_clock::now();
  double iters_per_hour = 0.0;
  std::int64_t last_reported = trainer->iteration();
  const auto on_report = [&](const LossReport& r) {
    AppendLine(metrics, MetricsCsvRow(r));
    AppendLine(timing, TimingCsvRow(r));
    const std::string name = CheckpointName(r.iteration);
    SaveCheckpoint((dir / name).string(), trainer->model(), config.training,
                   trainer->state());
    index.Add(r.iteration, name, r.soft_accuracy, r.discrete_accuracy);
    iters_per_hour = r.iters_per_hour;
    last_reported = r.iteration;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "iter %lld loss %.6f soft_acc %.4f discrete_acc %.4f gap "
                  "%.4f\n",
                  static_cast<long long>(r.iteration), r.loss, r.soft_accuracy,
                  r.discrete_accuracy, r.gap);
    out << buf << std::flush;
  };
  trainer->Run(on_report);
  if (last_reported != trainer->iteration()) on_report(trainer->Evaluate());

  SaveCheckpoint((dir / "final.bin").string(), trainer->model(),
                 config.training, trainer->state());
  SaveNetlist(Discretize(trainer->model()), (dir / "netlist.json").string());
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  const json summary =
      SummaryJson(ReadMetrics(metrics), trainer->model(), config.training,
                  config.diagnostics, seconds, iters_per_hour);
  WriteFile(dir / "summary.json", summary.dump(2) + "\n");
  out << "wrote " << dir.string() << "\n";
  return 0;
}

const Dataset& PickSplit(const LoadedData& data, const std::string& split) {
  if (split == "train") return data.train;
  if (split == "test") {
    if (data.test.empty()) {
      throw Error(ErrorCode::kConfig, "the config has no test split");
    }
    return data.test;
  }
  throw Error(ErrorCode::kConfig,
              "unknown split '" + split + "' (expected train or test)");
}

int Eval(const std::string& config_path, const std::string& checkpoint,
         const std::string& split, int threads, std::ostream& out) {
  const RunConfig config = LoadConfigWithOverrides(config_path, "", threads);
  const LoadedData data = LoadData(config.data);
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  const Dataset& eval = PickSplit(data, split);
  NetworkConfig shape = ckpt.model.config();
  ResolveShapes(shape, eval);
  const GapReport gap =
      DiscretizationGap(ckpt.model, eval, ckpt.training.mode, ckpt.training.tau,
                        config.training.threads);
  const json report = {{"split", split},
                       {"samples", eval.size()},
                       {"iteration", ckpt.state.iteration},
                       {"soft_accuracy", gap.soft_accuracy},
                       {"discrete_accuracy", gap.discrete_accuracy},
                       {"gap", gap.gap}};
  out << report.dump(2) << "\n";
  return 0;
}

int DiscretizeCmd(const std::string& checkpoint, const std::string& output,
                  std::ostream& out) {
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  SaveNetlist(Discretize(ckpt.model), output);
  out << "wrote " << output << "\n";
  return 0;
}

int Infer(const std::string& netlist_path, const std::string& config_path,
          const std::string& split, bool bitpacked, const std::string& output,
          std::ostream& out) {
  const DiscreteNetlist netlist = LoadNetlist(netlist_path);
  const RunConfig config = LoadRunConfig(config_path);
  const LoadedData data = LoadData(config.data);
  const Dataset& eval = PickSplit(data, split);
  if (eval.feature_bits != netlist.input_bits) {
    throw Error(ErrorCode::kShape,
                "input feature_bits: expected " +
                    std::to_string(netlist.input_bits) + ", found " +
                    std::to_string(eval.feature_bits));
  }
  const std::vector<int> pred = bitpacked ? PredictBitpacked(netlist, eval)
                                          : PredictScalar(netlist, eval);
  std::size_t correct = 0;
  std::string csv = "index,predicted,label\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == eval.labels[i]) ++correct;
    csv += std::to_string(i) + "," + std::to_string(pred[i]) + "," +
           std::to_string(eval.labels[i]) + "\n";
  }
  if (!output.empty()) WriteFile(output, csv);
  const json report = {
      {"split", split},
      {"samples", eval.size()},
      {"bitpacked", bitpacked},
      {"accuracy", eval.empty() ? 0.0
                                : static_cast<double>(correct) /
                                      static_cast<double>(eval.size())}};
  out << report.dump(2) << "\n";
  return 0;
}

std::vector<std::string> CheckReportNames(std::vector<std::string> names) {
  std::string valid;
  for (std::string_view k : kReportNames) {
    if (!valid.empty()) valid += ", ";
    valid += k;
  }
  if (names.empty()) {
    for (std::string_view k : kReportNames) names.emplace_back(k);
  }
  for (const std::string& n : names) {
    if (std::find(std::begin(kReportNames), std::end(kReportNames), n) ==
        std::end(kReportNames)) {
      throw Error(ErrorCode::kConfig,
                  "unknown report '" + n + "' (valid: " + valid + ")");
    }
  }
  return names;
}

int Diagnose(const std::string& config_path, const std::string& checkpoint,
             std::vector<std::string> reports, const std::string& output,
             int threads, std::ostream& out) {
  RunConfig config = LoadConfigWithOverrides(config_path, "", threads);
  const DiagnosticsConfig& dc = config.diagnostics;
  reports = CheckReportNames(reports.empty() ? dc.reports : reports);
  const auto wants = [&](std::string_view name) {
    return std::find(reports.begin(), reports.end(), name) != reports.end();
  };
  const bool needs_data = checkpoint.empty() || wants("hessian") ||
                          wants("eigen") || wants("landscape");
  LoadedData data;
  if (needs_data) data = LoadData(config.data);

  std::optional<Model> model;
  Mode mode = config.training.mode;
  double tau = config.training.tau;
  if (!checkpoint.empty()) {
    Checkpoint ckpt = LoadCheckpoint(checkpoint);
    mode = ckpt.training.mode;
    tau = ckpt.training.tau;
    model.emplace(std::move(ckpt.model));
  } else {
    ResolveShapes(config.network, data.train);
    model.emplace(InitModel(config.network));
  }
  const int nthreads = config.training.threads;

  const fs::path dir =
      output.empty() ? fs::path(config.output_dir) / "diagnostics"
                     : fs::path(output);
  MakeDirectories(dir);
  const auto wrote = [&](const std::string& name) {
    out << "wrote " << (dir / name).string() << "\n";
  };

  std::optional<BatchLossObjective> objective;
  const auto get_objective = [&]() -> const BatchLossObjective& {
    if (!objective) {
      const Dataset& d = data.test.empty() ? data.train : data.test;
      NetworkConfig shape = model->config();
      ResolveShapes(shape, d);
      objective.emplace(
          MakeBatchObjective(*model, d, dc.curvature_batch, mode, tau, nthreads));
    }
    return *objective;
  };
  const std::span<const double> theta = model->logits();

  if (wants("entropy")) {
    EntropyOptions eo;
    eo.init_samples = dc.entropy_samples;
    eo.percentile = dc.entropy_percentile;
    eo.seed = dc.seed;
    WriteFile(dir / "entropy.json",
              EntropyReportJson(ComputeEntropyReport(*model, eo)));
    wrote("entropy.json");
  }
  if (wants("hessian")) {
    const CurvatureReport r = HutchinsonTrace(
        get_objective(), theta, dc.hutchinson_probes, dc.seed, nthreads);
    WriteFile(dir / "hessian.json", CurvatureReportJson(r));
    wrote("hessian.json");
  }
  if (wants("eigen")) {
    const double top = PowerIterationTopEigenvalue(
        get_objective(), theta, dc.power_iterations, dc.seed);
    const json j = {{"top_eigenvalue", top},
                    {"iterations", dc.power_iterations}};
    WriteFile(dir / "eigen.json", j.dump(2) + "\n");
    wrote("eigen.json");
  }
  if (wants("landscape")) {
    LandscapeOptions lo;
    lo.resolution = dc.landscape_resolution;
    lo.radius = dc.landscape_radius;
    lo.seed = dc.seed;
    lo.threads = nthreads;
    WriteFile(dir / "landscape.csv",
              LandscapeCsv(ComputeLandscape(get_objective(), theta, lo)));
    wrote("landscape.csv");
  }
  if (wants("histogram")) {
    const GateHistogram h = ComputeGateHistogram(Discretize(*model));
    WriteFile(dir / "gate_histogram.csv", GateHistogramCsv(h));
    WriteFile(dir / "class_gate_histogram.csv", ClassGateHistogramCsv(h));
    wrote("gate_histogram.csv");
    wrote("class_gate_histogram.csv");
  }
  if (wants("lemma")) {
    // A linear loss over the simplex, evaluated at the first neuron's logits.
    Rng rng(DeriveSeed(dc.seed, 3));
    std::vector<double> w(kNumGates);
    for (double& x : w) x = rng.Normal();
    const SimplexLoss loss = [w](std::span<const double> p) {
      double s = 0.0;
      for (int i = 0; i < kNumGates; ++i) s += w[i] * p[i];
      return s;
    };
    json checks = json::array();
    for (std::size_t k = 0; k < dc.lemma_taus.size(); ++k) {
      const double t = dc.lemma_taus[k];
      const SmoothingCheck c =
          GumbelSmoothingCheck(loss, model->neuron_logits(0, 0), t,
                               dc.lemma_samples, DeriveSeed(dc.seed, 4 + k));
      checks.push_back(json::parse(SmoothingCheckJson(c, t)));
    }
    WriteFile(dir / "lemma.json", checks.dump(2) + "\n");
    wrote("lemma.json");
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Differentiable logic gate networks"};
  app.require_subcommand(1);

  std::string config_path, resume, output, checkpoint, split = "test",
                                                       netlist;
  std::vector<std::string> reports;
  bool bitpacked = false;
  int threads = 0;

  CLI::App* train = app.add_subcommand("train", "Train a network");
  train->add_option("--config", config_path, "Run config (JSON)")->required();
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--output", output, "Output directory");
  train->add_option("--threads", threads, "Worker threads");

  CLI::App* eval = app.add_subcommand("eval", "Soft and discrete accuracy");
  eval->add_option("--config", config_path, "Run config (JSON)")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--split", split, "train or test");
  eval->add_option("--threads", threads, "Worker threads");

  CLI::App* discretize =
      app.add_subcommand("discretize", "Export the argmax netlist");
  discretize->add_option("--checkpoint", checkpoint, "Checkpoint file")
      ->required();
  discretize->add_option("--out", output, "Netlist JSON path")->required();

  CLI::App* infer = app.add_subcommand("infer", "Run a netlist on a dataset");
  infer->add_option("--netlist", netlist, "Netlist JSON")->required();
  infer->add_option("--config", config_path, "Run config (JSON)")->required();
  infer->add_option("--split", split, "train or test");
  infer->add_flag("--bitpacked", bitpacked, "64 samples per machine word");
  infer->add_option("--out", output, "Predictions CSV");

  CLI::App* diagnose = app.add_subcommand("diagnose", "Write diagnostics");
  diagnose->add_option("--config", config_path, "Run config (JSON)")
      ->required();
  diagnose->add_option("--checkpoint", checkpoint,
                       "Checkpoint (default: a fresh model)");
  diagnose->add_option("--reports", reports, "Comma-separated report names")
      ->delimiter(',');
  diagnose->add_option("--out", output, "Output directory");
  diagnose->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train) return Train(config_path, resume, output, threads, out);
    if (*eval) return Eval(config_path, checkpoint, split, threads, out);
    if (*discretize) return DiscretizeCmd(checkpoint, output, out);
    if (*infer) {
      return Infer(netlist, config_path, split, bitpacked, output, out);
    }
    if (*diagnose) {
      return Diagnose(config_path, checkpoint, reports, output, threads, out);
    }
  } catch (const Error& e) {
    err << "error[" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lgn
