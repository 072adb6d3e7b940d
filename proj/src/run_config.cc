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

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "lgn/cli.h"
#include "lgn/error.h"

namespace lgn {
namespace {

using json = nlohmann::json;

int LineAt(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Resolves keys back to source lines for error messages. Searches inside
// the named section first, so keys that appear in several sections (such as
// "seed") are attributed to the right one.
class ConfigReader {
 public:
  explicit ConfigReader(std::string_view text) : text_(text) {}

  [[noreturn]] void Fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    const std::string name = section.empty() ? key : section + "." + key;
    std::string message = name + ": " + what;
    if (const int line = LineOf(section, key); line > 0) {
      message += " (line " + std::to_string(line) + ")";
    }
    throw Error(ErrorCode::kConfig, message);
  }

  void CheckKeys(const json& obj, const std::string& section,
                 std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) Fail("", section, "expected an object");
    for (const auto& item : obj.items()) {
      bool known = false;
      for (std::string_view a : allowed) known = known || item.key() == a;
      if (!known) Fail(section, item.key(), "unknown key");
    }
  }

  template <typename T>
  void Read(const json& obj, const std::string& section, const char* key,
            T& out) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    const json& v = *it;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) Fail(section, key, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) Fail(section, key, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) Fail(section, key, "expected a number");
      out = v.get<double>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) {
        Fail(section, key, "expected a non-negative integer");
      }
      out = v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) Fail(section, key, "expected an integer");
      const std::int64_t x = v.get<std::int64_t>();
      if (x < std::numeric_limits<T>::min() ||
          x > std::numeric_limits<T>::max()) {
        Fail(section, key, "integer out of range");
      }
      out = static_cast<T>(x);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) Fail(section, key, "expected an array of numbers");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number()) Fail(section, key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) Fail(section, key, "expected an array of strings");
      out.clear();
      for (const json& e : v) {
        if (!e.is_string()) Fail(section, key, "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  }

  template <typename Parse>
  void ReadEnum(const json& obj, const std::string& section, const char* key,
                Parse parse) const {
    std::string name;
    if (!obj.contains(key)) return;
    Read(obj, section, key, name);
    try {
      parse(name);
    } catch (const Error& e) {
      Fail(section, key, e.what());
    }
  }

 private:
  int LineOf(const std::string& section, const std::string& key) const {
    std::size_t start = 0;
    if (!section.empty()) {
      const std::size_t s = text_.find("\"" + section + "\"");
      if (s != std::string_view::npos) start = s;
    }
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = text_.find(quoted, start);
    if (pos == std::string_view::npos) pos = text_.find(quoted);
    return pos == std::string_view::npos ? 0 : LineAt(text_, pos);
  }

  std::string_view text_;
};

json NetworkToJson(const NetworkConfig& c) {
  return {{"input_bits", c.input_bits},   {"depth", c.depth},
          {"width", c.width},             {"num_classes", c.num_classes},
          {"groupsum_tau", c.groupsum_tau}, {"wiring_seed", c.wiring_seed},
          {"init_seed", c.init_seed}};
}

json TrainingToJson(const TrainConfig& c) {
  return {{"mode", ModeName(c.mode)},
          {"tau", c.tau},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_iterations", c.max_iterations},
          {"eval_every", c.eval_every},
          {"seed", c.seed},
          {"threads", c.threads},
          {"straight_through", StraightThroughName(c.straight_through)}};
}

void ReadNetwork(const ConfigReader& r, const json& j, NetworkConfig& c) {
  r.CheckKeys(j, "network",
              {"input_bits", "depth", "width", "num_classes", "groupsum_tau",
               "wiring_seed", "init_seed"});
  r.Read(j, "network", "input_bits", c.input_bits);
  r.Read(j, "network", "depth", c.depth);
  r.Read(j, "network", "width", c.width);
  r.Read(j, "network", "num_classes", c.num_classes);
  r.Read(j, "network", "groupsum_tau", c.groupsum_tau);
  r.Read(j, "network", "wiring_seed", c.wiring_seed);
  r.Read(j, "network", "init_seed", c.init_seed);
}

void ReadTraining(const ConfigReader& r, const json& j, TrainConfig& c) {
  r.CheckKeys(j, "training",
              {"mode", "tau", "learning_rate", "batch_size", "max_iterations",
               "eval_every", "seed", "threads", "straight_through"});
  r.ReadEnum(j, "training", "mode",
             [&](const std::string& s) { c.mode = ParseMode(s); });
  r.Read(j, "training", "tau", c.tau);
  r.Read(j, "training", "learning_rate", c.learning_rate);
  r.Read(j, "training", "batch_size", c.batch_size);
  r.Read(j, "training", "max_iterations", c.max_iterations);
  r.Read(j, "training", "eval_every", c.eval_every);
  r.Read(j, "training", "seed", c.seed);
  r.Read(j, "training", "threads", c.threads);
  r.ReadEnum(j, "training", "straight_through", [&](const std::string& s) {
    c.straight_through = ParseStraightThrough(s);
  });
}

void ReadData(const ConfigReader& r, const json& j, DataConfig& c) {
  r.CheckKeys(j, "data",
              {"kind", "task", "task_bits", "train_images", "train_labels",
               "test_images", "test_labels", "train_files", "test_files",
               "thresholds", "train_limit", "test_limit"});
  r.ReadEnum(j, "data", "kind", [&](const std::string& s) {
    if (s != "synthetic" && s != "idx" && s != "cifar10") {
      throw Error(ErrorCode::kConfig, "unknown data kind '" + s +
                                          "' (expected synthetic, idx or "
                                          "cifar10)");
    }
    c.kind = s;
  });
  r.Read(j, "data", "task", c.task);
  r.Read(j, "data", "task_bits", c.task_bits);
  r.Read(j, "data", "train_images", c.train_images);
  r.Read(j, "data", "train_labels", c.train_labels);
  r.Read(j, "data", "test_images", c.test_images);
  r.Read(j, "data", "test_labels", c.test_labels);
  r.Read(j, "data", "train_files", c.train_files);
  r.Read(j, "data", "test_files", c.test_files);
  r.Read(j, "data", "thresholds", c.thresholds);
  r.Read(j, "data", "train_limit", c.train_limit);
  r.Read(j, "data", "test_limit", c.test_limit);
}

void ReadDiagnostics(const ConfigReader& r, const json& j,
                     DiagnosticsConfig& c) {
  r.CheckKeys(j, "diagnostics",
              {"reports", "curvature_batch", "hutchinson_probes",
               "power_iterations", "landscape_resolution", "landscape_radius",
               "entropy_samples", "entropy_percentile", "lemma_taus",
               "lemma_samples", "seed"});
  r.Read(j, "diagnostics", "reports", c.reports);
  for (const std::string& name : c.reports) {
    bool known = false;
    for (std::string_view k : kReportNames) known = known || name == k;
    if (!known) {
      r.Fail("diagnostics", "reports",
             "unknown report '" + name +
                 "' (expected entropy, hessian, eigen, landscape, histogram "
                 "or lemma)");
    }
  }
  r.Read(j, "diagnostics", "curvature_batch", c.curvature_batch);
  r.Read(j, "diagnostics", "hutchinson_probes", c.hutchinson_probes);
  r.Read(j, "diagnostics", "power_iterations", c.power_iterations);
  r.Read(j, "diagnostics", "landscape_resolution", c.landscape_resolution);
  r.Read(j, "diagnostics", "landscape_radius", c.landscape_radius);
  r.Read(j, "diagnostics", "entropy_samples", c.entropy_samples);
  r.Read(j, "diagnostics", "entropy_percentile", c.entropy_percentile);
  r.Read(j, "diagnostics", "lemma_taus", c.lemma_taus);
  r.Read(j, "diagnostics", "lemma_samples", c.lemma_samples);
  r.Read(j, "diagnostics", "seed", c.seed);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ResolvePath(const std::filesystem::path& base,
                        const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

}  // namespace

RunConfig ParseRunConfig(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig,
                "invalid JSON at line " + std::to_string(LineAt(text, e.byte)) +
                    ": " + e.what());
  }
  const ConfigReader reader(text);
  if (!doc.is_object()) {
    throw Error(ErrorCode::kConfig, "config must be a JSON object");
  }
  reader.CheckKeys(doc, "",
                   {"network", "training", "data", "diagnostics", "output_dir",
                    "keep_checkpoints"});
  RunConfig config;
  if (doc.contains("network")) ReadNetwork(reader, doc["network"], config.network);
  if (doc.contains("training")) {
    ReadTraining(reader, doc["training"], config.training);
  }
  if (doc.contains("data")) ReadData(reader, doc["data"], config.data);
  if (doc.contains("diagnostics")) {
    ReadDiagnostics(reader, doc["diagnostics"], config.diagnostics);
  }
  reader.Read(doc, "", "output_dir", config.output_dir);
  reader.Read(doc, "", "keep_checkpoints", config.keep_checkpoints);
  if (config.keep_checkpoints < 1) {
    reader.Fail("", "keep_checkpoints", "must be at least 1");
  }
  config.training.Validate();
  if (config.data.kind != "synthetic") {
    BinarizationSpec{config.data.thresholds.empty()
                         ? std::vector<double>{0.5}
                         : config.data.thresholds}
        .Validate();
  }
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  RunConfig config = ParseRunConfig(ReadFile(path));
  const std::filesystem::path base =
      std::filesystem::path(path).parent_path();
  DataConfig& d = config.data;
  for (std::string* p : {&d.train_images, &d.train_labels, &d.test_images,
                         &d.test_labels}) {
    *p = ResolvePath(base, *p);
  }
  for (std::string& p : d.train_files) p = ResolvePath(base, p);
  for (std::string& p : d.test_files) p = ResolvePath(base, p);

  if (const char* dir = std::getenv("LGN_OUTPUT_DIR"); dir && *dir) {
    config.output_dir = dir;
  }
  if (const char* threads = std::getenv("LGN_THREADS"); threads && *threads) {
    char* end = nullptr;
    const long n = std::strtol(threads, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) {
      throw Error(ErrorCode::kConfig,
                  std::string("LGN_THREADS must be a positive integer, got '") +
                      threads + "'");
    }
    config.training.threads = static_cast<int>(n);
  }
  return config;
}

std::string RunConfigToJson(const RunConfig& c) {
  const DataConfig& d = c.data;
  const DiagnosticsConfig& g = c.diagnostics;
  json doc = {
      {"network", NetworkToJson(c.network)},
      {"training", TrainingToJson(c.training)},
      {"data",
       {{"kind", d.kind},
        {"task", d.task},
        {"task_bits", d.task_bits},
        {"train_images", d.train_images},
        {"train_labels", d.train_labels},
        {"test_images", d.test_images},
        {"test_labels", d.test_labels},
        {"train_files", d.train_files},
        {"test_files", d.test_files},
        {"thresholds", d.thresholds},
        {"train_limit", d.train_limit},
        {"test_limit", d.test_limit}}},
      {"diagnostics",
       {{"reports", g.reports},
        {"curvature_batch", g.curvature_batch},
        {"hutchinson_probes", g.hutchinson_probes},
        {"power_iterations", g.power_iterations},
        {"landscape_resolution", g.landscape_resolution},
        {"landscape_radius", g.landscape_radius},
        {"entropy_samples", g.entropy_samples},
        {"entropy_percentile", g.entropy_percentile},
        {"lemma_taus", g.lemma_taus},
        {"lemma_samples", g.lemma_samples},
        {"seed", g.seed}}},
      {"output_dir", c.output_dir},
      {"keep_checkpoints", c.keep_checkpoints}};
  return doc.dump(2) + "\n";
}

LoadedData LoadData(const DataConfig& config) {
  LoadedData out;
  if (config.kind == "synthetic") {
    out.train = SyntheticTask(config.task, config.task_bits);
  } else if (config.kind == "idx" || config.kind == "cifar10") {
    const bool idx = config.kind == "idx";
    BinarizationSpec spec{config.thresholds};
    if (spec.thresholds.empty()) {
      spec.thresholds = idx ? std::vector<double>{0.5}
                            : std::vector<double>{0.25, 0.5, 0.75};
    }
    if (idx) {
      if (config.train_images.empty() || config.train_labels.empty()) {
        throw Error(ErrorCode::kConfig,
                    "data.train_images and data.train_labels are required");
      }
      out.train =
          Binarize(LoadIdx(config.train_images, config.train_labels), spec);
      if (!config.test_images.empty() || !config.test_labels.empty()) {
        out.test =
            Binarize(LoadIdx(config.test_images, config.test_labels), spec);
      }
    } else {
      if (config.train_files.empty()) {
        throw Error(ErrorCode::kConfig, "data.train_files is required");
      }
      out.train = Binarize(LoadCifar10Binary(config.train_files), spec);
      if (!config.test_files.empty()) {
        out.test = Binarize(LoadCifar10Binary(config.test_files), spec);
      }
    }
  } else {
    throw Error(ErrorCode::kConfig, "unknown data kind '" + config.kind + "'");
  }
  if (config.train_limit > 0) out.train = Head(out.train, config.train_limit);
  if (config.test_limit > 0 && !out.test.empty()) {
    out.test = Head(out.test, config.test_limit);
  }
  return out;
}

void ResolveShapes(NetworkConfig& network, const Dataset& data) {
  if (network.input_bits == 0) {
    network.input_bits = data.feature_bits;
  } else if (network.input_bits != data.feature_bits) {
    throw Error(ErrorCode::kShape,
                "input feature_bits: expected " +
                    std::to_string(network.input_bits) + ", found " +
                    std::to_string(data.feature_bits));
  }
  if (network.num_classes == 0) {
    network.num_classes = data.num_classes;
  } else if (data.num_classes > network.num_classes) {
    throw Error(ErrorCode::kShape,
                "num_classes: expected at most " +
                    std::to_string(network.num_classes) + ", found " +
                    std::to_string(data.num_classes));
  }
  network.Validate();
}

// ---------------------------------------------------------------------------
// Checkpoints: an 8-byte magic, a u32 version, a u64 header length, a JSON
// header, then the wiring as u32 and logits, Adam m and Adam v as f64, all
// in host byte order.

namespace {

constexpr char kCheckpointMagic[8] = {'L', 'G', 'N', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void WriteRaw(std::ostream& out, const T* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
void ReadRaw(std::istream& in, T* data, std::size_t n,
             const std::string& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw Error(ErrorCode::kFormat, path + ": truncated checkpoint");
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Model& model,
                    const TrainConfig& training, const Trainer::State& state) {
  // The thread count is a property of the session, not of the run.
  json train_json = TrainingToJson(training);
  train_json.erase("threads");
  const json header = {
      {"network", NetworkToJson(model.config())},
      {"training", train_json},
      {"iteration", state.iteration},
      {"adam",
       {{"step", state.adam.step},
        {"beta1", state.adam.beta1},
        {"beta2", state.adam.beta2},
        {"epsilon", state.adam.epsilon}}},
      {"noise_rng", state.noise_rng},
      {"batches",
       {{"epoch", state.batches.epoch}, {"position", state.batches.position}}},
      {"loss_sum", state.loss_sum},
      {"loss_count", state.loss_count},
      {"num_parameters", model.num_parameters()}};
  const std::string text = header.dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t length = text.size();
    WriteRaw(out, &version, 1);
    WriteRaw(out, &length, 1);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const LayerWiring& layer : model.wiring()) {
      WriteRaw(out, layer.left.data(), layer.left.size());
      WriteRaw(out, layer.right.data(), layer.right.size());
    }
    WriteRaw(out, model.logits().data(), model.num_parameters());
    WriteRaw(out, state.adam.m.data(), state.adam.m.size());
    WriteRaw(out, state.adam.v.data(), state.adam.v.size());
    if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot write " + path + ": " + ec.message());
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kFormat, path + ": not a checkpoint file");
  }
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  ReadRaw(in, &version, 1, path);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kFormat, path + ": unsupported checkpoint version " +
                                        std::to_string(version));
  }
  ReadRaw(in, &length, 1, path);
  if (length > (std::uint64_t{1} << 32)) {
    throw Error(ErrorCode::kFormat, path + ": implausible header length");
  }
  std::string text(length, '\0');
  ReadRaw(in, text.data(), length, path);

  NetworkConfig network;
  TrainConfig training;
  Trainer::State state;
  std::size_t num_parameters = 0;
  try {
    const json h = json::parse(text);
    const ConfigReader reader(text);
    ReadNetwork(reader, h.at("network"), network);
    ReadTraining(reader, h.at("training"), training);
    state.iteration = h.at("iteration").get<std::int64_t>();
    const json& adam = h.at("adam");
    state.adam.step = adam.at("step").get<std::int64_t>();
    state.adam.beta1 = adam.at("beta1").get<double>();
    state.adam.beta2 = adam.at("beta2").get<double>();
    state.adam.epsilon = adam.at("epsilon").get<double>();
    state.noise_rng = h.at("noise_rng").get<std::string>();
    state.batches.epoch = h.at("batches").at("epoch").get<std::uint64_t>();
    state.batches.position =
        h.at("batches").at("position").get<std::size_t>();
    state.loss_sum = h.at("loss_sum").get<double>();
    state.loss_count = h.at("loss_count").get<std::int64_t>();
    num_parameters = h.at("num_parameters").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path + ": bad checkpoint header: " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, path + ": bad checkpoint header: " + e.what());
  }
  try {
    network.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
  const std::size_t expected =
      static_cast<std::size_t>(network.num_neurons()) * kNumGates;
  if (num_parameters != expected) {
    throw Error(ErrorCode::kFormat, path + ": parameter count does not match "
                                           "the network shape");
  }

  Wiring wiring(network.depth);
  for (LayerWiring& layer : wiring) {
    layer.left.resize(network.width);
    layer.right.resize(network.width);
    ReadRaw(in, layer.left.data(), layer.left.size(), path);
    ReadRaw(in, layer.right.data(), layer.right.size(), path);
  }
  std::vector<double> logits(expected);
  state.adam.m.resize(expected);
  state.adam.v.resize(expected);
  ReadRaw(in, logits.data(), expected, path);
  ReadRaw(in, state.adam.m.data(), expected, path);
  ReadRaw(in, state.adam.v.data(), expected, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormat, path + ": trailing bytes in checkpoint");
  }
  try {
    ValidateWiring(network, wiring);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
  return {Model(network, std::move(wiring), std::move(logits)), training,
          std::move(state)};
}

}  // namespace lgn
