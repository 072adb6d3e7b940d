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

#include "lgn/data.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "lgn/error.h"
#include "lgn/random.h"

namespace lgn {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFile(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

[[noreturn]] void FormatError(const std::string& path, std::size_t offset,
                              const std::string& what) {
  throw Error(ErrorCode::kFormat,
              path + " at offset " + std::to_string(offset) + ": " + what);
}

std::uint32_t ReadBigEndian32(const std::vector<std::uint8_t>& bytes,
                              std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size()) {
    FormatError(path, bytes.size(), "truncated header");
  }
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | bytes[offset + 3];
}

void AppendBigEndian32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint8_t ToByte(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

void Dataset::Validate() const {
  if (bits.size() != labels.size() * static_cast<std::size_t>(feature_bits)) {
    throw Error(ErrorCode::kShape, "dataset storage is not samples x bits");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(ErrorCode::kShape, "label " + std::to_string(y) +
                                         " outside [0, " +
                                         std::to_string(num_classes) + ")");
    }
  }
}

Dataset Head(const Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  Dataset out;
  out.feature_bits = data.feature_bits;
  out.num_classes = data.num_classes;
  out.labels.assign(data.labels.begin(), data.labels.begin() + limit);
  out.bits.assign(data.bits.begin(),
                  data.bits.begin() + limit * data.feature_bits);
  return out;
}

RawDataset LoadIdx(const std::string& images_path,
                   const std::string& labels_path) {
  const std::vector<std::uint8_t> images = ReadFile(images_path);
  const std::vector<std::uint8_t> labels = ReadFile(labels_path);

  const std::uint32_t image_magic = ReadBigEndian32(images, 0, images_path);
  if (image_magic != kIdxImagesMagic) {
    std::ostringstream msg;
    msg << "bad IDX image magic 0x" << std::hex << image_magic;
    FormatError(images_path, 0, msg.str());
  }
  const std::uint32_t count = ReadBigEndian32(images, 4, images_path);
  const std::uint32_t rows = ReadBigEndian32(images, 8, images_path);
  const std::uint32_t cols = ReadBigEndian32(images, 12, images_path);
  const std::size_t dims = static_cast<std::size_t>(rows) * cols;
  const std::size_t expected = 16 + static_cast<std::size_t>(count) * dims;
  if (images.size() < expected) {
    FormatError(images_path, images.size(),
                "truncated image data, expected " + std::to_string(expected) +
                    " bytes");
  }

  const std::uint32_t label_magic = ReadBigEndian32(labels, 0, labels_path);
  if (label_magic != kIdxLabelsMagic) {
    std::ostringstream msg;
    msg << "bad IDX label magic 0x" << std::hex << label_magic;
    FormatError(labels_path, 0, msg.str());
  }
  const std::uint32_t label_count = ReadBigEndian32(labels, 4, labels_path);
  if (label_count != count) {
    FormatError(labels_path, 4,
                "label count " + std::to_string(label_count) +
                    " does not match image count " + std::to_string(count));
  }
  if (labels.size() < 8 + static_cast<std::size_t>(count)) {
    FormatError(labels_path, labels.size(),
                "truncated label data, expected " +
                    std::to_string(8 + std::size_t{count}) + " bytes");
  }

  RawDataset out;
  out.dims = static_cast<int>(dims);
  out.values.resize(static_cast<std::size_t>(count) * dims);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = static_cast<float>(images[16 + i]) / 255.0f;
  }
  out.labels.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    out.labels[i] = labels[8 + i];
    max_label = std::max(max_label, out.labels[i]);
  }
  out.num_classes = max_label + 1;
  return out;
}

void SaveIdx(const RawDataset& data, const std::string& images_path,
             const std::string& labels_path) {
  // Written as a single row of `dims` columns.
  std::vector<std::uint8_t> images;
  AppendBigEndian32(images, kIdxImagesMagic);
  AppendBigEndian32(images, static_cast<std::uint32_t>(data.size()));
  AppendBigEndian32(images, 1);
  AppendBigEndian32(images, static_cast<std::uint32_t>(data.dims));
  for (float v : data.values) images.push_back(ToByte(v));
  std::vector<std::uint8_t> labels;
  AppendBigEndian32(labels, kIdxLabelsMagic);
  AppendBigEndian32(labels, static_cast<std::uint32_t>(data.size()));
  for (int y : data.labels) labels.push_back(static_cast<std::uint8_t>(y));
  WriteFile(images_path, images);
  WriteFile(labels_path, labels);
}

RawDataset LoadCifar10Binary(const std::vector<std::string>& paths) {
  RawDataset out;
  out.dims = kCifarPixels;
  out.num_classes = 10;
  for (const std::string& path : paths) {
    const std::vector<std::uint8_t> bytes = ReadFile(path);
    if (bytes.size() % kCifarRecordBytes != 0) {
      FormatError(path, bytes.size() - bytes.size() % kCifarRecordBytes,
                  "file size " + std::to_string(bytes.size()) +
                      " is not a multiple of the 3073-byte record size");
    }
    const std::size_t records = bytes.size() / kCifarRecordBytes;
    out.values.reserve(out.values.size() + records * kCifarPixels);
    for (std::size_t r = 0; r < records; ++r) {
      const std::size_t offset = r * kCifarRecordBytes;
      if (bytes[offset] >= 10) {
        FormatError(path, offset,
                    "label byte " + std::to_string(bytes[offset]) +
                        " outside [0, 10)");
      }
      out.labels.push_back(bytes[offset]);
      for (int p = 0; p < kCifarPixels; ++p) {
        out.values.push_back(static_cast<float>(bytes[offset + 1 + p]) /
                             255.0f);
      }
    }
  }
  return out;
}

void SaveCifar10Binary(const RawDataset& data, const std::string& path) {
  if (data.dims != kCifarPixels) {
    throw Error(ErrorCode::kShape, "CIFAR-10 records hold 3072 pixels");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(data.size() * kCifarRecordBytes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes.push_back(static_cast<std::uint8_t>(data.labels[i]));
    for (float v : data.sample(i)) bytes.push_back(ToByte(v));
  }
  WriteFile(path, bytes);
}

void BinarizationSpec::Validate() const {
  if (thresholds.empty()) {
    throw Error(ErrorCode::kConfig, "binarization needs at least one threshold");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kConfig, "binarization thresholds must lie in (0,1)");
    }
    if (i > 0 && !(t > thresholds[i - 1])) {
      throw Error(ErrorCode::kConfig,
                  "binarization thresholds must be strictly increasing");
    }
  }
}

Dataset Binarize(const RawDataset& raw, const BinarizationSpec& spec) {
  spec.Validate();
  const std::size_t t_count = spec.thresholds.size();
  Dataset out;
  out.feature_bits = static_cast<int>(raw.dims * t_count);
  out.num_classes = raw.num_classes;
  out.labels = raw.labels;
  out.bits.resize(raw.size() * out.feature_bits);
  std::size_t k = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (float v : raw.sample(i)) {
      for (double t : spec.thresholds) out.bits[k++] = double{v} > t ? 1 : 0;
    }
  }
  return out;
}

BatchIterator::BatchIterator(std::size_t dataset_size, int batch_size,
                             std::uint64_t seed)
    : size_(dataset_size), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (dataset_size == 0) throw Error(ErrorCode::kConfig, "empty dataset");
  Shuffle();
}

void BatchIterator::Shuffle() {
  order_.resize(size_);
  std::iota(order_.begin(), order_.end(), 0);
  Rng rng(DeriveSeed(seed_, epoch_));
  for (std::size_t i = size_; i > 1; --i) {
    std::swap(order_[i - 1], order_[rng.Below(i)]);
  }
}

std::vector<int> BatchIterator::Next() {
  if (position_ >= size_) {
    ++epoch_;
    position_ = 0;
    Shuffle();
  }
  const std::size_t end = std::min(size_, position_ + batch_size_);
  std::vector<int> batch(order_.begin() + position_, order_.begin() + end);
  position_ = end;
  return batch;
}

void BatchIterator::Restore(const State& state) {
  if (state.position > size_) {
    throw Error(ErrorCode::kFormat, "batch iterator position past dataset end");
  }
  epoch_ = state.epoch;
  position_ = state.position;
  Shuffle();
}

Dataset SyntheticTask(std::string_view name, int n_bits) {
  if (n_bits < 1 || n_bits > 16) {
    throw Error(ErrorCode::kConfig, "synthetic tasks need 1 <= n_bits <= 16");
  }
  auto parse_k = [&](std::string_view prefix) {
    if (name.size() == prefix.size()) return n_bits;
    int k = 0;
    const char* first = name.data() + prefix.size() + 1;
    const char* last = name.data() + name.size();
    if (name[prefix.size()] != '_' ||
        std::from_chars(first, last, k).ptr != last || k < 1 || k > n_bits) {
      throw Error(ErrorCode::kConfig,
                  "bad synthetic task '" + std::string(name) + "'");
    }
    return k;
  };

  enum class Kind { kParity, kMajority } kind;
  int k = 0;
  if (name == "xor") {
    if (n_bits < 2) throw Error(ErrorCode::kConfig, "xor needs 2 bits");
    kind = Kind::kParity;
    k = 2;
  } else if (name.starts_with("parity")) {
    kind = Kind::kParity;
    k = parse_k("parity");
  } else if (name.starts_with("majority")) {
    kind = Kind::kMajority;
    k = parse_k("majority");
  } else {
    throw Error(ErrorCode::kConfig,
                "unknown synthetic task '" + std::string(name) +
                    "' (expected xor, parity_k or majority_k)");
  }

  Dataset out;
  out.feature_bits = n_bits;
  out.num_classes = 2;
  const std::uint32_t count = 1u << n_bits;
  const std::uint32_t mask = (1u << k) - 1;
  for (std::uint32_t i = 0; i < count; ++i) {
    for (int j = 0; j < n_bits; ++j) out.bits.push_back((i >> j) & 1);
    const int ones = std::popcount(i & mask);
    out.labels.push_back(kind == Kind::kParity ? ones % 2 : (2 * ones > k));
  }
  return out;
}

}  // namespace lgn
