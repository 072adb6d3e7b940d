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

#ifndef LGN_DATA_H_
#define LGN_DATA_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgn {

// Real-valued samples in [0,1], row-major [sample][dim].
struct RawDataset {
  int dims = 0;
  int num_classes = 0;
  std::vector<float> values;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const float> sample(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dims, dims);
  }
};

// Boolean feature vectors (one byte per bit), row-major [sample][bit].
struct Dataset {
  int feature_bits = 0;
  int num_classes = 0;
  std::vector<std::uint8_t> bits;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const std::uint8_t> sample(std::size_t i) const {
    return std::span<const std::uint8_t>(bits).subspan(i * feature_bits,
                                                       feature_bits);
  }

  // Throws Error(kShape) on ragged storage or out-of-range labels.
  void Validate() const;
  bool operator==(const Dataset&) const = default;
};

// The first `limit` samples (all of them when limit is 0 or too large).
Dataset Head(const Dataset& data, std::size_t limit);

// MNIST-family IDX pair: images magic 0x00000803 (count, rows, cols, u8
// pixels) and labels magic 0x00000801. Pixels are scaled by 1/255. Throws
// Error(kFormat) naming the byte offset on bad magic, truncation or count
// mismatch; Error(kIo) if a file cannot be opened.
RawDataset LoadIdx(const std::string& images_path,
                   const std::string& labels_path);

// Writes the inverse of LoadIdx (pixels rounded to bytes).
void SaveIdx(const RawDataset& data, const std::string& images_path,
             const std::string& labels_path);

inline constexpr int kCifarPixels = 3072;
inline constexpr int kCifarRecordBytes = 1 + kCifarPixels;

// CIFAR-10 binary batches: records of one label byte (< 10) followed by
// 3072 pixel bytes.
RawDataset LoadCifar10Binary(const std::vector<std::string>& paths);
void SaveCifar10Binary(const RawDataset& data, const std::string& path);

struct BinarizationSpec {
  // Strictly increasing, each in (0,1).
  std::vector<double> thresholds;

  // Throws Error(kConfig).
  void Validate() const;
};

// Feature (d, t) = 1 iff raw[d] > thresholds[t], stored at index
// d * thresholds.size() + t (dimension-major, threshold-minor).
Dataset Binarize(const RawDataset& raw, const BinarizationSpec& spec);

// Mini-batches of sample indices. Each epoch is a fresh seed-derived
// permutation; the final short batch of an epoch is kept.
class BatchIterator {
 public:
  struct State {
    std::uint64_t epoch = 0;
    std::size_t position = 0;
  };

  BatchIterator(std::size_t dataset_size, int batch_size, std::uint64_t seed);

  std::vector<int> Next();

  State state() const { return {epoch_, position_}; }
  void Restore(const State& state);

 private:
  void Shuffle();

  std::size_t size_;
  int batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::size_t position_ = 0;
  std::vector<int> order_;
};

// Exhaustive truth-table datasets over n_bits <= 16 inputs. Sample i has
// bit j equal to bit j of i. Names: "xor" (bit0 ^ bit1), "parity" /
// "parity_k" (parity of the first k bits), "majority" / "majority_k"
// (popcount of the first k bits > k / 2). Throws Error(kConfig).
Dataset SyntheticTask(std::string_view name, int n_bits);

}  // namespace lgn

#endif  // LGN_DATA_H_
