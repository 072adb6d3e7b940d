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
#include <cstdlib>
#include <functional>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "lgn/error.h"

namespace lgn {
namespace {

namespace fs = std::filesystem;

class DataFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lgn_data_test_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  void WriteBytes(const std::string& name,
                  const std::vector<std::uint8_t>& bytes) const {
    std::ofstream out(Path(name), std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }

  fs::path dir_;
};

// Hand-assembled IDX files: two 2x2 images.
std::vector<std::uint8_t> TinyImages() {
  return {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2,
          0, 255, 128, 1, 255, 0, 0, 64};
}
std::vector<std::uint8_t> TinyLabels() { return {0, 0, 8, 1, 0, 0, 0, 2, 7, 3}; }

ErrorCode CodeOf(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST_F(DataFiles, LoadIdxScalesPixels) {
  WriteBytes("img", TinyImages());
  WriteBytes("lbl", TinyLabels());
  const RawDataset d = LoadIdx(Path("img"), Path("lbl"));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dims, 4);
  EXPECT_EQ(d.labels, (std::vector<int>{7, 3}));
  EXPECT_EQ(d.num_classes, 8);
  EXPECT_EQ(d.sample(0)[0], 0.0f);
  EXPECT_EQ(d.sample(0)[1], 1.0f);
  EXPECT_FLOAT_EQ(d.sample(1)[3], 64.0f / 255.0f);
  EXPECT_EQ(LoadIdx(Path("img"), Path("lbl")).values, d.values);
}

TEST_F(DataFiles, LoadIdxErrorsNameTheOffset) {
  WriteBytes("lbl", TinyLabels());
  std::vector<std::uint8_t> truncated = TinyImages();
  truncated.pop_back();
  WriteBytes("short", truncated);
  std::string what;
  EXPECT_EQ(CodeOf([&] { LoadIdx(Path("short"), Path("lbl")); }, &what),
            ErrorCode::kFormat);
  EXPECT_NE(what.find("offset 23"), std::string::npos) << what;

  std::vector<std::uint8_t> magic = TinyImages();
  magic[3] = 4;
  WriteBytes("magic", magic);
  EXPECT_EQ(CodeOf([&] { LoadIdx(Path("magic"), Path("lbl")); }, &what),
            ErrorCode::kFormat);
  EXPECT_NE(what.find("offset 0"), std::string::npos) << what;

  WriteBytes("img", TinyImages());
  std::vector<std::uint8_t> count = TinyLabels();
  count[7] = 3;
  count.push_back(1);
  WriteBytes("count", count);
  EXPECT_EQ(CodeOf([&] { LoadIdx(Path("img"), Path("count")); }, &what),
            ErrorCode::kFormat);
  EXPECT_NE(what.find("offset 4"), std::string::npos) << what;

  EXPECT_EQ(CodeOf([&] { LoadIdx(Path("nope"), Path("lbl")); }), ErrorCode::kIo);
}

TEST_F(DataFiles, IdxRoundTrip) {
  RawDataset d;
  d.dims = 5;
  d.num_classes = 4;
  for (int i = 0; i < 3 * 5; ++i) d.values.push_back((i * 17 % 256) / 255.0f);
  d.labels = {3, 0, 1};
  SaveIdx(d, Path("i"), Path("l"));
  const RawDataset back = LoadIdx(Path("i"), Path("l"));
  EXPECT_EQ(back.values, d.values);
  EXPECT_EQ(back.labels, d.labels);
}

TEST_F(DataFiles, CifarRecordArithmetic) {
  std::vector<std::uint8_t> bytes;
  for (int r = 0; r < 10; ++r) {
    bytes.push_back(static_cast<std::uint8_t>(r));
    for (int p = 0; p < kCifarPixels; ++p) {
      bytes.push_back(static_cast<std::uint8_t>((r + p) % 256));
    }
  }
  ASSERT_EQ(bytes.size(), 30730u);
  WriteBytes("batch.bin", bytes);
  const RawDataset d = LoadCifar10Binary({Path("batch.bin")});
  EXPECT_EQ(d.size(), 10u);
  EXPECT_EQ(d.dims, 3072);
  EXPECT_EQ(d.labels[9], 9);

  SaveCifar10Binary(d, Path("copy.bin"));
  std::ifstream in(Path("copy.bin"), std::ios::binary);
  const std::vector<std::uint8_t> copy((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  EXPECT_EQ(copy, bytes);

  const RawDataset two = LoadCifar10Binary({Path("batch.bin"), Path("copy.bin")});
  EXPECT_EQ(two.size(), 20u);
}

TEST_F(DataFiles, CifarErrors) {
  std::vector<std::uint8_t> bytes(kCifarRecordBytes, 0);
  bytes[0] = 11;
  WriteBytes("label.bin", bytes);
  EXPECT_EQ(CodeOf([&] { LoadCifar10Binary({Path("label.bin")}); }),
            ErrorCode::kFormat);
  bytes[0] = 1;
  bytes.push_back(0);
  WriteBytes("size.bin", bytes);
  EXPECT_EQ(CodeOf([&] { LoadCifar10Binary({Path("size.bin")}); }),
            ErrorCode::kFormat);
}

RawDataset Raw(std::vector<float> values, int dims) {
  RawDataset r;
  r.dims = dims;
  r.num_classes = 2;
  r.labels.assign(values.size() / dims, 0);
  r.values = std::move(values);
  return r;
}

TEST(Binarize, Examples) {
  EXPECT_EQ(Binarize(Raw({0.2f, 0.8f}, 2), {{0.5}}).bits,
            (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(Binarize(Raw({0.5f}, 1), {{0.25, 0.75}}).bits,
            (std::vector<std::uint8_t>{1, 0}));
  const Dataset d = Binarize(Raw({0.1f, 0.6f, 0.9f, 0.3f, 0.5f, 0.7f}, 3),
                             {{0.25, 0.5, 0.75}});
  EXPECT_EQ(d.feature_bits, 9);
  EXPECT_EQ(d.size(), 2u);
  // Dimension-major, threshold-minor; strict inequality at 0.5.
  EXPECT_EQ(d.bits, (std::vector<std::uint8_t>{0, 0, 0, 1, 1, 0, 1, 1, 1,
                                               1, 0, 0, 1, 0, 0, 1, 1, 0}));
}

TEST(Binarize, SpecErrors) {
  for (const BinarizationSpec& s :
       {BinarizationSpec{{}}, BinarizationSpec{{0.5, 0.5}},
        BinarizationSpec{{0.0}}, BinarizationSpec{{0.7, 0.2}}}) {
    EXPECT_EQ(CodeOf([&] { Binarize(Raw({0.1f}, 1), s); }), ErrorCode::kConfig);
  }
}

TEST(Binarize, Monotone) {
  std::mt19937 gen(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const BinarizationSpec spec{{0.2, 0.4, 0.6, 0.8}};
  for (int i = 0; i < 2000; ++i) {
    const float lo = u(gen);
    const float hi = std::min(1.0f, lo + u(gen) * 0.3f);
    const auto a = Binarize(Raw({lo}, 1), spec).bits;
    const auto b = Binarize(Raw({hi}, 1), spec).bits;
    for (int k = 0; k < 4; ++k) EXPECT_LE(a[k], b[k]);
  }
}

TEST(BatchIterator, SizesAndCoverage) {
  BatchIterator it(10, 3, 5);
  std::vector<int> seen;
  std::vector<std::size_t> sizes;
  for (int b = 0; b < 4; ++b) {
    const auto batch = it.Next();
    sizes.push_back(batch.size());
    seen.insert(seen.end(), batch.begin(), batch.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  std::sort(seen.begin(), seen.end());
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(seen, all);
  // Second epoch is a fresh permutation.
  std::vector<int> second;
  for (int b = 0; b < 4; ++b) {
    const auto batch = it.Next();
    second.insert(second.end(), batch.begin(), batch.end());
  }
  std::vector<int> sorted = second;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, all);
}

TEST(BatchIterator, DeterministicAndRestorable) {
  BatchIterator a(37, 5, 9), b(37, 5, 9);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.Next(), b.Next());
  const BatchIterator::State s = a.state();
  std::vector<std::vector<int>> expected;
  for (int i = 0; i < 15; ++i) expected.push_back(a.Next());
  BatchIterator c(37, 5, 9);
  c.Restore(s);
  for (int i = 0; i < 15; ++i) EXPECT_EQ(c.Next(), expected[i]);
  EXPECT_EQ(CodeOf([] { BatchIterator(0, 3, 1); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { BatchIterator(4, 0, 1); }), ErrorCode::kConfig);
}

TEST(SyntheticTask, Examples) {
  const Dataset x = SyntheticTask("xor", 2);
  EXPECT_EQ(x.size(), 4u);
  EXPECT_EQ(x.labels, (std::vector<int>{0, 1, 1, 0}));

  const Dataset p = SyntheticTask("parity_3", 3);
  ASSERT_EQ(p.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto s = p.sample(i);
    EXPECT_EQ(p.labels[i], (s[0] + s[1] + s[2]) % 2);
  }
  const Dataset m = SyntheticTask("majority_3", 3);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto s = m.sample(i);
    EXPECT_EQ(m.labels[i], s[0] + s[1] + s[2] >= 2 ? 1 : 0);
  }
  // Extra bits are distractors.
  const Dataset wide = SyntheticTask("parity_2", 5);
  EXPECT_EQ(wide.size(), 32u);
  EXPECT_EQ(wide.feature_bits, 5);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(wide.labels[i], wide.sample(i)[0] ^ wide.sample(i)[1]);
  }
  EXPECT_NO_THROW(wide.Validate());
  EXPECT_EQ(CodeOf([] { SyntheticTask("and", 2); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { SyntheticTask("parity_9", 4); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { SyntheticTask("xor", 17); }), ErrorCode::kConfig);
}

TEST(Dataset, ValidateAndHead) {
  Dataset d = SyntheticTask("parity_4", 4);
  const Dataset h = Head(d, 5);
  EXPECT_EQ(h.size(), 5u);
  EXPECT_EQ(h.sample(4)[0], d.sample(4)[0]);
  d.labels[0] = 2;
  EXPECT_EQ(CodeOf([&] { d.Validate(); }), ErrorCode::kShape);
}

// The public MNIST training split, when present.
TEST(Mnist, CanonicalTrainSplit) {
  const char* env = std::getenv("LGN_MNIST_DIR");
  const std::string dir = env ? env : "/root/data/mnist";
  const std::string images = dir + "/train-images-idx3-ubyte";
  if (!fs::exists(images)) GTEST_SKIP() << "no MNIST files under " << dir;
  const RawDataset d = LoadIdx(images, dir + "/train-labels-idx1-ubyte");
  EXPECT_EQ(d.size(), 60000u);
  EXPECT_EQ(d.dims, 784);
  EXPECT_EQ(d.num_classes, 10);
}

}  // namespace
}  // namespace lgn
