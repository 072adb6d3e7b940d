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

#ifndef LGN_PARALLEL_H_
#define LGN_PARALLEL_H_

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lgn {

// Splits [0, n) into `threads` contiguous chunks and runs fn(begin, end) on
// each. Chunk boundaries depend only on (n, threads); callers that need
// thread-count-independent results must not reduce across chunks.
template <typename Fn>
void ParallelFor(int n, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    fn(0, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&](int begin, int end) {
    try {
      fn(begin, end);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end =
        static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    workers.emplace_back(run, begin, end);
  }
  run(0, static_cast<int>(static_cast<long long>(n) / threads));
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lgn

#endif  // LGN_PARALLEL_H_
