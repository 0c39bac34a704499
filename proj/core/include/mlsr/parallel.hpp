// Copyright 2026 The mlsreenact Authors.
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

#ifndef MLSR_PARALLEL_HPP_
#define MLSR_PARALLEL_HPP_

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mlsr {

// Worker count to use when the caller asks for `requested` threads. Zero
// means "default": MLSR_THREADS if set and positive, else the hardware
// concurrency. The result is always >= 1.
int resolve_thread_count(int requested = 0);

// Runs fn(begin_row, end_row) over contiguous, disjoint row ranges covering
// [0, rows). Each row is processed exactly once by exactly one worker, so
// per-row results do not depend on the schedule. The first exception thrown
// by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for_rows(int rows, int threads, Fn&& fn) {
  const int workers = std::clamp(threads, 1, std::max(rows, 1));
  if (workers == 1) {
    fn(0, rows);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(rows) * t / workers);
    const int end = static_cast<int>(static_cast<long long>(rows) * (t + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mlsr

#endif  // MLSR_PARALLEL_HPP_
