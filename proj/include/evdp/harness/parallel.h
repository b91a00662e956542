//
// Copyright 2026 The evdp Authors
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
//

#ifndef EVDP_HARNESS_PARALLEL_H_
#define EVDP_HARNESS_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace evdp::harness {

// Number of workers to use when the caller passes 0.
inline int DefaultThreads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Evaluates fn(i) for i in [0, n) on a pool of worker threads and returns the
// results in index order, so the output does not depend on scheduling.
template <typename Fn>
auto ParallelMap(int n, Fn fn, int threads = 0)
    -> std::vector<std::invoke_result_t<Fn, int>> {
  using Result = std::invoke_result_t<Fn, int>;
  std::vector<std::optional<Result>> slots(n);
  const int workers =
      std::max(1, std::min(n, threads > 0 ? threads : DefaultThreads()));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      slots[i].emplace(fn(i));
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  std::vector<Result> out;
  out.reserve(n);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_PARALLEL_H_
