// Copyright 2026 The weaklabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace weaklabel {

inline std::size_t default_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs `work(i)` for i in [0, n) on up to `workers` threads and hands each result
/// to `emit(i, result)` strictly in index order, from one thread at a time.
/// Exceptions thrown by `work` must be handled inside it; an exception from
/// `emit` stops the run and is rethrown.
template <typename Result>
void ordered_parallel_for(std::size_t n, std::size_t workers, const std::function<Result(std::size_t)>& work,
                          const std::function<void(std::size_t, Result&&)>& emit) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) emit(i, work(i));
    return;
  }
  std::vector<std::optional<Result>> pending(n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t next_emit = 0;
  std::exception_ptr failure;
  std::atomic<bool> stop{false};

  auto run = [&] {
    for (std::size_t i = next++; i < n && !stop; i = next++) {
      Result r = work(i);
      std::lock_guard lock(mu);
      pending[i].emplace(std::move(r));
      try {
        while (next_emit < n && pending[next_emit]) {
          emit(next_emit, std::move(*pending[next_emit]));
          pending[next_emit].reset();
          ++next_emit;
        }
      } catch (...) {
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace weaklabel
