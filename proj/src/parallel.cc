// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace mave {

std::vector<SceneFailure> ParallelFor(
    std::size_t n, std::size_t workers,
    const std::function<void(std::size_t)>& fn) {
  std::vector<SceneFailure> failures;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  const auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failures.push_back({i, {}, e.what()});
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (count == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(run);
  }
  std::ranges::sort(failures, {}, &SceneFailure::index);
  return failures;
}

}  // namespace mave
