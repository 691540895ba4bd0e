#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "bgsm/types.hpp"

namespace bgsm {

inline int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs task(i) for every i in [0, count) on up to `workers` threads.
/// Tasks must not share mutable state. If any task throws, the exception of
/// the lowest failing index is rethrown after all workers have joined.
template <class Task>
void parallel_for(Index count, int workers, Task&& task) {
  if (count <= 0) return;
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<Index>(count, 1024)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto run_one = [&](Index i) {
    try {
      task(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) run_one(i);
  } else {
    std::atomic<Index> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (Index i = next++; i < count; i = next++) run_one(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace bgsm
