#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace episodic::detail {

/// Calls fn(i) for i in [0, count) on at most `max_parallel` threads.
/// fn must not throw; callers park results and errors in per-index slots
/// so joins are deterministic.
template <class Fn>
void bounded_for(std::size_t count, std::size_t max_parallel, Fn&& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(max_parallel, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(drain);
  drain();
}

}  // namespace episodic::detail
