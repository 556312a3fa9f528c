#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace nogap {

void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, n); each index must write only its own output slot.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto threads = static_cast<std::size_t>(thread_count());
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  worker();
}

}  // namespace nogap
