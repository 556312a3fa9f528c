#include "nogap/parallel.hpp"

#include <algorithm>

namespace nogap {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) { g_threads = std::max(1, threads); }

int thread_count() { return g_threads; }

}  // namespace nogap
