#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace scrip::detail {

// Worker count for embarrassingly parallel row jobs: hardware concurrency,
// capped by the SCRIPSIM_THREADS environment variable and the job count.
inline unsigned worker_count(size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("SCRIPSIM_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v < long(hw)) hw = unsigned(v);
  }
  if (jobs < hw) hw = unsigned(jobs);
  return hw == 0 ? 1 : hw;
}

// Runs fn(0..count-1), possibly concurrently. fn must confine itself to its
// own row and must not throw (capture errors into the row instead).
inline void for_each_index(size_t count, const std::function<void(size_t)>& fn) {
  unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace scrip::detail
