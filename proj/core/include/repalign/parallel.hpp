#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace repalign {

// 0 restores the automatic limit (REPALIGN_THREADS env var, else hardware).
void set_thread_limit(unsigned n);
unsigned thread_limit();

// Runs f(i) for every i in [0, count). Threads only decide which worker
// executes an index, never the result: callers write to per-index slots and
// reduce serially, so output is identical for every thread count.
template <class F>
void parallel_for(std::size_t count, F&& f, std::size_t grain = 16) {
  const unsigned limit = thread_limit();
  if (limit <= 1 || count <= grain) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(grain);
      if (begin >= count || failed.load()) return;
      const std::size_t end = std::min(begin + grain, count);
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const std::size_t chunks = (count + grain - 1) / grain;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(limit, chunks));
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace repalign
