#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hardylab {

// Runs task(i) for i in [0, count) on at most `workers` threads. Each task
// writes only its own output slot, so results come back in index order no
// matter how the pool schedules them. workers <= 0 means one per core.
template <class Task>
void parallel_for(std::size_t count, int workers, Task&& task) {
  if (count == 0) return;
  std::size_t pool = workers > 0 ? static_cast<std::size_t>(workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  pool = std::min(pool, count);
  if (pool == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hardylab
