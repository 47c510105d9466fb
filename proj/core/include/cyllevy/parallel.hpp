#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cyllevy {

/// Number of worker threads used by the library; 1 disables threading.
std::size_t worker_count();
void set_worker_count(std::size_t workers);

/// Runs fn(task) for task in [0, tasks). Tasks must write only to their own
/// output slots; callers merge slots in task order, so results never depend
/// on scheduling. The first exception thrown by any task is rethrown.
template <class Fn>
void parallel_for(std::size_t tasks, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < tasks; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Splits [0, items) into fixed blocks of `block` items (independent of the
/// worker count) and runs fn(block_index, begin, end) for each.
template <class Fn>
void parallel_blocks(std::size_t items, std::size_t block, Fn&& fn) {
  const std::size_t blocks = (items + block - 1) / block;
  parallel_for(blocks, [&](std::size_t b) {
    fn(b, b * block, std::min(items, (b + 1) * block));
  });
}

}  // namespace cyllevy
