#include "cyllevy/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace cyllevy {

namespace {

std::size_t initial_workers() {
  if (const char* env = std::getenv("CYLLEVY_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t>& workers() {
  static std::atomic<std::size_t> value{initial_workers()};
  return value;
}

}  // namespace

std::size_t worker_count() { return workers().load(); }

void set_worker_count(std::size_t n) { workers().store(n == 0 ? 1 : n); }

}  // namespace cyllevy
