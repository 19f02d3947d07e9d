#ifndef SMCNUTS_SRC_PARALLEL_HPP
#define SMCNUTS_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace smcnuts::detail {

// Static block partition of [0, n). Each index is visited by exactly one
// worker, so results written per index do not depend on the worker count.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F &&body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  workers.clear();  // joins
  if (error) std::rethrow_exception(error);
}

}  // namespace smcnuts::detail

#endif  // SMCNUTS_SRC_PARALLEL_HPP
